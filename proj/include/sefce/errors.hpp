#pragma once

#include <stdexcept>
#include <string>

namespace sefce {

/// Malformed inputs: empty knot sets, bad probability vectors, invalid
/// generator or config parameters. CLI maps these to exit code 2.
struct config_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct empty_epf : config_error {
  empty_epf() : config_error("EPF requires at least one knot") {}
};

struct bad_distribution : config_error {
  using config_error::config_error;
};

struct bad_parameter : config_error {
  using config_error::config_error;
};

struct shape_error : config_error {
  using config_error::config_error;
};

struct parse_error : config_error {
  using config_error::config_error;
};

/// Numerical preconditions violated at runtime: queries outside a frontier's
/// domain, mismatched domains, factorization failures. CLI exit code 3.
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct out_of_domain : numerical_error {
  using numerical_error::numerical_error;
};

struct domain_mismatch : numerical_error {
  using numerical_error::numerical_error;
};

/// Enumeration exceeded the configured state budget. CLI exit code 4.
struct too_large : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace sefce
