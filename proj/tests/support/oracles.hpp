#pragma once

#include <span>
#include <vector>

#include "sefce/epf.hpp"
#include "sefce/rng.hpp"

namespace sefce::testing {

/// Upper concave envelope value at x, computed directly from the definition:
/// the best over all input points and all chords between input points that
/// span x. Quadratic per query; independent of the hull filter.
double envelope_oracle(std::span<const Epf> fs, double x);

/// Weighted sup-convolution value at mu, by brute force over allocations of
/// the last input against the (recursively solved) rest. Candidate split
/// points are a dense grid refined with every exact knot preimage, which
/// makes the oracle exact for piecewise-linear inputs.
double convolve_oracle(std::span<const double> ps, std::span<const Epf> fs,
                       double mu, double grid_step = 1e-3);

/// Random canonical concave frontier: strictly decreasing slopes, knot count
/// in [1, max_knots].
Epf random_concave(rng& r, int max_knots = 8, double x_lo = -5.0,
                   double x_hi = 5.0);

/// Random concave frontier over exactly the domain [lo, hi].
Epf random_concave_on(rng& r, double lo, double hi, int max_knots = 8);

/// Random raw point set for canonicalization tests; includes exact
/// duplicates and exactly collinear triples with positive probability.
std::vector<Knot> random_points(rng& r, int max_points = 12);

}  // namespace sefce::testing
