#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace sefce {

/// Counter-based deterministic RNG. A single 64-bit run seed is split into
/// independent streams by name so that adding a consumer never perturbs the
/// draws seen by existing ones. Distributions are hand-rolled on top of the
/// raw bit stream to keep outputs identical across standard libraries.
class rng {
 public:
  explicit rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    // splitmix64: passes BigCrush, one multiply-xor pipeline per draw.
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). Requires n > 0.
  int uniform_int(int n) {
    return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
  }

  /// Standard normal via Box-Muller; the paired draw is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 == 0.0) u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 6.283185307179586476925287 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  /// Unit-rate exponential.
  double exponential() {
    double u = uniform();
    return -std::log1p(-u);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline std::uint64_t hash_stream_name(std::string_view name) {
  // FNV-1a, then one splitmix finalizer round to spread low bits.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
  return h ^ (h >> 31);
}

/// Derives the RNG stream `name` from a run seed. Streams with distinct
/// names are statistically independent; the same (seed, name) pair always
/// yields the same sequence.
inline rng derive_stream(std::uint64_t seed, std::string_view name) {
  return rng(seed ^ hash_stream_name(name));
}

/// Numbered sub-streams, e.g. one per trajectory or per game instance.
inline rng derive_stream(std::uint64_t seed, std::string_view name,
                         std::uint64_t index) {
  rng r(seed ^ hash_stream_name(name));
  // burn the index through the state so consecutive indices decorrelate
  return rng(r.next_u64() ^ (index * 0x9e3779b97f4a7c15ULL));
}

}  // namespace sefce
