#pragma once

#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "sefce/errors.hpp"

namespace sefce {

/// Shared absolute tolerance for knot dedup, concavity filtering, domain
/// equality and probability sums.
inline constexpr double kTol = 1e-9;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Knot {
  double x = 0.0;
  double y = 0.0;
};

/// Piecewise-linear concave frontier over a closed interval, evaluating to
/// -inf outside it. Knots are canonical: x strictly increasing, no knot on
/// or below the chord of its neighbors, so segment slopes strictly decrease.
/// The x axis carries the follower's promised payoff, y the leader's.
class Epf {
 public:
  Epf() = default;

  const std::vector<Knot>& knots() const { return knots_; }
  int size() const { return static_cast<int>(knots_.size()); }
  bool empty() const { return knots_.empty(); }
  bool is_point() const { return knots_.size() == 1; }

  double x_min() const { return knots_.front().x; }
  double x_max() const { return knots_.back().x; }
  bool contains(double x) const { return x >= x_min() && x <= x_max(); }

  /// Value at x; -inf outside [x_min, x_max].
  double eval(double x) const;

  /// Smallest x attaining the maximum y.
  double peak_x() const { return knots_[peak_index()].x; }
  double peak_y() const { return knots_[peak_index()].y; }
  int peak_index() const;

  /// Used by the canonicalization routines; `canonical` must already satisfy
  /// the class invariant.
  static Epf from_canonical(std::vector<Knot> canonical) {
    Epf f;
    f.knots_ = std::move(canonical);
    return f;
  }

 private:
  std::vector<Knot> knots_;
};

inline double eval(const Epf& f, double x) { return f.eval(x); }

/// True if b lies on or below (within tol) the chord from a to c.
/// Requires a.x < c.x.
inline bool below_chord(const Knot& a, const Knot& b, const Knot& c,
                        double tol = kTol) {
  double t = (b.x - a.x) / (c.x - a.x);
  return b.y <= a.y + t * (c.y - a.y) + tol;
}

/// Canonicalizes an arbitrary point set into its least concave majorant:
/// sorts by x, merges x-duplicates keeping the highest y, then drops every
/// point on or below a chord of the others. Throws empty_epf on no input.
Epf make_epf(std::vector<Knot> points);

/// make_epf variant that also reports, per canonical knot, the index of the
/// input point it came from. Dropped and merged points appear in no slot.
std::pair<Epf, std::vector<int>> make_epf_traced(const std::vector<Knot>& points);

/// Cubic-time reference canonicalization: keeps a point iff no pair of other
/// points spans it from on-or-above. Agrees exactly with make_epf; kept as an
/// independent cross-check of the hull filter.
Epf make_epf_cubic(std::vector<Knot> points);

/// Pointwise-max upper concave envelope of the inputs. Domain is the union
/// span of the input domains. Requires at least one input.
Epf envelope(std::span<const Epf> fs);

/// Restriction to x >= t. Returns nullopt when t exceeds the domain;
/// returns f unchanged when t <= x_min.
std::optional<Epf> truncate(const Epf& f, double t);

/// Restriction to x <= t, mirror of truncate. Internal to window clamping.
std::optional<Epf> truncate_above(const Epf& f, double t);

/// Weighted sup-convolution: the exact frontier of a chance state whose
/// children have frontiers fs[i] reached with probability ps[i].
/// (sup over allocations sum(p_i mu_i) = mu of sum(p_i f_i(mu_i)).)
/// Probabilities must be positive and sum to 1 within kTol.
Epf max_convolve(std::span<const double> ps, std::span<const Epf> fs);

/// Splits a convolution query point back onto the inputs: returns per-input
/// mu_i with sum(p_i mu_i) = mu and sum(p_i f_i(mu_i)) = conv(mu). mu must
/// lie in the convolution's domain.
std::vector<double> max_convolve_split(std::span<const double> ps,
                                       std::span<const Epf> fs, double mu);

/// A point on an envelope expressed as a convex combination of at most two
/// source frontiers: t * fs[left](mu_left) + (1-t) * fs[right](mu_right).
struct Decomposition {
  int left = 0;
  int right = 0;
  double t = 1.0;  // weight on left
  double mu_left = 0.0;
  double mu_right = 0.0;
};

/// Expresses env(mu2) as a mixture of the sources fs (env must be their
/// envelope). Prefers a single source (t = 1, both points at mu2), breaking
/// ties toward the smallest index; otherwise mixes the two hull-segment
/// endpoints. Throws out_of_domain when mu2 lies outside env's domain.
Decomposition decompose(std::span<const Epf> fs, const Epf& env, double mu2);

/// Clamps f to its non-increasing portion: left of the peak the value is
/// flattened at the maximum. Identity when f is already non-increasing.
Epf decreasing_part(const Epf& f);

/// decreasing_part plus the mapping from output knots back to input knots,
/// for gradient routing. When prepended, dp knot 0 reuses input[0].x and
/// input[peak].y; the remaining dp knots are input knots first_kept onward.
struct DecreasingTrace {
  Epf dp;
  int peak = 0;
  bool prepended = false;
  int first_kept = 0;
};
DecreasingTrace decreasing_part_traced(const Epf& f);

/// Sorted union of both knot x sets, merging values within kTol (keeping
/// f's coordinate on a merge).
std::vector<double> union_knot_xs(const Epf& f, const Epf& g);

/// Sup-norm distance, evaluated over the union of knot x's (exact for
/// piecewise-linear functions on a shared domain). Domains must agree
/// within kTol or domain_mismatch is thrown.
double linf_distance(const Epf& f, const Epf& g);

/// Sum of squared gaps over the union of knot x's. Upper-bounds the squared
/// sup-norm distance on a shared domain.
double knot_sq_loss(const Epf& f, const Epf& g);

/// Integral of the squared gap over the shared domain. Not used for
/// training by default; kept as a contrast objective.
double integral_sq_loss(const Epf& f, const Epf& g);

}  // namespace sefce
