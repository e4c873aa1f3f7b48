#include "sefce/epf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sefce {

namespace {

// Clamp a query into the domain; callers have already checked that any
// overshoot is within tolerance.
double eval_clamped(const Epf& f, double x) {
  return f.eval(std::clamp(x, f.x_min(), f.x_max()));
}

void check_same_domain(const Epf& f, const Epf& g) {
  if (std::abs(f.x_min() - g.x_min()) > kTol ||
      std::abs(f.x_max() - g.x_max()) > kTol) {
    throw domain_mismatch("frontier domains differ");
  }
}

// Sorts by x, merges points whose x agree within kTol keeping the highest y.
// Returns the surviving points plus their original indices.
std::pair<std::vector<Knot>, std::vector<int>> sort_and_dedup(
    const std::vector<Knot>& points) {
  std::vector<int> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (points[a].x != points[b].x) return points[a].x < points[b].x;
    if (points[a].y != points[b].y) return points[a].y > points[b].y;
    return a < b;
  });

  std::vector<Knot> kept;
  std::vector<int> src;
  std::size_t i = 0;
  while (i < order.size()) {
    double group_x = points[order[i]].x;
    int best = order[i];
    std::size_t j = i + 1;
    while (j < order.size() && points[order[j]].x - group_x <= kTol) {
      if (points[order[j]].y > points[best].y) best = order[j];
      ++j;
    }
    kept.push_back(points[best]);
    src.push_back(best);
    i = j;
  }
  return {std::move(kept), std::move(src)};
}

}  // namespace

double Epf::eval(double x) const {
  if (knots_.empty()) return kNegInf;
  if (x < knots_.front().x || x > knots_.back().x) return kNegInf;
  if (knots_.size() == 1) return knots_.front().y;
  auto it = std::lower_bound(
      knots_.begin(), knots_.end(), x,
      [](const Knot& k, double v) { return k.x < v; });
  if (it != knots_.end() && it->x == x) return it->y;
  const Knot& b = *it;
  const Knot& a = *(it - 1);
  double t = (x - a.x) / (b.x - a.x);
  return a.y + t * (b.y - a.y);
}

int Epf::peak_index() const {
  int best = 0;
  for (int i = 1; i < size(); ++i) {
    if (knots_[i].y > knots_[best].y) best = i;
  }
  return best;
}

std::pair<Epf, std::vector<int>> make_epf_traced(
    const std::vector<Knot>& points) {
  if (points.empty()) throw empty_epf();
  auto [pts, src] = sort_and_dedup(points);

  // Monotone-chain upper hull: pop the middle point whenever it sinks to or
  // below the chord of its neighbors.
  std::vector<int> stack;
  for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
    while (stack.size() >= 2 &&
           below_chord(pts[stack[stack.size() - 2]], pts[stack.back()],
                       pts[i])) {
      stack.pop_back();
    }
    stack.push_back(i);
  }

  std::vector<Knot> knots;
  std::vector<int> trace;
  knots.reserve(stack.size());
  for (int i : stack) {
    knots.push_back(pts[i]);
    trace.push_back(src[i]);
  }
  return {Epf::from_canonical(std::move(knots)), std::move(trace)};
}

Epf make_epf(std::vector<Knot> points) {
  return make_epf_traced(points).first;
}

Epf make_epf_cubic(std::vector<Knot> points) {
  if (points.empty()) throw empty_epf();
  auto [pts, src] = sort_and_dedup(points);
  (void)src;
  int n = static_cast<int>(pts.size());
  std::vector<Knot> kept;
  for (int b = 0; b < n; ++b) {
    bool dominated = false;
    for (int a = 0; a < b && !dominated; ++a) {
      for (int c = b + 1; c < n && !dominated; ++c) {
        if (below_chord(pts[a], pts[b], pts[c])) dominated = true;
      }
    }
    if (!dominated) kept.push_back(pts[b]);
  }
  return Epf::from_canonical(std::move(kept));
}

Epf envelope(std::span<const Epf> fs) {
  if (fs.empty()) throw bad_parameter("envelope of no frontiers");
  std::vector<Knot> all;
  for (const Epf& f : fs) {
    all.insert(all.end(), f.knots().begin(), f.knots().end());
  }
  return make_epf(std::move(all));
}

std::optional<Epf> truncate(const Epf& f, double t) {
  if (t <= f.x_min()) return f;
  if (t > f.x_max() + kTol) return std::nullopt;
  if (t >= f.x_max()) {
    return Epf::from_canonical({{f.x_max(), f.knots().back().y}});
  }
  const auto& ks = f.knots();
  auto it = std::upper_bound(ks.begin(), ks.end(), t,
                             [](double v, const Knot& k) { return v < k.x; });
  // it points at the first knot strictly right of t
  int first = static_cast<int>(it - ks.begin());
  std::vector<Knot> out;
  if (t - ks[first - 1].x <= kTol) {
    out.assign(ks.begin() + (first - 1), ks.end());
  } else if (ks[first].x - t <= kTol) {
    out.assign(ks.begin() + first, ks.end());
  } else {
    out.push_back({t, f.eval(t)});
    out.insert(out.end(), ks.begin() + first, ks.end());
  }
  return Epf::from_canonical(std::move(out));
}

std::optional<Epf> truncate_above(const Epf& f, double t) {
  if (t >= f.x_max()) return f;
  if (t < f.x_min() - kTol) return std::nullopt;
  if (t <= f.x_min()) {
    return Epf::from_canonical({{f.x_min(), f.knots().front().y}});
  }
  const auto& ks = f.knots();
  auto it = std::lower_bound(ks.begin(), ks.end(), t,
                             [](const Knot& k, double v) { return k.x < v; });
  // it points at the first knot at or right of t
  int last = static_cast<int>(it - ks.begin());  // exclusive end below
  std::vector<Knot> out;
  if (ks[last].x - t <= kTol) {
    out.assign(ks.begin(), ks.begin() + last + 1);
  } else if (t - ks[last - 1].x <= kTol) {
    out.assign(ks.begin(), ks.begin() + last);
  } else {
    out.assign(ks.begin(), ks.begin() + last);
    out.push_back({t, f.eval(t)});
  }
  return Epf::from_canonical(std::move(out));
}

namespace {

struct ConvSegment {
  double dx = 0, dy = 0;  // scaled by the input's probability
  double slope = 0;
  int input = 0, index = 0;
};

// Scales every input by its probability and lists all segments in
// non-increasing slope order; ties broken by (input, segment) index so the
// walk is deterministic.
std::vector<ConvSegment> merged_segments(std::span<const double> ps,
                                         std::span<const Epf> fs) {
  std::vector<ConvSegment> segs;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const auto& ks = fs[i].knots();
    for (std::size_t j = 0; j + 1 < ks.size(); ++j) {
      ConvSegment s;
      s.dx = ps[i] * (ks[j + 1].x - ks[j].x);
      s.dy = ps[i] * (ks[j + 1].y - ks[j].y);
      s.slope = (ks[j + 1].y - ks[j].y) / (ks[j + 1].x - ks[j].x);
      s.input = static_cast<int>(i);
      s.index = static_cast<int>(j);
      segs.push_back(s);
    }
  }
  std::sort(segs.begin(), segs.end(),
            [](const ConvSegment& a, const ConvSegment& b) {
              if (a.slope != b.slope) return a.slope > b.slope;
              if (a.input != b.input) return a.input < b.input;
              return a.index < b.index;
            });
  return segs;
}

void check_distribution(std::span<const double> ps, std::span<const Epf> fs) {
  if (ps.size() != fs.size() || ps.empty()) {
    throw bad_distribution("probability and frontier counts differ");
  }
  double sum = 0;
  for (double p : ps) {
    if (!(p > 0)) throw bad_distribution("probabilities must be positive");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kTol) {
    throw bad_distribution("probabilities must sum to 1");
  }
}

}  // namespace

Epf max_convolve(std::span<const double> ps, std::span<const Epf> fs) {
  check_distribution(ps, fs);
  double x = 0, y = 0;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    x += ps[i] * fs[i].x_min();
    y += ps[i] * fs[i].knots().front().y;
  }
  std::vector<Knot> out{{x, y}};
  for (const ConvSegment& s : merged_segments(ps, fs)) {
    x += s.dx;
    y += s.dy;
    out.push_back({x, y});
  }
  return make_epf(std::move(out));
}

std::vector<double> max_convolve_split(std::span<const double> ps,
                                       std::span<const Epf> fs, double mu) {
  check_distribution(ps, fs);
  std::vector<double> pos(fs.size());
  double x = 0;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    pos[i] = fs[i].x_min();
    x += ps[i] * fs[i].x_min();
  }
  auto segs = merged_segments(ps, fs);
  double x_max = x;
  for (const auto& s : segs) x_max += s.dx;
  if (mu < x - kTol || mu > x_max + kTol) {
    throw out_of_domain("convolution split outside domain");
  }
  mu = std::clamp(mu, x, x_max);
  for (const auto& s : segs) {
    const auto& ks = fs[s.input].knots();
    double full = ks[s.index + 1].x - ks[s.index].x;
    if (x + s.dx < mu) {
      x += s.dx;
      pos[s.input] = ks[s.index + 1].x;
    } else {
      double frac = s.dx > 0 ? std::clamp((mu - x) / s.dx, 0.0, 1.0) : 0.0;
      pos[s.input] = ks[s.index].x + frac * full;
      break;
    }
  }
  return pos;
}

namespace {

// Smallest source index whose frontier reaches the envelope vertex k.
int source_attaining(std::span<const Epf> fs, const Knot& k) {
  for (std::size_t i = 0; i < fs.size(); ++i) {
    if (fs[i].eval(k.x) >= k.y - kTol) return static_cast<int>(i);
  }
  throw numerical_error("envelope vertex not attained by any source");
}

}  // namespace

Decomposition decompose(std::span<const Epf> fs, const Epf& env, double mu2) {
  if (fs.empty()) throw bad_parameter("decompose with no sources");
  if (mu2 < env.x_min() - kTol || mu2 > env.x_max() + kTol) {
    throw out_of_domain("decompose outside envelope domain");
  }
  double mu = std::clamp(mu2, env.x_min(), env.x_max());
  double target = env.eval(mu);
  for (std::size_t i = 0; i < fs.size(); ++i) {
    if (fs[i].eval(mu) >= target - kTol) {
      return {static_cast<int>(i), static_cast<int>(i), 1.0, mu, mu};
    }
  }
  // No single source reaches the envelope, so mu sits strictly inside a hull
  // segment; mix its endpoints.
  const auto& ks = env.knots();
  auto it = std::upper_bound(ks.begin(), ks.end(), mu,
                             [](double v, const Knot& k) { return v < k.x; });
  int hi = static_cast<int>(it - ks.begin());
  const Knot& a = ks[hi - 1];
  const Knot& b = ks[hi];
  Decomposition d;
  d.left = source_attaining(fs, a);
  d.right = source_attaining(fs, b);
  d.t = (b.x - mu) / (b.x - a.x);
  d.mu_left = a.x;
  d.mu_right = b.x;
  return d;
}

DecreasingTrace decreasing_part_traced(const Epf& f) {
  DecreasingTrace r;
  int p = f.peak_index();
  r.peak = p;
  if (p == 0) {
    r.dp = f;
    return r;
  }
  const auto& ks = f.knots();
  r.prepended = true;
  Knot flat{ks.front().x, ks[p].y};
  // The peak knot itself survives unless the segment after it is level, in
  // which case it would sit on the flat chord.
  r.first_kept = p;
  if (p + 1 < f.size() && below_chord(flat, ks[p], ks[p + 1])) {
    r.first_kept = p + 1;
  }
  std::vector<Knot> out{flat};
  out.insert(out.end(), ks.begin() + r.first_kept, ks.end());
  r.dp = Epf::from_canonical(std::move(out));
  return r;
}

Epf decreasing_part(const Epf& f) { return decreasing_part_traced(f).dp; }

std::vector<double> union_knot_xs(const Epf& f, const Epf& g) {
  std::vector<double> xs;
  xs.reserve(f.size() + g.size());
  std::size_t i = 0, j = 0;
  const auto& a = f.knots();
  const auto& b = g.knots();
  while (i < a.size() || j < b.size()) {
    double next;
    if (j == b.size() || (i < a.size() && a[i].x <= b[j].x)) {
      next = a[i++].x;
    } else {
      next = b[j++].x;
    }
    if (xs.empty() || next - xs.back() > kTol) xs.push_back(next);
  }
  return xs;
}

double linf_distance(const Epf& f, const Epf& g) {
  check_same_domain(f, g);
  double worst = 0;
  for (double x : union_knot_xs(f, g)) {
    worst = std::max(worst, std::abs(eval_clamped(f, x) - eval_clamped(g, x)));
  }
  return worst;
}

double knot_sq_loss(const Epf& f, const Epf& g) {
  check_same_domain(f, g);
  double sum = 0;
  for (double x : union_knot_xs(f, g)) {
    double d = eval_clamped(f, x) - eval_clamped(g, x);
    sum += d * d;
  }
  return sum;
}

double integral_sq_loss(const Epf& f, const Epf& g) {
  check_same_domain(f, g);
  auto xs = union_knot_xs(f, g);
  double sum = 0;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    double d0 = eval_clamped(f, xs[i]) - eval_clamped(g, xs[i]);
    double d1 = eval_clamped(f, xs[i + 1]) - eval_clamped(g, xs[i + 1]);
    double len = xs[i + 1] - xs[i];
    // The gap is linear on each cell, so the integral of its square is the
    // usual quadrature of (d0 + (d1-d0) u)^2.
    sum += len * (d0 * d0 + d0 * d1 + d1 * d1) / 3.0;
  }
  return sum;
}

}  // namespace sefce
