#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>

namespace sefce::testing {

double envelope_oracle(std::span<const Epf> fs, double x) {
  std::vector<Knot> pts;
  for (const Epf& f : fs) {
    pts.insert(pts.end(), f.knots().begin(), f.knots().end());
  }
  double best = kNegInf;
  for (const Knot& p : pts) {
    if (p.x == x) best = std::max(best, p.y);
  }
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = 0; j < pts.size(); ++j) {
      const Knot& a = pts[i];
      const Knot& b = pts[j];
      if (a.x < x && x < b.x) {
        double t = (x - a.x) / (b.x - a.x);
        best = std::max(best, a.y + t * (b.y - a.y));
      }
    }
  }
  return best;
}

namespace {

// Snap tiny division overshoots back into the domain.
double snapped_eval(const Epf& f, double m) {
  if (m < f.x_min() && m > f.x_min() - 1e-9) m = f.x_min();
  if (m > f.x_max() && m < f.x_max() + 1e-9) m = f.x_max();
  return f.eval(m);
}

}  // namespace

double convolve_oracle(std::span<const double> ps, std::span<const Epf> fs,
                       double mu, double grid_step) {
  int n = static_cast<int>(fs.size());
  double best = kNegInf;

  // A sup-allocation of concave piecewise-linear summands pins every input
  // but at most one at a knot. Enumerate the free input and all knot tuples
  // of the rest; exact for any n, no grid involved.
  for (int free = 0; free < n; ++free) {
    std::vector<int> others;
    for (int i = 0; i < n; ++i) {
      if (i != free) others.push_back(i);
    }
    std::vector<int> tuple(others.size(), 0);
    while (true) {
      double base_x = 0, base_y = 0;
      for (std::size_t t = 0; t < others.size(); ++t) {
        const Knot& k = fs[others[t]].knots()[tuple[t]];
        base_x += ps[others[t]] * k.x;
        base_y += ps[others[t]] * k.y;
      }
      double m = (mu - base_x) / ps[free];
      double v = snapped_eval(fs[free], m);
      if (v != kNegInf) best = std::max(best, base_y + ps[free] * v);

      std::size_t carry = 0;
      while (carry < tuple.size()) {
        if (++tuple[carry] < fs[others[carry]].size()) break;
        tuple[carry] = 0;
        ++carry;
      }
      if (carry == tuple.size()) break;
    }
  }

  // Dense-grid sweep over the second input's allocation, as an independent
  // lower confirmation in the two-input case.
  if (n == 2) {
    for (double m = fs[1].x_min(); m <= fs[1].x_max(); m += grid_step) {
      double m0 = (mu - ps[1] * m) / ps[0];
      double v0 = snapped_eval(fs[0], m0);
      if (v0 == kNegInf) continue;
      best = std::max(best, ps[1] * fs[1].eval(m) + ps[0] * v0);
    }
  }
  return best;
}

Epf random_concave(rng& r, int max_knots, double x_lo, double x_hi) {
  if (r.uniform() < 0.125) {
    return Epf::from_canonical(
        {{r.uniform(x_lo, x_hi), r.uniform(-10.0, 10.0)}});
  }
  double lo = r.uniform(x_lo, x_hi - 0.5);
  double hi = lo + r.uniform(0.5, x_hi - lo);
  return random_concave_on(r, lo, hi, max_knots);
}

Epf random_concave_on(rng& r, double lo, double hi, int max_knots) {
  int k = 2 + r.uniform_int(std::max(1, max_knots - 1));
  // Interior x's spaced well clear of the dedup tolerance.
  std::vector<double> xs{lo};
  for (int i = 1; i + 1 < k; ++i) {
    xs.push_back(r.uniform(lo + 0.01, hi - 0.01));
  }
  xs.push_back(hi);
  std::sort(xs.begin(), xs.end());
  std::vector<double> pruned{xs[0]};
  for (double x : xs) {
    if (x - pruned.back() > 0.05) pruned.push_back(x);
  }
  if (pruned.back() != hi) pruned.push_back(hi);

  double slope = r.uniform(-2.0, 8.0);
  double y = r.uniform(-10.0, 10.0);
  std::vector<Knot> ks{{pruned[0], y}};
  for (std::size_t i = 1; i < pruned.size(); ++i) {
    y += slope * (pruned[i] - pruned[i - 1]);
    ks.push_back({pruned[i], y});
    slope -= r.uniform(0.1, 4.0);
  }
  return Epf::from_canonical(std::move(ks));
}

std::vector<Knot> random_points(rng& r, int max_points) {
  int n = 1 + r.uniform_int(max_points);
  std::vector<Knot> pts;
  for (int i = 0; i < n; ++i) {
    pts.push_back({r.uniform(-5.0, 5.0), r.uniform(-10.0, 10.0)});
  }
  // Seed exact duplicates and exact collinear triples so the dedup and both
  // concavity filters face their tie-breaking paths.
  if (n >= 2 && r.uniform() < 0.4) {
    Knot d = pts[r.uniform_int(n)];
    pts.push_back(d);
    pts.push_back({d.x, d.y - 1.0});
  }
  if (r.uniform() < 0.4) {
    double x0 = r.uniform(-5.0, 0.0);
    double y0 = r.uniform(-5.0, 5.0);
    double sl = r.uniform(-3.0, 3.0);
    for (int j = 0; j < 3; ++j) {
      pts.push_back({x0 + j, y0 + sl * j});
    }
  }
  return pts;
}

}  // namespace sefce::testing
