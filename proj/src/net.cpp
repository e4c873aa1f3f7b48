#include "sefce/net.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "sefce/errors.hpp"

namespace sefce {

namespace {

double sigmoid(double a) {
  if (a >= 0) return 1.0 / (1.0 + std::exp(-a));
  double e = std::exp(a);
  return e / (1.0 + e);
}

double eval_clamped(const Epf& f, double x) {
  return f.eval(std::clamp(x, f.x_min(), f.x_max()));
}

/// Index of a knot of f within kTol of x, or -1.
int locate_own(const Epf& f, double x) {
  const auto& ks = f.knots();
  auto it = std::lower_bound(ks.begin(), ks.end(), x - kTol,
                             [](const Knot& k, double v) { return k.x < v; });
  if (it != ks.end() && std::abs(it->x - x) <= kTol) {
    return static_cast<int>(it - ks.begin());
  }
  return -1;
}

/// Segment [i, i+1] used to interpolate f at x. Requires f.size() >= 2.
int segment_below(const Epf& f, double x) {
  const auto& ks = f.knots();
  auto it = std::upper_bound(ks.begin(), ks.end(), x,
                             [](double v, const Knot& k) { return v < k.x; });
  int i = static_cast<int>(it - ks.begin()) - 1;
  return std::clamp(i, 0, f.size() - 2);
}

/// Segment ending at x (left subgradient side); the first segment stands in
/// at the left end. -1 for a single-knot frontier.
int left_segment(const Epf& g, double x) {
  if (g.size() < 2) return -1;
  const auto& ks = g.knots();
  auto it = std::lower_bound(ks.begin(), ks.end(), x - kTol,
                             [](const Knot& k, double v) { return k.x < v; });
  int i = static_cast<int>(it - ks.begin()) - 1;
  return std::clamp(i, 0, g.size() - 2);
}

double left_slope(const Epf& g, double x) {
  int i = left_segment(g, x);
  if (i < 0) return 0.0;
  const auto& ks = g.knots();
  return (ks[i + 1].y - ks[i].y) / (ks[i + 1].x - ks[i].x);
}

/// How f's value at one evaluation point depends on f's knots: either the
/// point sits on knot `own` (value is that knot's height, and the point
/// itself travels with the knot), or it interpolates segment `seg` with
/// weight lambda on the right knot.
struct EvalGrad {
  double value = 0;
  int own = -1;
  int seg = -1;
  double lambda = 0;
  double slope = 0;
};

EvalGrad eval_grad(const Epf& f, double x) {
  EvalGrad e;
  double xc = std::clamp(x, f.x_min(), f.x_max());
  int own = locate_own(f, xc);
  if (own >= 0) {
    e.own = own;
    e.value = f.knots()[own].y;
    return e;
  }
  int i = segment_below(f, xc);
  const auto& ks = f.knots();
  double dx = ks[i + 1].x - ks[i].x;
  e.seg = i;
  e.lambda = (xc - ks[i].x) / dx;
  e.slope = (ks[i + 1].y - ks[i].y) / dx;
  e.value = (1 - e.lambda) * ks[i].y + e.lambda * ks[i + 1].y;
  return e;
}

/// Adds w * d(f(x))/d(knots) into (dx, dy), including the travel term
/// -w * g'(x) when the evaluation point is f's own knot.
void apply_eval_grad(const EvalGrad& e, double w, const Epf& g, double x,
                     std::vector<double>& dx, std::vector<double>& dy) {
  if (e.own >= 0) {
    dy[e.own] += w;
    dx[e.own] += -w * left_slope(g, x);
  } else {
    dy[e.seg] += w * (1 - e.lambda);
    dy[e.seg + 1] += w * e.lambda;
    dx[e.seg] += w * e.slope * (e.lambda - 1);
    dx[e.seg + 1] += -w * e.slope * e.lambda;
  }
}

}  // namespace

NetParams NetParams::zeros(int m, int depth, int width, int feature_dim) {
  if (m < 2 || depth < 1 || width < 1 || feature_dim < 1) {
    throw bad_parameter("model shape must have m >= 2, depth/width/features >= 1");
  }
  NetParams p;
  p.W.reserve(depth);
  p.b.reserve(depth);
  for (int l = 0; l < depth; ++l) {
    int in = (l == 0) ? feature_dim : width;
    p.W.push_back(Eigen::MatrixXd::Zero(width, in));
    p.b.push_back(Eigen::VectorXd::Zero(width));
  }
  p.zx = Eigen::MatrixXd::Zero(m - 2, width);
  p.bx = Eigen::VectorXd::Zero(m - 2);
  p.zy = Eigen::MatrixXd::Zero(m, width);
  p.by = Eigen::VectorXd::Zero(m);
  return p;
}

void NetParams::set_zero() {
  for_each([](auto v) { v.setZero(); });
}

void NetParams::init(rng& r) {
  for (auto& w : W) {
    double scale = std::sqrt(2.0 / static_cast<double>(w.cols()));
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = scale * r.normal();
  }
  for (auto& v : b) v.setZero();
  double head = 1.0 / std::sqrt(static_cast<double>(zy.cols()));
  for (Eigen::Index i = 0; i < zx.size(); ++i) zx.data()[i] = head * r.normal();
  bx.setZero();
  for (Eigen::Index i = 0; i < zy.size(); ++i) zy.data()[i] = head * r.normal();
  by.setZero();
}

int NetParams::total_size() const {
  int n = 0;
  for_each([&](auto v) { n += static_cast<int>(v.size()); });
  return n;
}

Eigen::VectorXd NetParams::flatten() const {
  Eigen::VectorXd out(total_size());
  int off = 0;
  for_each([&](auto v) {
    out.segment(off, v.size()) = v;
    off += static_cast<int>(v.size());
  });
  return out;
}

void NetParams::unflatten(const Eigen::VectorXd& flat) {
  if (flat.size() != total_size()) {
    throw shape_error("flat parameter vector has the wrong length");
  }
  int off = 0;
  for_each([&](auto v) {
    v = flat.segment(off, v.size());
    off += static_cast<int>(v.size());
  });
}

EpfModel::EpfModel(int m, int depth, int width, int feature_dim,
                   std::uint64_t seed)
    : m_(m), depth_(depth), width_(width), fdim_(feature_dim),
      online_(NetParams::zeros(m, depth, width, feature_dim)) {
  rng r = derive_stream(seed, "net-init");
  online_.init(r);
  target_ = online_;
}

ForwardTrace EpfModel::trace(const Eigen::VectorXd& features, double lo,
                             double hi, bool use_target) const {
  if (features.size() != fdim_) {
    throw shape_error("feature vector length does not match the model");
  }
  if (!std::isfinite(lo) || !std::isfinite(hi) || hi < lo) {
    throw bad_parameter("prediction window must be a finite interval");
  }
  const NetParams& p = use_target ? target_ : online_;

  ForwardTrace tr;
  tr.input = features;
  tr.lo = lo;
  tr.hi = hi;
  tr.pre.resize(depth_);
  tr.act.resize(depth_);
  const Eigen::VectorXd* below = &tr.input;
  for (int l = 0; l < depth_; ++l) {
    tr.pre[l] = p.W[l] * (*below) + p.b[l];
    tr.act[l] = tr.pre[l].cwiseMax(0.0);
    below = &tr.act[l];
  }
  const Eigen::VectorXd& h = tr.act[depth_ - 1];

  tr.ax = p.zx * h + p.bx;
  tr.sx.resize(m_ - 2);
  for (int j = 0; j < m_ - 2; ++j) tr.sx[j] = sigmoid(tr.ax[j]);
  Eigen::VectorXd ys = p.zy * h + p.by;

  tr.raw_x.resize(m_);
  tr.raw_y.resize(m_);
  std::vector<Knot> points(m_);
  for (int j = 0; j < m_; ++j) {
    double x;
    if (j == 0) {
      x = lo;
    } else if (j == m_ - 1) {
      x = hi;
    } else {
      x = lo + tr.sx[j - 1] * (hi - lo);
    }
    tr.raw_x[j] = x;
    tr.raw_y[j] = ys[j];
    points[j] = {x, ys[j]};
  }
  auto [canon, kept] = make_epf_traced(points);
  tr.canon = std::move(canon);
  tr.kept = std::move(kept);
  tr.dec = decreasing_part_traced(tr.canon);
  return tr;
}

Epf EpfModel::predict(const Eigen::VectorXd& features, double lo, double hi,
                      bool use_target) const {
  return trace(features, lo, hi, use_target).canon;
}

KnotGrad dp_loss_grad(const Epf& f, const Epf& g, LossKind kind) {
  KnotGrad kg;
  kg.dx.assign(f.size(), 0.0);
  kg.dy.assign(f.size(), 0.0);
  auto xs = union_knot_xs(f, g);
  if (kind == LossKind::kKnotSq) {
    kg.loss = knot_sq_loss(f, g);
    for (double x : xs) {
      EvalGrad ef = eval_grad(f, x);
      double delta = ef.value - eval_clamped(g, x);
      apply_eval_grad(ef, 2 * delta, g, x, kg.dx, kg.dy);
    }
    return kg;
  }

  kg.loss = integral_sq_loss(f, g);
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    EvalGrad fa = eval_grad(f, xs[i]);
    EvalGrad fb = eval_grad(f, xs[i + 1]);
    double da = fa.value - eval_clamped(g, xs[i]);
    double db = fb.value - eval_clamped(g, xs[i + 1]);
    double len = xs[i + 1] - xs[i];
    // d/du of len * (da^2 + da db + db^2) / 3 for each of da, db, len.
    apply_eval_grad(fa, len * (2 * da + db) / 3.0, g, xs[i], kg.dx, kg.dy);
    apply_eval_grad(fb, len * (da + 2 * db) / 3.0, g, xs[i + 1], kg.dx, kg.dy);
    double dlen = (da * da + da * db + db * db) / 3.0;
    if (fa.own >= 0) kg.dx[fa.own] -= dlen;
    if (fb.own >= 0) kg.dx[fb.own] += dlen;
  }
  return kg;
}

double state_backward(const ForwardTrace& tr, const NetParams& params,
                      const Epf& target, LossKind kind, NetParams& grad) {
  KnotGrad kg = dp_loss_grad(tr.dec.dp, target, kind);

  // Decreasing clamp: a prepended flat knot borrows input[0].x and the peak
  // knot's height; knots cut by the clamp receive nothing.
  int n_canon = tr.canon.size();
  std::vector<double> cx(n_canon, 0.0), cy(n_canon, 0.0);
  if (tr.dec.prepended) {
    cx[0] += kg.dx[0];
    cy[tr.dec.peak] += kg.dy[0];
    for (int j = 1; j < tr.dec.dp.size(); ++j) {
      int k = tr.dec.first_kept + j - 1;
      cx[k] += kg.dx[j];
      cy[k] += kg.dy[j];
    }
  } else {
    for (int j = 0; j < n_canon; ++j) {
      cx[j] += kg.dx[j];
      cy[j] += kg.dy[j];
    }
  }

  // Canonicalization: each surviving knot routes to the raw point it came
  // from; merged and dominated points get zero gradient.
  int m = static_cast<int>(tr.raw_x.size());
  std::vector<double> rx(m, 0.0), ry(m, 0.0);
  for (int k = 0; k < n_canon; ++k) {
    rx[tr.kept[k]] += cx[k];
    ry[tr.kept[k]] += cy[k];
  }

  int depth = static_cast<int>(tr.act.size());
  const Eigen::VectorXd& h = tr.act[depth - 1];
  Eigen::VectorXd dh = Eigen::VectorXd::Zero(h.size());

  for (int k = 0; k < m; ++k) {
    if (ry[k] == 0.0) continue;
    grad.zy.row(k) += ry[k] * h.transpose();
    grad.by[k] += ry[k];
    dh += ry[k] * params.zy.row(k).transpose();
  }
  // Endpoint x's are pinned to the window; only interior positions learn.
  double span = tr.hi - tr.lo;
  for (int j = 0; j + 2 < m; ++j) {
    double dxr = rx[j + 1];
    if (dxr == 0.0) continue;
    double da = dxr * span * tr.sx[j] * (1 - tr.sx[j]);
    grad.zx.row(j) += da * h.transpose();
    grad.bx[j] += da;
    dh += da * params.zx.row(j).transpose();
  }

  Eigen::VectorXd d = dh;
  for (int l = depth - 1; l >= 0; --l) {
    Eigen::VectorXd dpre =
        (tr.pre[l].array() > 0).select(d.array(), 0.0).matrix();
    const Eigen::VectorXd& below = (l == 0) ? tr.input : tr.act[l - 1];
    grad.W[l] += dpre * below.transpose();
    grad.b[l] += dpre;
    if (l > 0) d = params.W[l].transpose() * dpre;
  }
  return kg.loss;
}

std::vector<int> structure_signature(const ForwardTrace& tr,
                                     const Epf& target) {
  std::vector<int> sig;
  for (const auto& pre : tr.pre) {
    for (Eigen::Index i = 0; i < pre.size(); ++i) {
      sig.push_back(pre[i] > 0 ? 1 : 0);
    }
  }
  sig.push_back(tr.canon.size());
  for (int k : tr.kept) sig.push_back(k);
  sig.push_back(tr.dec.peak);
  sig.push_back(tr.dec.prepended ? 1 : 0);
  sig.push_back(tr.dec.first_kept);

  const Epf& f = tr.dec.dp;
  auto xs = union_knot_xs(f, target);
  sig.push_back(static_cast<int>(xs.size()));
  for (double x : xs) {
    EvalGrad e = eval_grad(f, x);
    sig.push_back(e.own >= 0 ? e.own : -(e.seg + 1));
    sig.push_back(e.own >= 0 ? left_segment(target, x) : -99);
  }
  return sig;
}

void adam_update(NetParams& p, const NetParams& grad, AdamState& st,
                 double lr) {
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  Eigen::VectorXd g = grad.flatten();
  if (g.size() != st.m.size()) {
    throw shape_error("optimizer state does not match the parameter count");
  }
  st.step += 1;
  double bc1 = 1 - std::pow(kBeta1, static_cast<double>(st.step));
  double bc2 = 1 - std::pow(kBeta2, static_cast<double>(st.step));
  st.m = kBeta1 * st.m + (1 - kBeta1) * g;
  st.v = kBeta2 * st.v + (1 - kBeta2) * g.cwiseProduct(g).eval();
  st.vmax = st.vmax.cwiseMax(st.v);
  Eigen::VectorXd denom =
      ((st.vmax / bc2).cwiseSqrt().array() + kEps).matrix();
  Eigen::VectorXd step = (lr / bc1) * st.m.cwiseQuotient(denom);
  int off = 0;
  p.for_each([&](auto v) {
    v -= step.segment(off, v.size());
    off += static_cast<int>(v.size());
  });
}

}  // namespace sefce
