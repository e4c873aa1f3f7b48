#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "sefce/epf.hpp"
#include "sefce/rng.hpp"

namespace sefce {

/// Feedforward parameters plus the frontier head: interior knot positions
/// squash through a logistic onto the state's payoff window, knot heights
/// are affine in the last hidden layer. Flattening order is fixed (layers
/// in order, each W then b, then zx, bx, zy, by) and shared by the
/// optimizer and checkpoint code.
struct NetParams {
  std::vector<Eigen::MatrixXd> W;
  std::vector<Eigen::VectorXd> b;
  Eigen::MatrixXd zx, zy;  // (m-2) x width and m x width
  Eigen::VectorXd bx, by;

  static NetParams zeros(int m, int depth, int width, int feature_dim);

  void set_zero();
  void init(rng& r);  // scaled normal weights, zero offsets
  int total_size() const;
  Eigen::VectorXd flatten() const;
  void unflatten(const Eigen::VectorXd& flat);

  template <class F>
  void for_each(F&& f) {
    for (size_t l = 0; l < W.size(); ++l) {
      f(Eigen::Map<Eigen::VectorXd>(W[l].data(), W[l].size()));
      f(Eigen::Map<Eigen::VectorXd>(b[l].data(), b[l].size()));
    }
    f(Eigen::Map<Eigen::VectorXd>(zx.data(), zx.size()));
    f(Eigen::Map<Eigen::VectorXd>(bx.data(), bx.size()));
    f(Eigen::Map<Eigen::VectorXd>(zy.data(), zy.size()));
    f(Eigen::Map<Eigen::VectorXd>(by.data(), by.size()));
  }
  template <class F>
  void for_each(F&& f) const {
    for (size_t l = 0; l < W.size(); ++l) {
      f(Eigen::Map<const Eigen::VectorXd>(W[l].data(), W[l].size()));
      f(Eigen::Map<const Eigen::VectorXd>(b[l].data(), b[l].size()));
    }
    f(Eigen::Map<const Eigen::VectorXd>(zx.data(), zx.size()));
    f(Eigen::Map<const Eigen::VectorXd>(bx.data(), bx.size()));
    f(Eigen::Map<const Eigen::VectorXd>(zy.data(), zy.size()));
    f(Eigen::Map<const Eigen::VectorXd>(by.data(), by.size()));
  }
};

/// Everything the backward pass needs from one forward evaluation: layer
/// activations, head intermediates, the raw knot list, and how
/// canonicalization and the decreasing clamp rearranged it.
struct ForwardTrace {
  Eigen::VectorXd input;
  std::vector<Eigen::VectorXd> pre, act;
  Eigen::VectorXd ax, sx;              // logistic inputs and outputs
  std::vector<double> raw_x, raw_y;    // m points before cleanup
  double lo = 0, hi = 0;
  std::vector<int> kept;               // canonical knot -> raw point index
  Epf canon;
  DecreasingTrace dec;                 // trained on dec.dp
};

/// m-knot frontier model with a frozen target copy. Prediction is valid for
/// any parameter values: the head construction alone keeps the domain
/// inside [lo, hi].
class EpfModel {
 public:
  EpfModel(int m, int depth, int width, int feature_dim, std::uint64_t seed);

  int m() const { return m_; }
  int depth() const { return depth_; }
  int width() const { return width_; }
  int feature_dim() const { return fdim_; }

  Epf predict(const Eigen::VectorXd& features, double lo, double hi,
              bool use_target = false) const;
  ForwardTrace trace(const Eigen::VectorXd& features, double lo, double hi,
                     bool use_target = false) const;

  void sync_target() { target_ = online_; }

  NetParams& online() { return online_; }
  const NetParams& online() const { return online_; }
  NetParams& target() { return target_; }
  const NetParams& target() const { return target_; }

 private:
  int m_, depth_, width_, fdim_;
  NetParams online_, target_;
};

enum class LossKind { kKnotSq, kIntegralSq };

/// Loss between the online decreasing frontier f and the fixed target g,
/// with its gradient in f's knot coordinates. Kinks take the left-segment
/// subgradient; domains must agree within tolerance.
struct KnotGrad {
  double loss = 0;
  std::vector<double> dx, dy;
};
KnotGrad dp_loss_grad(const Epf& f, const Epf& g, LossKind kind);

/// Reverse pass for one state: loss gradient through the decreasing clamp,
/// canonicalization (dropped knots get zero), the head, and the layers.
/// Accumulates into grad and returns the state's loss.
double state_backward(const ForwardTrace& tr, const NetParams& params,
                      const Epf& target, LossKind kind, NetParams& grad);

/// Discrete decisions taken during a forward + loss evaluation: rectifier
/// masks, knot ordering and survival, clamp layout, and per-union-point
/// evaluation cells against the target. Finite-difference checks skip
/// parameters whose nudges flip any of this.
std::vector<int> structure_signature(const ForwardTrace& tr,
                                     const Epf& target);

/// Adaptive-moment optimizer state over the flattened parameters, with the
/// maximum-of-past-second-moments correction.
struct AdamState {
  Eigen::VectorXd m, v, vmax;
  long long step = 0;

  explicit AdamState(int n)
      : m(Eigen::VectorXd::Zero(n)),
        v(Eigen::VectorXd::Zero(n)),
        vmax(Eigen::VectorXd::Zero(n)) {}
};
void adam_update(NetParams& p, const NetParams& grad, AdamState& st,
                 double lr);

}  // namespace sefce
