#include "sefce/games.hpp"

#include <cmath>

#include "sefce/rng.hpp"

namespace sefce {

namespace {

ExplicitNode decision(Owner o, std::vector<int> children,
                      std::vector<std::string> labels = {}) {
  ExplicitNode n;
  n.owner = o;
  n.children = std::move(children);
  n.labels = std::move(labels);
  return n;
}

ExplicitNode leaf(double r1, double r2) {
  ExplicitNode n;
  n.r1 = r1;
  n.r2 = r2;
  return n;
}

}  // namespace

ExplicitGame build_fig1(double k1, double k2) {
  std::vector<ExplicitNode> nodes(5);
  nodes[0] = decision(Owner::kFollower, {1, 2}, {"stay", "exit"});
  nodes[1] = decision(Owner::kLeader, {3, 4});
  nodes[2] = leaf(k1, k2);
  nodes[3] = leaf(10, -1);
  nodes[4] = leaf(-1, 1);
  return ExplicitGame("fig1", std::move(nodes));
}

ExplicitGame build_promise_game(double k1, double k2, double eps) {
  if (!(eps > 0)) throw bad_parameter("eps must be positive");
  std::vector<ExplicitNode> nodes(7);
  nodes[0] = decision(Owner::kFollower, {1, 2}, {"stay", "exit"});
  nodes[1] = decision(Owner::kLeader, {3, 4});
  nodes[2] = leaf(-10, 0);
  nodes[3] = leaf(10, -1);
  nodes[4] = decision(Owner::kLeader, {5, 6});
  nodes[5] = leaf(k1, k2);
  nodes[6] = leaf(-1, 1 - eps);
  return ExplicitGame("promise", std::move(nodes));
}

ExplicitGame build_fig6() {
  std::vector<ExplicitNode> nodes(7);
  nodes[0] = decision(Owner::kFollower, {1, 2}, {"stay", "exit"});
  nodes[1] = decision(Owner::kLeader, {3, 4});
  nodes[2] = decision(Owner::kLeader, {5, 6});
  nodes[3] = leaf(10, -1);
  nodes[4] = leaf(-1, 1);
  nodes[5] = leaf(0, 0);
  nodes[6] = leaf(4, 0.5);
  return ExplicitGame("fig6", std::move(nodes));
}

TantrumGame::TantrumGame(int n, Eigen::VectorXd q1, Eigen::VectorXd q2,
                         bool featurized)
    : n_(n), q1_(std::move(q1)), q2_(std::move(q2)), featurized_(featurized) {
  if (n_ < 1) throw bad_parameter("tantrum needs at least one stage");
  if (q1_.size() != n_ || q2_.size() != n_) {
    throw bad_parameter("q vectors must have one entry per stage");
  }
  for (int j = 0; j < n_; ++j) {
    if (!(q1_[j] > 0)) throw bad_parameter("gift values must be positive");
    if (!(q2_[j] >= 1)) {
      throw bad_parameter("acceding must cost at least the tantrum");
    }
  }
}

std::string TantrumGame::name() const {
  return featurized_ ? "tantrum-featurized" : "tantrum";
}

Owner TantrumGame::owner(const GameState& gs) const {
  const auto& s = std::get<TantrumState>(gs);
  if (s.stage >= n_) return Owner::kLeaf;
  return s.leader_phase ? Owner::kLeader : Owner::kFollower;
}

int TantrumGame::num_actions(const GameState& gs) const {
  return owner(gs) == Owner::kLeaf ? 0 : 2;
}

GameState TantrumGame::child(const GameState& gs, int action) const {
  TantrumState s = std::get<TantrumState>(gs);
  if (s.stage >= n_) throw bad_parameter("leaf has no children");
  if (!s.leader_phase) {
    if (action == 0) {  // accede
      s.acc1 += q1_[s.stage];
      s.acc2 -= q2_[s.stage];
      s.acceded += 1;
      s.stage += 1;
    } else {  // refuse
      s.leader_phase = true;
    }
  } else {
    if (action == 0) {  // keep the peace
      s.refused_ok += 1;
    } else {  // tantrum
      s.acc1 -= 1;
      s.acc2 -= 1;
      s.tantrums += 1;
    }
    s.leader_phase = false;
    s.stage += 1;
  }
  return s;
}

std::pair<double, double> TantrumGame::leaf_payoff(const GameState& gs) const {
  const auto& s = std::get<TantrumState>(gs);
  return {s.acc1, s.acc2};
}

std::string TantrumGame::action_label(const GameState& gs, int action) const {
  const auto& s = std::get<TantrumState>(gs);
  if (!s.leader_phase) return action == 0 ? "accede" : "refuse";
  return action == 0 ? "peace" : "tantrum";
}

int TantrumGame::depth(const GameState& gs) const {
  const auto& s = std::get<TantrumState>(gs);
  // Acceded stages took one edge, refused stages two.
  int d = s.acceded + 2 * (s.refused_ok + s.tantrums);
  return d + (s.leader_phase ? 1 : 0);
}

int TantrumGame::feature_dim() const {
  return featurized_ ? 5 + 2 * n_ + 2 : 5;
}

Eigen::VectorXd TantrumGame::features(const GameState& gs) const {
  const auto& s = std::get<TantrumState>(gs);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(feature_dim());
  f[0] = s.acceded;
  f[1] = s.refused_ok;
  f[2] = s.tantrums;
  f[3] = s.leader_phase ? 0.0 : 1.0;
  f[4] = s.leader_phase ? 1.0 : 0.0;
  if (featurized_) {
    f.segment(5, n_) = q1_;
    f.segment(5 + n_, n_) = q2_;
    f[5 + 2 * n_] = s.acc1;
    f[5 + 2 * n_ + 1] = s.acc2;
  }
  return f;
}

RcGame::RcGame(int J, int n, Eigen::MatrixXd r1_map, Eigen::MatrixXd r2_map)
    : J_(J), n_(n), r1_(std::move(r1_map)), r2_(std::move(r2_map)) {
  if (J_ < 1 || J_ % 2 == 0) throw bad_parameter("grid side must be odd");
  if (J_ > 11) throw bad_parameter("grid side above 11 is unsupported");
  if (n_ < 1) throw bad_parameter("need at least one round");
  if (r1_.rows() != J_ || r1_.cols() != J_ || r2_.rows() != J_ ||
      r2_.cols() != J_) {
    throw bad_parameter("resource maps must be J x J");
  }
}

std::string RcGame::name() const { return "rc"; }

namespace {

int cell_of(int row, int col, int J) { return row * J + col; }

bool visited_bit(const RcState& s, int cell) {
  return (s.visited[cell >> 6] >> (cell & 63)) & 1;
}

void set_visited(RcState& s, int cell) {
  s.visited[cell >> 6] |= std::uint64_t{1} << (cell & 63);
}

constexpr int kRowStep[5] = {0, -1, 1, 0, 0};
constexpr int kColStep[5] = {0, 0, 0, -1, 1};
constexpr const char* kMoveNames[5] = {"stay", "up", "down", "left", "right"};

}  // namespace

GameState RcGame::root() const {
  RcState s;
  s.row1 = s.col1 = s.row2 = s.col2 = static_cast<std::int8_t>(J_ / 2);
  int c = cell_of(J_ / 2, J_ / 2, J_);
  set_visited(s, c);
  s.got1 = r1_(J_ / 2, J_ / 2);
  s.got2 = r2_(J_ / 2, J_ / 2);
  return s;
}

Owner RcGame::owner(const GameState& gs) const {
  const auto& s = std::get<RcState>(gs);
  if (s.ply >= 2 * n_) return Owner::kLeaf;
  return s.ply % 2 == 0 ? Owner::kLeader : Owner::kFollower;
}

int RcGame::num_actions(const GameState& gs) const {
  return owner(gs) == Owner::kLeaf ? 0 : 5;
}

GameState RcGame::child(const GameState& gs, int action) const {
  RcState s = std::get<RcState>(gs);
  if (s.ply >= 2 * n_) throw bad_parameter("leaf has no children");
  bool leader = s.ply % 2 == 0;
  int row = leader ? s.row1 : s.row2;
  int col = leader ? s.col1 : s.col2;
  int nr = row + kRowStep[action];
  int nc = col + kColStep[action];
  if (nr < 0 || nr >= J_ || nc < 0 || nc >= J_) {
    nr = row;
    nc = col;
  }
  if (leader) {
    s.row1 = static_cast<std::int8_t>(nr);
    s.col1 = static_cast<std::int8_t>(nc);
  } else {
    s.row2 = static_cast<std::int8_t>(nr);
    s.col2 = static_cast<std::int8_t>(nc);
  }
  int c = cell_of(nr, nc, J_);
  if (!visited_bit(s, c)) {
    set_visited(s, c);
    s.got1 += r1_(nr, nc);
    s.got2 += r2_(nr, nc);
  }
  s.ply += 1;
  return s;
}

std::pair<double, double> RcGame::leaf_payoff(const GameState& gs) const {
  const auto& s = std::get<RcState>(gs);
  return {s.got1, s.got2};
}

std::string RcGame::action_label(const GameState&, int action) const {
  return kMoveNames[action];
}

int RcGame::depth(const GameState& gs) const {
  return std::get<RcState>(gs).ply;
}

int RcGame::feature_dim() const { return J_ * J_ + 9; }

Eigen::VectorXd RcGame::features(const GameState& gs) const {
  const auto& s = std::get<RcState>(gs);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(feature_dim());
  for (int c = 0; c < J_ * J_; ++c) {
    if (visited_bit(s, c)) f[c] = 1.0;
  }
  int base = J_ * J_;
  f[base + 0] = s.row1;
  f[base + 1] = s.col1;
  f[base + 2] = s.row2;
  f[base + 3] = s.col2;
  f[base + 4] = s.ply % 2 == 0 ? 1.0 : 0.0;
  f[base + 5] = s.ply % 2 == 0 ? 0.0 : 1.0;
  f[base + 6] = s.got1;
  f[base + 7] = s.got2;
  f[base + 8] = 2 * n_ - s.ply;
  return f;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> sample_gp_maps(
    int J, double length_scale, double sigma, std::uint64_t seed) {
  if (J < 1) throw bad_parameter("grid side must be positive");
  if (!(length_scale > 0)) throw bad_parameter("length scale must be positive");
  if (sigma < 0) throw bad_parameter("sigma must be non-negative");
  int m = J * J;
  Eigen::MatrixXd k(m, m);
  for (int a = 0; a < m; ++a) {
    double ra = a / J, ca = a % J;
    for (int b = 0; b < m; ++b) {
      double rb = b / J, cb = b % J;
      double d2 = (ra - rb) * (ra - rb) + (ca - cb) * (ca - cb);
      k(a, b) = sigma * sigma *
                std::exp(-d2 / (2.0 * length_scale * length_scale));
    }
  }
  k.diagonal().array() += 1e-12;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
  if (es.info() != Eigen::Success) {
    throw numerical_error("covariance factorization failed");
  }
  // Symmetric square root; clamp eigenvalue noise from the factorization.
  Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  Eigen::MatrixXd half = es.eigenvectors() * lam.asDiagonal();

  auto draw = [&](std::string_view stream) {
    rng r = derive_stream(seed, stream);
    Eigen::VectorXd z(m);
    for (int i = 0; i < m; ++i) z[i] = r.normal();
    Eigen::VectorXd g = half * z;
    Eigen::MatrixXd map(J, J);
    for (int i = 0; i < m; ++i) map(i / J, i % J) = std::exp(g[i]);
    return map;
  };
  return {draw("gp-map-1"), draw("gp-map-2")};
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> sample_featurized_q(
    int n, double shift, std::uint64_t seed) {
  if (n < 1) throw bad_parameter("need at least one stage");
  if (!(shift >= 1)) throw bad_parameter("shift must be at least 1");
  rng r = derive_stream(seed, "tantrum-q");
  Eigen::VectorXd q1(n), q2(n);
  for (int j = 0; j < n; ++j) q1[j] = shift + r.exponential();
  for (int j = 0; j < n; ++j) q2[j] = shift + r.exponential();
  return {q1, q2};
}

}  // namespace sefce
