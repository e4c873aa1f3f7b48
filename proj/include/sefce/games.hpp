#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>

#include "sefce/game.hpp"

namespace sefce {

/// Follower chooses between a leader subgame with leaves (10,-1) / (-1,1)
/// and an outside option worth (k1, k2). Node ids: 0 root, 1 the leader
/// state, 2 the outside leaf, 3 and 4 the leader's leaves.
ExplicitGame build_fig1(double k1, double k2);

/// The costly-promise game: staying leads to a leader state with leaf
/// (10,-1) or a further leader state offering (k1,k2) vs (-1, 1-eps);
/// exiting ends at (-10, 0). Requires eps > 0.
ExplicitGame build_promise_game(double k1, double k2, double eps);

/// Both follower choices lead to leader states: stay offers (10,-1)/(-1,1),
/// exit offers (0,0)/(4,0.5). Separates commitment payoffs from
/// subgame-perfect play.
ExplicitGame build_fig6();

/// Repeated threat game. Each stage the follower either accedes, paying
/// q2[j] to gift q1[j] to the leader, or refuses, after which the leader
/// either keeps the peace (0,0) or throws a tantrum (-1,-1). Payoffs
/// accumulate over n stages; leaves carry totals. The featurized variant
/// exposes the q vectors and accumulated payoffs as features.
class TantrumGame : public GameTree {
 public:
  TantrumGame(int n, Eigen::VectorXd q1, Eigen::VectorXd q2,
              bool featurized = false);

  std::string name() const override;
  GameState root() const override { return TantrumState{}; }
  Owner owner(const GameState& s) const override;
  int num_actions(const GameState& s) const override;
  GameState child(const GameState& s, int action) const override;
  std::pair<double, double> leaf_payoff(const GameState& s) const override;
  std::string action_label(const GameState& s, int action) const override;
  int depth(const GameState& s) const override;
  int feature_dim() const override;
  Eigen::VectorXd features(const GameState& s) const override;

  int stages() const { return n_; }
  bool featurized() const { return featurized_; }
  const Eigen::VectorXd& q1() const { return q1_; }
  const Eigen::VectorXd& q2() const { return q2_; }

 private:
  int n_;
  Eigen::VectorXd q1_, q2_;
  bool featurized_;
};

/// Resource-collection grid game. Both players start at the center of a
/// J x J board and alternate moves (leader first) for n rounds, five actions
/// each: stay or step in a compass direction, steps off the board acting as
/// stay. A cell's resources are collected once, on first entry by either
/// player, and pooled: player i's payoff is the total of map i over all
/// visited cells. J must be odd so the center is a cell.
class RcGame : public GameTree {
 public:
  RcGame(int J, int n, Eigen::MatrixXd r1_map, Eigen::MatrixXd r2_map);

  std::string name() const override;
  GameState root() const override;
  Owner owner(const GameState& s) const override;
  int num_actions(const GameState& s) const override;
  GameState child(const GameState& s, int action) const override;
  std::pair<double, double> leaf_payoff(const GameState& s) const override;
  std::string action_label(const GameState& s, int action) const override;
  int depth(const GameState& s) const override;
  int feature_dim() const override;
  Eigen::VectorXd features(const GameState& s) const override;

  int side() const { return J_; }
  int rounds() const { return n_; }
  const Eigen::MatrixXd& r1_map() const { return r1_; }
  const Eigen::MatrixXd& r2_map() const { return r2_; }

 private:
  int J_, n_;
  Eigen::MatrixXd r1_, r2_;
};

/// Two independent J x J resource maps: each is the elementwise exponential
/// of a Gaussian-process draw over grid coordinates with a squared
/// exponential kernel. sigma -> 0 degenerates to all-ones maps.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> sample_gp_maps(
    int J, double length_scale, double sigma, std::uint64_t seed);

/// Stage cost/gift vectors for the featurized tantrum game: i.i.d.
/// unit-exponential draws plus shift. shift >= 1 keeps refusal credible.
std::pair<Eigen::VectorXd, Eigen::VectorXd> sample_featurized_q(
    int n, double shift, std::uint64_t seed);

}  // namespace sefce
