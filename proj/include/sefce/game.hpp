#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "sefce/errors.hpp"

namespace sefce {

enum class Owner { kLeader, kFollower, kChance, kLeaf };

/// State handles are small values the owning game knows how to interpret;
/// trees are never materialized unless enumerated.
struct ExplicitState {
  std::int32_t node = 0;
};

struct TantrumState {
  std::int16_t stage = 0;
  bool leader_phase = false;  // set after a refusal, before the response
  std::int16_t acceded = 0;
  std::int16_t refused_ok = 0;
  std::int16_t tantrums = 0;
  double acc1 = 0;  // payoffs accumulated from the root
  double acc2 = 0;
};

struct RcState {
  std::int16_t ply = 0;  // leader moves on even plies
  std::int8_t row1 = 0, col1 = 0, row2 = 0, col2 = 0;
  std::array<std::uint64_t, 2> visited{};
  double got1 = 0;  // pooled resource totals over visited cells
  double got2 = 0;
};

using GameState = std::variant<ExplicitState, TantrumState, RcState>;

/// Two-player perfect-information game tree with optional chance states.
/// Player 1 (the leader) commits to a strategy plus recommendations; player 2
/// (the follower) observes the commitment. Implementations expose children
/// on demand so deep games stay lazy.
class GameTree {
 public:
  virtual ~GameTree() = default;

  virtual std::string name() const = 0;
  virtual GameState root() const = 0;
  virtual Owner owner(const GameState& s) const = 0;
  virtual int num_actions(const GameState& s) const = 0;
  virtual GameState child(const GameState& s, int action) const = 0;
  virtual double chance_prob(const GameState& s, int action) const;
  virtual std::pair<double, double> leaf_payoff(const GameState& s) const = 0;
  virtual std::string action_label(const GameState& s, int action) const;
  virtual int depth(const GameState& s) const = 0;  // edges from the root

  virtual int feature_dim() const = 0;
  virtual Eigen::VectorXd features(const GameState& s) const = 0;

  /// Walks a path of action indices from the root.
  GameState state_at(std::span<const int> path) const;
};

/// Byte encoding of a state, usable as a hash map key. States that encode
/// equally root identical subtrees, so value caches keyed on this are sound
/// even when distinct histories share an encoding.
std::string state_key(const GameState& s);

struct ExplicitNode {
  Owner owner = Owner::kLeaf;
  std::vector<int> children;
  std::vector<double> probs;          // chance states only
  std::vector<std::string> labels;    // optional action names
  double r1 = 0, r2 = 0;              // leaves only
  std::vector<double> features;       // optional; default is a one-hot id
};

/// Fully materialized tree; node 0 is the root. Construction validates the
/// tree property (every non-root has exactly one parent) and chance
/// distributions.
class ExplicitGame : public GameTree {
 public:
  ExplicitGame(std::string name, std::vector<ExplicitNode> nodes);

  std::string name() const override { return name_; }
  GameState root() const override { return ExplicitState{0}; }
  Owner owner(const GameState& s) const override;
  int num_actions(const GameState& s) const override;
  GameState child(const GameState& s, int action) const override;
  double chance_prob(const GameState& s, int action) const override;
  std::pair<double, double> leaf_payoff(const GameState& s) const override;
  std::string action_label(const GameState& s, int action) const override;
  int depth(const GameState& s) const override;
  int feature_dim() const override;
  Eigen::VectorXd features(const GameState& s) const override;

  const std::vector<ExplicitNode>& nodes() const { return nodes_; }

 private:
  const ExplicitNode& at(const GameState& s) const;

  std::string name_;
  std::vector<ExplicitNode> nodes_;
  std::vector<int> depth_;
  int feature_dim_ = 0;
};

/// Index-form snapshot of a game produced by a budgeted walk. Ids are
/// assigned in preorder, so every child id exceeds its parent's and a
/// descending-id sweep visits children before parents.
struct EnumeratedGame {
  const GameTree* game = nullptr;
  std::vector<GameState> states;
  std::vector<Owner> owners;
  std::vector<std::vector<int>> children;
  std::vector<std::vector<double>> probs;  // chance states
  std::vector<int> parent;                 // -1 at the root
  std::vector<int> parent_action;
  std::vector<double> r1, r2;  // leaves
  std::vector<int> depth;
  std::vector<int> leaves_below;

  int num_states() const { return static_cast<int>(states.size()); }
  bool is_leaf(int s) const { return owners[s] == Owner::kLeaf; }
  int num_decision_states() const;
  int max_depth() const;
};

/// Walks the whole tree, throwing too_large beyond max_states.
EnumeratedGame enumerate_game(const GameTree& g, int max_states = 2'000'000);

/// Leader commitment with recommendations: per enumerated state, an action
/// distribution plus the follower payoff promised on entry. States never
/// reached by extraction carry the punishment continuation.
struct StrategyProfile {
  std::vector<std::vector<double>> probs;
  std::vector<double> promise;
  std::vector<char> reached;
};

}  // namespace sefce
