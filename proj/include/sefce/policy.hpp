#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "sefce/bounds.hpp"
#include "sefce/game.hpp"
#include "sefce/net.hpp"

namespace sefce {

/// One-step plan at a single state: an action distribution (at most two
/// actions at decision states, the chance distribution at chance states)
/// plus the follower payoff promised to each recommended child.
struct LocalPlan {
  std::vector<double> probs;
  std::vector<double> child_promise;  // meaningful where probs > 0
  double value1 = 0;                  // predicted leader value of the plan
  double promise = 0;                 // promise actually served (>= request)
  bool wipeout = false;               // threshold wiped out every child
};

/// Policy induced by a frontier predictor through one-step lookahead:
/// children's predicted frontiers are combined by the backup rule and the
/// incoming promise is served by decomposing the result. Promises clamp
/// into predicted domains — the head construction caps domains at the
/// window top, so unfulfillable promises cannot be issued — and a promise
/// below the attainable peak is raised to it, which helps both players and
/// cannot break a threshold.
class LookaheadPolicy {
 public:
  /// Supplies the frontier of a non-leaf state given its payoff window.
  using Predictor =
      std::function<Epf(const GameState&, double lo, double hi)>;

  LookaheadPolicy(const GameTree& g, BoundsOracle& b, Predictor pred)
      : g_(&g), b_(&b), pred_(std::move(pred)) {}

  static LookaheadPolicy from_model(const GameTree& g, BoundsOracle& b,
                                    const EpfModel& model);

  LocalPlan local(const GameState& s, double mu) const;

  const GameTree& game() const { return *g_; }
  BoundsOracle& bounds() const { return *b_; }

 private:
  Epf child_frontier(const GameState& c) const;

  const GameTree* g_;
  BoundsOracle* b_;
  Predictor pred_;
};

/// Materializes the reached part of the policy over an enumerated game and
/// fills every unreached state with the exact punishment continuation, so
/// the result can face the incentive audit. mu_root defaults to the peak of
/// the root's one-step backup.
StrategyProfile materialize(const LookaheadPolicy& pol,
                            const EnumeratedGame& e,
                            const ExactTableBounds& grim,
                            std::optional<double> mu_root = std::nullopt);

/// Expected payoffs of the policy by walking its reached tree; usable on
/// lazy games that are never enumerated. Returns (leader, follower).
std::pair<double, double> rollout_value(
    const LookaheadPolicy& pol,
    std::optional<double> mu_root = std::nullopt);

}  // namespace sefce
