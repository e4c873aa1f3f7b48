#pragma once

#include <memory>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sefce/game.hpp"

namespace sefce {

/// Per-state follower payoff window. bounds(s) returns (lo, hi) where lo is
/// an enforceable punishment value (what the follower earns by deviating
/// into s, given the punishment strategy the oracle models) and hi caps the
/// follower payoff attainable from s. The enforceable frontier at s lives on
/// the interval [lo, hi].
///
/// Exact oracles make lo the grim value (the leader minimizes the follower's
/// best-response payoff) and hi the altruistic value (both players maximize
/// it). Approximate oracles may use any implementable punishment for lo and
/// any reachable value for hi; plans promising at least tau stay incentive
/// compatible because the modeled punishment is available to the leader.
class BoundsOracle {
 public:
  virtual ~BoundsOracle() = default;

  virtual std::pair<double, double> bounds(const GameTree& g,
                                           const GameState& s) = 0;

  /// Deviation values at a follower state: taus(s)[i] is the best payoff
  /// the follower can force by picking some action other than i, given
  /// punishment afterwards. Single-action states get -inf.
  virtual std::vector<double> taus(const GameTree& g, const GameState& s);
};

/// Exact grim and altruistic values for every state of an enumerated game,
/// computed bottom-up in one pass. Also answers by state id for solver use.
class ExactTableBounds : public BoundsOracle {
 public:
  explicit ExactTableBounds(const EnumeratedGame& e);

  std::pair<double, double> bounds(const GameTree& g,
                                   const GameState& s) override;

  double lo_at(int id) const { return lo_[id]; }
  double hi_at(int id) const { return hi_[id]; }
  const std::vector<double>& lo() const { return lo_; }
  const std::vector<double>& hi() const { return hi_; }

 private:
  const EnumeratedGame* e_;
  std::vector<double> lo_, hi_;
  std::unordered_map<std::string, int> index_;
};

/// Closed-form windows for the tantrum game. The cheapest punishment for a
/// refusal costs the follower one per remaining stage, so the grim value at
/// a follower state is acc2 - (n - stage); inside a refusal it is
/// acc2 - 1 - (n - stage - 1). Peace forever gives the altruistic value
/// acc2. Constant time per query at any horizon.
class TantrumBoundsOracle : public BoundsOracle {
 public:
  std::pair<double, double> bounds(const GameTree& g,
                                   const GameState& s) override;
};

/// Heuristic windows for the resource grid. lo is the follower's best
/// response against a leader who never moves again, found by exhaustive
/// search over the follower's remaining moves (the punishment is
/// implementable, so promises above it are enforceable). hi joint-maximizes
/// the follower total: exhaustive until the given absolute ply, then a
/// greedy completion that always takes the largest adjacent follower gain.
/// hi is clamped to at least lo. Results are memoized per state.
class RcApproxBounds : public BoundsOracle {
 public:
  explicit RcApproxBounds(int exact_plies = 4) : exact_plies_(exact_plies) {}

  std::pair<double, double> bounds(const GameTree& g,
                                   const GameState& s) override;

 private:
  double stay_put_value(const GameTree& g, const GameState& s);
  double joint_value(const GameTree& g, const GameState& s);

  int exact_plies_;
  std::unordered_map<std::string, std::pair<double, double>> memo_;
};

}  // namespace sefce
