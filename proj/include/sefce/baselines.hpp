#pragma once

#include <vector>

#include "sefce/game.hpp"
#include "sefce/games.hpp"

namespace sefce {

/// Subgame-perfect play without commitment: every mover maximizes their own
/// payoff, ties preferring the other player's payoff, then the lower action
/// index. The gap to the committed optimum is what commitment buys.
struct SpNash {
  StrategyProfile profile;
  double value1 = 0;
  double value2 = 0;
};
SpNash sp_nash(const EnumeratedGame& e);

/// Non-strategic grid leader: plans the move sequence maximizing its own
/// collection as if alone on the board, commits to it open loop, and lets
/// the follower best-respond to the announced path. Exhaustive over both
/// move spaces, so horizons must stay small.
struct RcBaseline {
  double r1 = 0;
  double r2 = 0;
  std::vector<int> leader_moves;
};
RcBaseline non_strategic_rc(const RcGame& g);

/// Greedy threat-budget plan for the tantrum family: walk the stages in
/// order and ask for a stage's payment only while the stages left can cover
/// the payment plus everything already promised; refusals keep the peace.
/// Returns the plan's payoffs assuming compliance.
struct TantrumGreedy {
  double r1 = 0;
  double r2 = 0;
  std::vector<char> accede;
};
TantrumGreedy greedy_tantrum(const TantrumGame& g);

}  // namespace sefce
