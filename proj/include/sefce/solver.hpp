#pragma once

#include <optional>
#include <vector>

#include "sefce/bounds.hpp"
#include "sefce/epf.hpp"
#include "sefce/game.hpp"

namespace sefce {

/// Everything the backward pass and extraction produce for one game: the
/// per-state follower payoff windows, the enforceable frontier of each
/// state, and a commitment plan achieving the root optimum.
struct SolveResult {
  std::vector<double> lo, hi;
  std::vector<Epf> epfs;
  StrategyProfile profile;
  double opt1 = 0;  // leader payoff of the extracted plan
  double opt2 = 0;  // follower payoff promised at the root
};

/// Backward induction over enforceable frontiers. Leaves are single points
/// (r2, r1). Leader states take the concave envelope of their children.
/// Follower states first truncate each child below the payoff the follower
/// could force by deviating elsewhere (punished by the grim values in b),
/// then take the envelope of what survives. Chance states combine children
/// by probability-weighted sup-convolution. Children with empty truncations
/// drop out; the child with the largest grim value always survives.
std::vector<Epf> solve_epfs(const EnumeratedGame& e, const ExactTableBounds& b);

/// Walks the frontiers top-down, splitting each promise into child promises:
/// envelope points decompose into at most two children, convolution points
/// split across all children. States the walk never enters get punishment
/// play: the leader picks the child minimizing the follower's grim value,
/// the follower picks the child maximizing it, and the recorded promise is
/// the grim value itself.
StrategyProfile extract_strategy(const EnumeratedGame& e,
                                 const ExactTableBounds& b,
                                 const std::vector<Epf>& epfs, double mu_root);

/// Full pipeline. mu_root defaults to the smallest maximizer of the root
/// frontier, the follower payoff of a leader-optimal plan.
SolveResult solve(const EnumeratedGame& e,
                  std::optional<double> mu_root = std::nullopt);

/// Deviation values tau at a follower state, one per child: the best grim
/// value among the other children, -inf when there is no other child.
std::vector<double> deviation_values(const EnumeratedGame& e,
                                     const std::vector<double>& lo, int s);

}  // namespace sefce
