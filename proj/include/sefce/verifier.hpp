#pragma once

#include <utility>
#include <vector>

#include "sefce/bounds.hpp"
#include "sefce/game.hpp"

namespace sefce {

/// One incentive constraint: at follower state `state`, recommending
/// `action` promises the follower `continuation`; deviating is worth at
/// most `threshold` under the committed punishment.
struct ConstraintRecord {
  int state = 0;
  int action = 0;
  double continuation = 0;
  double threshold = 0;
  double slack = 0;  // continuation - threshold
};

/// Outcome of a full strategy audit. The plan is compliant when every
/// supported recommendation has slack >= -1e-6, the tolerance under which
/// exactly binding constraints still certify. promise_gap is diagnostic:
/// how far recorded promises drift from realized continuation values.
struct AuditReport {
  std::vector<ConstraintRecord> constraints;
  bool compliant = true;
  double min_slack = 0;
  double r1 = 0, r2 = 0;
  double promise_gap = 0;
};

/// Payoff expectations under a total profile, one (leader, follower) pair
/// per state, by one bottom-up sweep including chance probabilities.
std::pair<std::vector<double>, std::vector<double>> payoff_table(
    const EnumeratedGame& e, const StrategyProfile& p);

/// Expectation at one state (the root by default).
std::pair<double, double> expected_payoffs(const EnumeratedGame& e,
                                           const StrategyProfile& p,
                                           int s = 0);

/// Follower best response against the leader and chance behavior fixed by
/// leader_part. Ties break toward the higher leader payoff, then the lower
/// action index. Returns leader_part with follower rows overwritten, plus
/// the root values it achieves.
struct BestResponse {
  StrategyProfile profile;
  double value1 = 0;
  double value2 = 0;
};
BestResponse best_response(const EnumeratedGame& e,
                           const StrategyProfile& leader_part);

/// Checks every supported recommendation at every follower state against
/// the deviation values implied by the punishment table b.
AuditReport audit_ic(const EnumeratedGame& e, const StrategyProfile& p,
                     const ExactTableBounds& b);

/// Certifies |r1 - reference| <= 2 * eps * depth. Non-positive residual
/// means the certificate holds.
struct BoundCheck {
  double r1 = 0;
  double reference = 0;
  double eps = 0;
  int depth = 0;
  double bound = 0;
  double residual = 0;
  bool ok = false;
};
BoundCheck check_bound(const EnumeratedGame& e, double reference,
                       const StrategyProfile& fa_profile,
                       double eps_measured);

/// Pure punishment commitment: the leader always minimizes the follower's
/// continuation. Follower rows are uniform placeholders for best_response
/// to overwrite.
StrategyProfile grim_leader_profile(const EnumeratedGame& e,
                                    const ExactTableBounds& b);

/// The opposite commitment: the leader always maximizes the follower's
/// continuation.
StrategyProfile altruistic_leader_profile(const EnumeratedGame& e,
                                          const ExactTableBounds& b);

/// Brute-force reference solver, independent of the frontier machinery:
/// dynamic programming over a shared lattice of promised follower values
/// (`grid` uniform points plus every leaf follower payoff), enforcing the
/// incentive constraints with exactly computed punishment values. Exact on
/// chance-free games because every frontier knot lies on the lattice;
/// chance states fold with one interpolation per level. Throws too_large
/// beyond 1000 decision states or 4096 states.
struct OracleSolution {
  double opt2 = 0;
  double opt1 = 0;
};
OracleSolution oracle_solve(const GameTree& g, int grid);
OracleSolution oracle_solve(const EnumeratedGame& e, int grid);

}  // namespace sefce
