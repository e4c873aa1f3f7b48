#include "sefce/baselines.hpp"

#include <algorithm>
#include <limits>

#include "sefce/epf.hpp"

namespace sefce {

SpNash sp_nash(const EnumeratedGame& e) {
  int n = e.num_states();
  SpNash out;
  out.profile.probs.resize(n);
  out.profile.promise.assign(n, 0.0);
  out.profile.reached.assign(n, 1);
  std::vector<double> v1(n, 0.0), v2(n, 0.0);
  for (int s = n - 1; s >= 0; --s) {  // children have larger ids
    const auto& kids = e.children[s];
    switch (e.owners[s]) {
      case Owner::kLeaf:
        v1[s] = e.r1[s];
        v2[s] = e.r2[s];
        break;
      case Owner::kChance: {
        out.profile.probs[s] = e.probs[s];
        double a = 0, b = 0;
        for (size_t i = 0; i < kids.size(); ++i) {
          a += e.probs[s][i] * v1[kids[i]];
          b += e.probs[s][i] * v2[kids[i]];
        }
        v1[s] = a;
        v2[s] = b;
        break;
      }
      default: {
        bool leader = e.owners[s] == Owner::kLeader;
        int best = 0;
        for (size_t i = 1; i < kids.size(); ++i) {
          double own = leader ? v1[kids[i]] - v1[kids[best]]
                              : v2[kids[i]] - v2[kids[best]];
          double other = leader ? v2[kids[i]] - v2[kids[best]]
                                : v1[kids[i]] - v1[kids[best]];
          if (own > kTol || (own > -kTol && other > kTol)) {
            best = static_cast<int>(i);
          }
        }
        out.profile.probs[s].assign(kids.size(), 0.0);
        out.profile.probs[s][best] = 1.0;
        v1[s] = v1[kids[best]];
        v2[s] = v2[kids[best]];
        break;
      }
    }
    out.profile.promise[s] = v2[s];
  }
  out.value1 = v1[0];
  out.value2 = v2[0];
  return out;
}

namespace {

// Best leader-only collection: follower pinned to stay, leader explored
// exhaustively. Fills `moves` with the maximizing sequence, lowest indices
// on ties. Returns the leader total.
double plan_leader_path(const RcGame& g, const GameState& s,
                        std::vector<int>& moves) {
  if (g.owner(s) == Owner::kLeaf) return g.leaf_payoff(s).first;
  if (g.owner(s) == Owner::kFollower) {
    return plan_leader_path(g, g.child(s, 0), moves);
  }
  double best = -std::numeric_limits<double>::infinity();
  std::vector<int> best_tail;
  for (int a = 0; a < g.num_actions(s); ++a) {
    std::vector<int> tail;
    double v = plan_leader_path(g, g.child(s, a), tail);
    if (v > best) {
      best = v;
      best_tail = std::move(tail);
      best_tail.insert(best_tail.begin(), a);
    }
  }
  moves = std::move(best_tail);
  return best;
}

// Follower best response to the announced leader sequence; ties prefer the
// leader's payoff, then the lower move.
std::pair<double, double> follow_path(const RcGame& g, const GameState& s,
                                      const std::vector<int>& moves,
                                      int next) {
  if (g.owner(s) == Owner::kLeaf) return g.leaf_payoff(s);
  if (g.owner(s) == Owner::kLeader) {
    return follow_path(g, g.child(s, moves[next]), moves, next + 1);
  }
  std::pair<double, double> best{
      -std::numeric_limits<double>::infinity(),
      -std::numeric_limits<double>::infinity()};
  for (int a = 0; a < g.num_actions(s); ++a) {
    auto v = follow_path(g, g.child(s, a), moves, next);
    if (v.second > best.second + kTol ||
        (v.second > best.second - kTol && v.first > best.first + kTol)) {
      best = v;
    }
  }
  return best;
}

}  // namespace

RcBaseline non_strategic_rc(const RcGame& g) {
  RcBaseline out;
  plan_leader_path(g, g.root(), out.leader_moves);
  auto [r1, r2] = follow_path(g, g.root(), out.leader_moves, 0);
  out.r1 = r1;
  out.r2 = r2;
  return out;
}

TantrumGreedy greedy_tantrum(const TantrumGame& g) {
  TantrumGreedy out;
  int n = g.stages();
  out.accede.assign(n, 0);
  double debt = 0;
  for (int j = 0; j < n; ++j) {
    double remaining = n - 1 - j;
    if (remaining >= g.q2()[j] + debt) {
      out.accede[j] = 1;
      out.r1 += g.q1()[j];
      out.r2 -= g.q2()[j];
      debt += g.q2()[j];
    }
  }
  return out;
}

}  // namespace sefce
