#include "sefce/bounds.hpp"

#include <algorithm>
#include <limits>

#include "sefce/epf.hpp"
#include "sefce/games.hpp"

namespace sefce {

std::vector<double> BoundsOracle::taus(const GameTree& g, const GameState& s) {
  if (g.owner(s) != Owner::kFollower) {
    throw bad_parameter("deviation values only exist at follower states");
  }
  int k = g.num_actions(s);
  std::vector<double> lo(k);
  for (int a = 0; a < k; ++a) lo[a] = bounds(g, g.child(s, a)).first;
  std::vector<double> tau(k, kNegInf);
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      if (b != a) tau[a] = std::max(tau[a], lo[b]);
    }
  }
  return tau;
}

ExactTableBounds::ExactTableBounds(const EnumeratedGame& e) : e_(&e) {
  int n = e.num_states();
  lo_.assign(n, 0.0);
  hi_.assign(n, 0.0);
  for (int s = n - 1; s >= 0; --s) {  // children have larger ids
    switch (e.owners[s]) {
      case Owner::kLeaf:
        lo_[s] = hi_[s] = e.r2[s];
        break;
      case Owner::kLeader: {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (int c : e.children[s]) {
          lo = std::min(lo, lo_[c]);
          hi = std::max(hi, hi_[c]);
        }
        lo_[s] = lo;
        hi_[s] = hi;
        break;
      }
      case Owner::kFollower: {
        double lo = -std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (int c : e.children[s]) {
          lo = std::max(lo, lo_[c]);
          hi = std::max(hi, hi_[c]);
        }
        lo_[s] = lo;
        hi_[s] = hi;
        break;
      }
      case Owner::kChance: {
        double lo = 0, hi = 0;
        for (size_t i = 0; i < e.children[s].size(); ++i) {
          lo += e.probs[s][i] * lo_[e.children[s][i]];
          hi += e.probs[s][i] * hi_[e.children[s][i]];
        }
        lo_[s] = lo;
        hi_[s] = hi;
        break;
      }
    }
  }
  for (int s = 0; s < n; ++s) index_.emplace(state_key(e.states[s]), s);
}

std::pair<double, double> ExactTableBounds::bounds(const GameTree&,
                                                   const GameState& s) {
  auto it = index_.find(state_key(s));
  if (it == index_.end()) {
    throw bad_parameter("state is not part of the enumerated game");
  }
  return {lo_[it->second], hi_[it->second]};
}

std::pair<double, double> TantrumBoundsOracle::bounds(const GameTree& g,
                                                      const GameState& s) {
  const auto* tg = dynamic_cast<const TantrumGame*>(&g);
  const auto* ts = std::get_if<TantrumState>(&s);
  if (tg == nullptr || ts == nullptr) {
    throw bad_parameter("tantrum bounds queried on a different game");
  }
  int n = tg->stages();
  double hi = ts->acc2;
  if (ts->stage >= n) return {hi, hi};
  double lo = ts->leader_phase ? ts->acc2 - 1 - (n - ts->stage - 1)
                               : ts->acc2 - (n - ts->stage);
  return {lo, hi};
}

namespace {

// Follower total at the leaf reached by always taking the move with the
// largest immediate follower gain, the leader included (ties keep the
// lowest action index, so deadlocks resolve to stay).
double greedy_tail(const GameTree& g, GameState s) {
  while (g.owner(s) != Owner::kLeaf) {
    int k = g.num_actions(s);
    int best = 0;
    double best_gain = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < k; ++a) {
      GameState c = g.child(s, a);
      double gain = std::get<RcState>(c).got2 - std::get<RcState>(s).got2;
      if (gain > best_gain) {
        best_gain = gain;
        best = a;
      }
    }
    s = g.child(s, best);
  }
  return g.leaf_payoff(s).second;
}

}  // namespace

double RcApproxBounds::stay_put_value(const GameTree& g, const GameState& s) {
  if (g.owner(s) == Owner::kLeaf) return g.leaf_payoff(s).second;
  if (g.owner(s) == Owner::kLeader) {
    return stay_put_value(g, g.child(s, 0));
  }
  double best = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < g.num_actions(s); ++a) {
    best = std::max(best, stay_put_value(g, g.child(s, a)));
  }
  return best;
}

double RcApproxBounds::joint_value(const GameTree& g, const GameState& s) {
  if (g.owner(s) == Owner::kLeaf) return g.leaf_payoff(s).second;
  if (std::get<RcState>(s).ply >= exact_plies_) return greedy_tail(g, s);
  double best = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < g.num_actions(s); ++a) {
    best = std::max(best, joint_value(g, g.child(s, a)));
  }
  return best;
}

std::pair<double, double> RcApproxBounds::bounds(const GameTree& g,
                                                 const GameState& s) {
  if (std::get_if<RcState>(&s) == nullptr) {
    throw bad_parameter("grid bounds queried on a different game");
  }
  std::string key = state_key(s);
  auto it = memo_.find(key);
  if (it != memo_.end()) return it->second;
  double lo = stay_put_value(g, s);
  double hi = std::max(joint_value(g, s), lo);
  auto out = std::make_pair(lo, hi);
  memo_.emplace(std::move(key), out);
  return out;
}

}  // namespace sefce
