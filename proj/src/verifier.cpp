#include "sefce/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sefce/epf.hpp"
#include "sefce/solver.hpp"

namespace sefce {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_rows(const EnumeratedGame& e, const StrategyProfile& p) {
  if (static_cast<int>(p.probs.size()) != e.num_states()) {
    throw shape_error("profile does not cover the game");
  }
  for (int s = 0; s < e.num_states(); ++s) {
    if (e.is_leaf(s)) continue;
    const auto& row = p.probs[s];
    if (row.size() != e.children[s].size()) {
      throw shape_error("profile row has the wrong arity");
    }
    double total = 0;
    for (double q : row) {
      if (q < -kTol) throw bad_distribution("negative action probability");
      total += q;
    }
    if (std::abs(total - 1.0) > 1e-6) {
      throw bad_distribution("action probabilities do not sum to one");
    }
  }
}

}  // namespace

std::pair<std::vector<double>, std::vector<double>> payoff_table(
    const EnumeratedGame& e, const StrategyProfile& p) {
  check_rows(e, p);
  int n = e.num_states();
  std::vector<double> v1(n, 0.0), v2(n, 0.0);
  for (int s = n - 1; s >= 0; --s) {  // children have larger ids
    if (e.is_leaf(s)) {
      v1[s] = e.r1[s];
      v2[s] = e.r2[s];
      continue;
    }
    const auto& row =
        e.owners[s] == Owner::kChance ? e.probs[s] : p.probs[s];
    double a = 0, b = 0;
    for (size_t i = 0; i < e.children[s].size(); ++i) {
      a += row[i] * v1[e.children[s][i]];
      b += row[i] * v2[e.children[s][i]];
    }
    v1[s] = a;
    v2[s] = b;
  }
  return {std::move(v1), std::move(v2)};
}

std::pair<double, double> expected_payoffs(const EnumeratedGame& e,
                                           const StrategyProfile& p, int s) {
  auto [v1, v2] = payoff_table(e, p);
  return {v1[s], v2[s]};
}

BestResponse best_response(const EnumeratedGame& e,
                           const StrategyProfile& leader_part) {
  check_rows(e, leader_part);
  int n = e.num_states();
  BestResponse out;
  out.profile = leader_part;
  std::vector<double> v1(n, 0.0), v2(n, 0.0);
  for (int s = n - 1; s >= 0; --s) {
    const auto& kids = e.children[s];
    switch (e.owners[s]) {
      case Owner::kLeaf:
        v1[s] = e.r1[s];
        v2[s] = e.r2[s];
        break;
      case Owner::kFollower: {
        int best = 0;
        for (size_t i = 1; i < kids.size(); ++i) {
          double d2 = v2[kids[i]] - v2[kids[best]];
          double d1 = v1[kids[i]] - v1[kids[best]];
          if (d2 > kTol || (d2 > -kTol && d1 > kTol)) {
            best = static_cast<int>(i);
          }
        }
        out.profile.probs[s].assign(kids.size(), 0.0);
        out.profile.probs[s][best] = 1.0;
        v1[s] = v1[kids[best]];
        v2[s] = v2[kids[best]];
        break;
      }
      default: {
        const auto& row = e.owners[s] == Owner::kChance
                              ? e.probs[s]
                              : leader_part.probs[s];
        double a = 0, b = 0;
        for (size_t i = 0; i < kids.size(); ++i) {
          a += row[i] * v1[kids[i]];
          b += row[i] * v2[kids[i]];
        }
        v1[s] = a;
        v2[s] = b;
        break;
      }
    }
  }
  out.value1 = v1[0];
  out.value2 = v2[0];
  return out;
}

AuditReport audit_ic(const EnumeratedGame& e, const StrategyProfile& p,
                     const ExactTableBounds& b) {
  auto [v1, v2] = payoff_table(e, p);
  AuditReport rep;
  rep.r1 = v1[0];
  rep.r2 = v2[0];
  rep.min_slack = kInf;
  for (int s = 0; s < e.num_states(); ++s) {
    if (p.reached[s]) {
      rep.promise_gap =
          std::max(rep.promise_gap, std::abs(p.promise[s] - v2[s]));
    }
    if (e.owners[s] != Owner::kFollower) continue;
    std::vector<double> tau = deviation_values(e, b.lo(), s);
    for (size_t a = 0; a < e.children[s].size(); ++a) {
      if (p.probs[s][a] <= 0) continue;
      ConstraintRecord c;
      c.state = s;
      c.action = static_cast<int>(a);
      c.continuation = v2[e.children[s][a]];
      c.threshold = tau[a];
      c.slack = c.continuation - c.threshold;
      rep.min_slack = std::min(rep.min_slack, c.slack);
      if (c.slack < -1e-6) rep.compliant = false;
      rep.constraints.push_back(c);
    }
  }
  if (rep.constraints.empty()) rep.min_slack = kInf;
  return rep;
}

BoundCheck check_bound(const EnumeratedGame& e, double reference,
                       const StrategyProfile& fa_profile,
                       double eps_measured) {
  BoundCheck c;
  c.r1 = payoff_table(e, fa_profile).first[0];
  c.reference = reference;
  c.eps = eps_measured;
  c.depth = e.max_depth();
  c.bound = 2.0 * eps_measured * c.depth;
  c.residual = std::abs(c.r1 - reference) - c.bound;
  c.ok = c.residual <= 0;
  return c;
}

namespace {

StrategyProfile leader_commitment(const EnumeratedGame& e,
                                  const ExactTableBounds& b, bool maximize) {
  int n = e.num_states();
  StrategyProfile p;
  p.probs.resize(n);
  p.promise.assign(n, 0.0);
  p.reached.assign(n, 1);
  for (int s = 0; s < n; ++s) {
    const auto& kids = e.children[s];
    switch (e.owners[s]) {
      case Owner::kLeaf:
        break;
      case Owner::kChance:
        p.probs[s] = e.probs[s];
        break;
      case Owner::kFollower:
        p.probs[s].assign(kids.size(), 1.0 / kids.size());
        break;
      case Owner::kLeader: {
        int best = 0;
        for (size_t i = 1; i < kids.size(); ++i) {
          double cur = maximize ? b.hi_at(kids[i]) : b.lo_at(kids[i]);
          double ref = maximize ? b.hi_at(kids[best]) : b.lo_at(kids[best]);
          if (maximize ? cur > ref : cur < ref) best = static_cast<int>(i);
        }
        p.probs[s].assign(kids.size(), 0.0);
        p.probs[s][best] = 1.0;
        break;
      }
    }
    p.promise[s] = maximize ? b.hi_at(s) : b.lo_at(s);
  }
  return p;
}

}  // namespace

StrategyProfile grim_leader_profile(const EnumeratedGame& e,
                                    const ExactTableBounds& b) {
  return leader_commitment(e, b, false);
}

StrategyProfile altruistic_leader_profile(const EnumeratedGame& e,
                                          const ExactTableBounds& b) {
  return leader_commitment(e, b, true);
}

namespace {

// Upper concave hull of the defined entries of v, written back onto the
// lattice: entries between hull vertices take chord values, entries outside
// the defined range stay -inf. Textbook monotone scan on plain arrays, kept
// free of the production frontier code on purpose.
std::vector<double> concave_hull_on(const std::vector<double>& xs,
                                    const std::vector<double>& v) {
  int k = static_cast<int>(xs.size());
  std::vector<int> hull;
  for (int i = 0; i < k; ++i) {
    if (v[i] == -kInf) continue;
    while (hull.size() >= 2) {
      int a = hull[hull.size() - 2], c = hull[hull.size() - 1];
      // Drop c when it lies on or below chord a--i.
      double t = (xs[c] - xs[a]) / (xs[i] - xs[a]);
      if (v[c] <= v[a] + t * (v[i] - v[a]) + 1e-15) {
        hull.pop_back();
      } else {
        break;
      }
    }
    // Equal x cannot happen: the lattice is strictly increasing.
    hull.push_back(i);
  }
  std::vector<double> out(k, -kInf);
  if (hull.empty()) return out;
  for (size_t h = 0; h + 1 < hull.size(); ++h) {
    int a = hull[h], c = hull[h + 1];
    for (int i = a; i < c; ++i) {
      double t = (xs[i] - xs[a]) / (xs[c] - xs[a]);
      out[i] = v[a] + t * (v[c] - v[a]);
    }
  }
  out[hull.back()] = v[hull.back()];
  return out;
}

// Grim punishment values by direct minimax recursion, kept separate from
// the production tables so the oracle stands on its own.
std::vector<double> oracle_grim(const EnumeratedGame& e) {
  int n = e.num_states();
  std::vector<double> lo(n, 0.0);
  for (int s = n - 1; s >= 0; --s) {
    const auto& kids = e.children[s];
    switch (e.owners[s]) {
      case Owner::kLeaf:
        lo[s] = e.r2[s];
        break;
      case Owner::kLeader: {
        double m = kInf;
        for (int c : kids) m = std::min(m, lo[c]);
        lo[s] = m;
        break;
      }
      case Owner::kFollower: {
        double m = -kInf;
        for (int c : kids) m = std::max(m, lo[c]);
        lo[s] = m;
        break;
      }
      case Owner::kChance: {
        double m = 0;
        for (size_t i = 0; i < kids.size(); ++i) {
          m += e.probs[s][i] * lo[kids[i]];
        }
        lo[s] = m;
        break;
      }
    }
  }
  return lo;
}

int lattice_index(const std::vector<double>& xs, double x) {
  auto it = std::lower_bound(xs.begin(), xs.end(), x - 1e-9);
  if (it == xs.end() || std::abs(*it - x) > 1e-9) {
    throw numerical_error("leaf payoff missing from the oracle lattice");
  }
  return static_cast<int>(it - xs.begin());
}

}  // namespace

OracleSolution oracle_solve(const EnumeratedGame& e, int grid) {
  if (grid < 2) throw bad_parameter("oracle grid needs at least two points");
  if (e.num_decision_states() > 1000 || e.num_states() > 4096) {
    throw too_large("oracle_solve is for tiny games only");
  }

  // Shared lattice: uniform grid over the leaf payoff range plus every leaf
  // follower payoff, so decision-state frontiers sit exactly on it.
  double lo = kInf, hi = -kInf;
  std::vector<double> xs;
  for (int s = 0; s < e.num_states(); ++s) {
    if (!e.is_leaf(s)) continue;
    lo = std::min(lo, e.r2[s]);
    hi = std::max(hi, e.r2[s]);
    xs.push_back(e.r2[s]);
  }
  for (int i = 0; i < grid; ++i) {
    xs.push_back(lo + (hi - lo) * i / (grid - 1));
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end(),
                       [](double a, double b) { return b - a <= 1e-12; }),
           xs.end());
  int k = static_cast<int>(xs.size());

  std::vector<double> grim = oracle_grim(e);
  std::vector<std::vector<double>> table(e.num_states());
  for (int s = e.num_states() - 1; s >= 0; --s) {
    const auto& kids = e.children[s];
    std::vector<double> v(k, -kInf);
    switch (e.owners[s]) {
      case Owner::kLeaf:
        v[lattice_index(xs, e.r2[s])] = e.r1[s];
        break;
      case Owner::kLeader: {
        for (int c : kids) {
          for (int i = 0; i < k; ++i) v[i] = std::max(v[i], table[c][i]);
        }
        v = concave_hull_on(xs, v);
        break;
      }
      case Owner::kFollower: {
        for (size_t a = 0; a < kids.size(); ++a) {
          // Recommending this child must beat the best deviation.
          double tau = -kInf;
          for (size_t o = 0; o < kids.size(); ++o) {
            if (o != a) tau = std::max(tau, grim[kids[o]]);
          }
          for (int i = 0; i < k; ++i) {
            if (xs[i] < tau - 1e-9) continue;
            v[i] = std::max(v[i], table[kids[a]][i]);
          }
        }
        v = concave_hull_on(xs, v);
        break;
      }
      case Owner::kChance: {
        // Fold children one at a time; candidates are sums of defined
        // points, reduced to hull vertices between folds.
        std::vector<std::pair<double, double>> cands{{0.0, 0.0}};
        for (size_t a = 0; a < kids.size(); ++a) {
          double p = e.probs[s][a];
          std::vector<std::pair<double, double>> next;
          for (const auto& [cx, cy] : cands) {
            for (int i = 0; i < k; ++i) {
              if (table[kids[a]][i] == -kInf) continue;
              next.emplace_back(cx + p * xs[i], cy + p * table[kids[a]][i]);
            }
          }
          if (next.empty()) {
            cands.clear();
            break;
          }
          std::sort(next.begin(), next.end());
          // Keep only the best candidate per x, then run the chain.
          std::vector<std::pair<double, double>> best_at;
          for (const auto& pt : next) {
            if (!best_at.empty() && pt.first - best_at.back().first <= 1e-12) {
              if (pt.second > best_at.back().second) best_at.back() = pt;
            } else {
              best_at.push_back(pt);
            }
          }
          std::vector<std::pair<double, double>> hull;
          for (const auto& pt : best_at) {
            while (hull.size() >= 2) {
              auto& a2 = hull[hull.size() - 2];
              auto& c2 = hull[hull.size() - 1];
              double t = (c2.first - a2.first) / (pt.first - a2.first);
              if (c2.second <=
                  a2.second + t * (pt.second - a2.second) + 1e-15) {
                hull.pop_back();
              } else {
                break;
              }
            }
            hull.push_back(pt);
          }
          cands = std::move(hull);
        }
        if (cands.empty()) break;  // an impossible branch leaves no promises
        // A fold narrower than the lattice spacing could fall between grid
        // points entirely; pinning each vertex to its nearest point keeps
        // the value represented (x error at most half a cell, and claimed
        // values never exceed achievable ones).
        for (const auto& [cx, cy] : cands) {
          auto it = std::lower_bound(xs.begin(), xs.end(), cx);
          int i = static_cast<int>(it - xs.begin());
          if (i == k || (i > 0 && cx - xs[i - 1] < xs[i] - cx)) --i;
          v[i] = std::max(v[i], cy);
        }
        // Sample the final hull back onto the lattice.
        for (int i = 0; i < k; ++i) {
          if (xs[i] < cands.front().first - 1e-9 ||
              xs[i] > cands.back().first + 1e-9) {
            continue;
          }
          double x = std::clamp(xs[i], cands.front().first,
                                cands.back().first);
          auto it = std::lower_bound(
              cands.begin(), cands.end(), x,
              [](const auto& pt, double q) { return pt.first < q; });
          if (it == cands.begin()) {
            v[i] = std::max(v[i], it->second);
          } else if (it == cands.end()) {
            v[i] = std::max(v[i], cands.back().second);
          } else {
            auto a2 = *(it - 1);
            auto c2 = *it;
            double t = c2.first == a2.first
                           ? 0.0
                           : (x - a2.first) / (c2.first - a2.first);
            v[i] = std::max(v[i], a2.second + t * (c2.second - a2.second));
          }
        }
        break;
      }
    }
    table[s] = std::move(v);
  }

  const auto& root = table[0];
  int best = -1;
  for (int i = 0; i < k; ++i) {
    if (root[i] == -kInf) continue;
    if (best < 0 || root[i] > root[best] + 1e-12) best = i;
  }
  if (best < 0) throw numerical_error("oracle found no feasible promise");
  return {xs[best], root[best]};
}

OracleSolution oracle_solve(const GameTree& g, int grid) {
  return oracle_solve(enumerate_game(g, 4096), grid);
}

}  // namespace sefce
