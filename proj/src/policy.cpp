#include "sefce/policy.hpp"

#include <algorithm>
#include <limits>
#include <stack>

#include "sefce/errors.hpp"

namespace sefce {

LookaheadPolicy LookaheadPolicy::from_model(const GameTree& g,
                                            BoundsOracle& b,
                                            const EpfModel& model) {
  return LookaheadPolicy(
      g, b, [&model, &g](const GameState& s, double lo, double hi) {
        return model.predict(g.features(s), lo, hi, false);
      });
}

Epf LookaheadPolicy::child_frontier(const GameState& c) const {
  if (g_->owner(c) == Owner::kLeaf) {
    auto [r1, r2] = g_->leaf_payoff(c);
    return make_epf({{r2, r1}});
  }
  auto [lo, hi] = b_->bounds(*g_, c);
  return pred_(c, lo, hi);
}

LocalPlan LookaheadPolicy::local(const GameState& s, double mu) const {
  int n = g_->num_actions(s);
  if (n == 0) throw bad_parameter("a leaf has no plan");
  LocalPlan out;
  out.probs.assign(n, 0.0);
  out.child_promise.assign(n, 0.0);
  Owner o = g_->owner(s);

  if (o == Owner::kChance) {
    std::vector<Epf> fs;
    std::vector<double> ps(n);
    fs.reserve(n);
    for (int a = 0; a < n; ++a) {
      ps[a] = g_->chance_prob(s, a);
      fs.push_back(child_frontier(g_->child(s, a)));
    }
    Epf conv = max_convolve(ps, fs);
    double mu_eff = std::clamp(mu, conv.x_min(), conv.x_max());
    mu_eff = std::max(mu_eff, conv.peak_x());
    std::vector<double> mus = max_convolve_split(ps, fs, mu_eff);
    out.probs = ps;
    out.child_promise = mus;
    out.value1 = conv.eval(mu_eff);
    out.promise = mu_eff;
    return out;
  }

  std::vector<Epf> fs;
  std::vector<int> action_of;
  fs.reserve(n);
  if (o == Owner::kFollower) {
    std::vector<double> taus = b_->taus(*g_, s);
    std::vector<Epf> raw(n);
    std::vector<double> lows(n);
    for (int a = 0; a < n; ++a) {
      GameState c = g_->child(s, a);
      raw[a] = child_frontier(c);
      lows[a] = b_->bounds(*g_, c).first;
      if (auto t = truncate(raw[a], taus[a])) {
        fs.push_back(std::move(*t));
        action_of.push_back(a);
      }
    }
    if (fs.empty()) {
      // Heuristic thresholds exceeded every predicted domain. Recommending
      // the child with the strongest punishment keeps play defined; the
      // incentive audit will surface any real violation.
      out.wipeout = true;
      int best = static_cast<int>(
          std::max_element(lows.begin(), lows.end()) - lows.begin());
      const Epf& f = raw[best];
      double mu_eff = std::clamp(mu, f.x_min(), f.x_max());
      mu_eff = std::max(mu_eff, f.peak_x());
      out.probs[best] = 1.0;
      out.child_promise[best] = mu_eff;
      out.value1 = f.eval(mu_eff);
      out.promise = mu_eff;
      return out;
    }
  } else {
    for (int a = 0; a < n; ++a) {
      fs.push_back(child_frontier(g_->child(s, a)));
      action_of.push_back(a);
    }
  }

  Epf env = envelope(fs);
  double mu_eff = std::clamp(mu, env.x_min(), env.x_max());
  mu_eff = std::max(mu_eff, env.peak_x());
  Decomposition d = decompose(fs, env, mu_eff);
  int left = action_of[d.left];
  int right = action_of[d.right];
  out.probs[left] += d.t;
  out.probs[right] += 1.0 - d.t;
  out.child_promise[left] = d.mu_left;
  if (right != left) out.child_promise[right] = d.mu_right;
  out.value1 = env.eval(mu_eff);
  out.promise = mu_eff;
  return out;
}

StrategyProfile materialize(const LookaheadPolicy& pol,
                            const EnumeratedGame& e,
                            const ExactTableBounds& grim,
                            std::optional<double> mu_root) {
  int n = e.num_states();
  StrategyProfile p;
  p.probs.resize(n);
  p.promise.assign(n, 0.0);
  p.reached.assign(n, 0);

  double mu0 = mu_root ? *mu_root : -std::numeric_limits<double>::infinity();
  std::stack<std::pair<int, double>> work;
  work.emplace(0, mu0);
  while (!work.empty()) {
    auto [id, mu] = work.top();
    work.pop();
    p.reached[id] = 1;
    if (e.is_leaf(id)) {
      p.promise[id] = e.r2[id];
      continue;
    }
    LocalPlan plan = pol.local(e.states[id], mu);
    p.promise[id] = plan.promise;
    p.probs[id] = plan.probs;
    const auto& kids = e.children[id];
    for (std::size_t a = 0; a < kids.size(); ++a) {
      if (plan.probs[a] > 0) work.emplace(kids[a], plan.child_promise[a]);
    }
  }

  // Punishment play everywhere extraction never went, matching the exact
  // extractor's conventions.
  for (int id = 0; id < n; ++id) {
    if (p.reached[id]) continue;
    p.promise[id] = grim.lo_at(id);
    const auto& kids = e.children[id];
    switch (e.owners[id]) {
      case Owner::kLeaf:
        break;
      case Owner::kChance:
        p.probs[id] = e.probs[id];
        break;
      case Owner::kLeader: {
        int best = 0;
        for (std::size_t i = 1; i < kids.size(); ++i) {
          if (grim.lo_at(kids[i]) < grim.lo_at(kids[best])) {
            best = static_cast<int>(i);
          }
        }
        p.probs[id].assign(kids.size(), 0.0);
        p.probs[id][best] = 1.0;
        break;
      }
      case Owner::kFollower: {
        int best = 0;
        for (std::size_t i = 1; i < kids.size(); ++i) {
          if (grim.lo_at(kids[i]) > grim.lo_at(kids[best])) {
            best = static_cast<int>(i);
          }
        }
        p.probs[id].assign(kids.size(), 0.0);
        p.probs[id][best] = 1.0;
        break;
      }
    }
  }
  return p;
}

std::pair<double, double> rollout_value(const LookaheadPolicy& pol,
                                        std::optional<double> mu_root) {
  const GameTree& g = pol.game();
  double mu0 = mu_root ? *mu_root : -std::numeric_limits<double>::infinity();

  std::function<std::pair<double, double>(const GameState&, double)> go =
      [&](const GameState& s, double mu) -> std::pair<double, double> {
    if (g.owner(s) == Owner::kLeaf) return g.leaf_payoff(s);
    LocalPlan plan = pol.local(s, mu);
    double v1 = 0, v2 = 0;
    for (std::size_t a = 0; a < plan.probs.size(); ++a) {
      if (plan.probs[a] <= 0) continue;
      auto [c1, c2] = go(g.child(s, static_cast<int>(a)),
                         plan.child_promise[a]);
      v1 += plan.probs[a] * c1;
      v2 += plan.probs[a] * c2;
    }
    return {v1, v2};
  };
  return go(g.root(), mu0);
}

}  // namespace sefce
