#include "support/random_tree.hpp"

#include <deque>

namespace sefce::testing {

ExplicitGame random_tree(rng& r, const RandomTreeOptions& opt) {
  std::vector<ExplicitNode> nodes(1);
  std::deque<std::pair<int, int>> frontier{{0, 0}};  // (id, depth)
  int budget = opt.max_states - 1;
  int decisions = 0;
  bool first = true;
  while (!frontier.empty()) {
    auto [id, depth] = frontier.front();
    frontier.pop_front();

    bool leaf = budget < 2 || depth >= opt.max_depth ||
                (!first && r.uniform() < 0.3);
    if (!leaf && decisions >= opt.max_decisions && r.uniform() < 0.8) {
      // Over the decision budget only chance states may still branch.
      leaf = true;
    }
    first = false;
    if (leaf) {
      nodes[id].owner = Owner::kLeaf;
      nodes[id].r1 = r.uniform(opt.payoff_lo, opt.payoff_hi);
      nodes[id].r2 = r.uniform(opt.payoff_lo, opt.payoff_hi);
      continue;
    }

    bool chance = r.uniform() < opt.chance_frac;
    if (!chance && decisions >= opt.max_decisions) chance = true;
    int k = 2 + r.uniform_int(std::max(1, opt.max_branch - 1));
    k = std::min(k, budget);
    if (chance) {
      nodes[id].owner = Owner::kChance;
      double sum = 0;
      std::vector<double> w(k);
      for (double& x : w) {
        x = r.uniform(0.2, 1.0);
        sum += x;
      }
      for (double x : w) nodes[id].probs.push_back(x / sum);
    } else {
      nodes[id].owner = r.uniform() < 0.5 ? Owner::kLeader : Owner::kFollower;
      ++decisions;
    }
    for (int a = 0; a < k; ++a) {
      // nodes may reallocate here, so index instead of holding a reference
      int cid = static_cast<int>(nodes.size());
      nodes[id].children.push_back(cid);
      nodes.emplace_back();
      frontier.push_back({cid, depth + 1});
      --budget;
    }
  }
  // One-hot features would make huge vectors; use compact ids instead.
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    nodes[i].features = {static_cast<double>(i), static_cast<double>(i % 7),
                         static_cast<double>(i % 3)};
  }
  return ExplicitGame("random", std::move(nodes));
}

}  // namespace sefce::testing
