#include "sefce/game.hpp"

#include <cmath>
#include <stack>

namespace sefce {

double GameTree::chance_prob(const GameState&, int) const {
  throw bad_parameter("chance_prob queried on a game without chance states");
}

std::string GameTree::action_label(const GameState&, int action) const {
  return "a" + std::to_string(action);
}

GameState GameTree::state_at(std::span<const int> path) const {
  GameState s = root();
  for (int a : path) s = child(s, a);
  return s;
}

namespace {

template <class T>
void append_raw(std::string& out, const T& v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof v);
}

}  // namespace

std::string state_key(const GameState& s) {
  std::string out;
  out.push_back(static_cast<char>(s.index()));
  std::visit(
      [&out](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ExplicitState>) {
          append_raw(out, v.node);
        } else if constexpr (std::is_same_v<T, TantrumState>) {
          append_raw(out, v.stage);
          append_raw(out, v.leader_phase);
          append_raw(out, v.acceded);
          append_raw(out, v.refused_ok);
          append_raw(out, v.tantrums);
          append_raw(out, v.acc1);
          append_raw(out, v.acc2);
        } else {
          append_raw(out, v.ply);
          append_raw(out, v.row1);
          append_raw(out, v.col1);
          append_raw(out, v.row2);
          append_raw(out, v.col2);
          append_raw(out, v.visited[0]);
          append_raw(out, v.visited[1]);
          append_raw(out, v.got1);
          append_raw(out, v.got2);
        }
      },
      s);
  return out;
}

namespace {

int explicit_index(const GameState& s) {
  return std::get<ExplicitState>(s).node;
}

}  // namespace

ExplicitGame::ExplicitGame(std::string name, std::vector<ExplicitNode> nodes)
    : name_(std::move(name)), nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw bad_parameter("game has no nodes");
  int n = static_cast<int>(nodes_.size());
  std::vector<int> indegree(n, 0);
  for (int i = 0; i < n; ++i) {
    const ExplicitNode& node = nodes_[i];
    bool leaf = node.owner == Owner::kLeaf;
    if (leaf != node.children.empty()) {
      throw bad_parameter("leaf flag and child list disagree at node " +
                          std::to_string(i));
    }
    if (node.owner == Owner::kChance) {
      if (node.probs.size() != node.children.size()) {
        throw bad_parameter("chance node " + std::to_string(i) +
                            " has mismatched probabilities");
      }
      double sum = 0;
      for (double p : node.probs) {
        if (!(p > 0)) throw bad_parameter("chance probabilities must be positive");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-9) {
        throw bad_parameter("chance probabilities must sum to 1");
      }
    }
    for (int c : node.children) {
      if (c < 0 || c >= n) throw bad_parameter("child index out of range");
      ++indegree[c];
    }
  }
  if (indegree[0] != 0) throw bad_parameter("root must have no parent");
  for (int i = 1; i < n; ++i) {
    if (indegree[i] != 1) {
      throw bad_parameter("node " + std::to_string(i) +
                          " must have exactly one parent");
    }
  }

  depth_.assign(n, -1);
  depth_[0] = 0;
  std::stack<int> todo;
  todo.push(0);
  int seen = 1;
  while (!todo.empty()) {
    int s = todo.top();
    todo.pop();
    for (int c : nodes_[s].children) {
      depth_[c] = depth_[s] + 1;
      todo.push(c);
      ++seen;
    }
  }
  if (seen != n) throw bad_parameter("tree has unreachable nodes");

  feature_dim_ = 0;
  for (const auto& node : nodes_) {
    feature_dim_ = std::max(feature_dim_, static_cast<int>(node.features.size()));
  }
  if (feature_dim_ == 0) feature_dim_ = n;  // one-hot node ids
  for (const auto& node : nodes_) {
    if (!node.features.empty() &&
        static_cast<int>(node.features.size()) != feature_dim_) {
      throw bad_parameter("feature vectors must share one dimension");
    }
  }
}

const ExplicitNode& ExplicitGame::at(const GameState& s) const {
  int i = explicit_index(s);
  if (i < 0 || i >= static_cast<int>(nodes_.size())) {
    throw bad_parameter("state index out of range");
  }
  return nodes_[i];
}

Owner ExplicitGame::owner(const GameState& s) const { return at(s).owner; }

int ExplicitGame::num_actions(const GameState& s) const {
  return static_cast<int>(at(s).children.size());
}

GameState ExplicitGame::child(const GameState& s, int action) const {
  return ExplicitState{at(s).children.at(action)};
}

double ExplicitGame::chance_prob(const GameState& s, int action) const {
  const ExplicitNode& node = at(s);
  if (node.owner != Owner::kChance) {
    throw bad_parameter("chance_prob on a non-chance state");
  }
  return node.probs.at(action);
}

std::pair<double, double> ExplicitGame::leaf_payoff(const GameState& s) const {
  const ExplicitNode& node = at(s);
  return {node.r1, node.r2};
}

std::string ExplicitGame::action_label(const GameState& s, int action) const {
  const ExplicitNode& node = at(s);
  if (action < static_cast<int>(node.labels.size())) return node.labels[action];
  return GameTree::action_label(s, action);
}

int ExplicitGame::depth(const GameState& s) const {
  return depth_[explicit_index(s)];
}

int ExplicitGame::feature_dim() const { return feature_dim_; }

Eigen::VectorXd ExplicitGame::features(const GameState& s) const {
  const ExplicitNode& node = at(s);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(feature_dim_);
  if (node.features.empty()) {
    f[explicit_index(s)] = 1.0;
  } else {
    for (int i = 0; i < feature_dim_; ++i) f[i] = node.features[i];
  }
  return f;
}

int EnumeratedGame::num_decision_states() const {
  int n = 0;
  for (Owner o : owners) {
    if (o == Owner::kLeader || o == Owner::kFollower) ++n;
  }
  return n;
}

int EnumeratedGame::max_depth() const {
  int d = 0;
  for (int x : depth) d = std::max(d, x);
  return d;
}

EnumeratedGame enumerate_game(const GameTree& g, int max_states) {
  EnumeratedGame e;
  e.game = &g;

  struct Item {
    GameState s;
    int parent;
    int action;
  };
  std::vector<Item> stack{{g.root(), -1, -1}};
  while (!stack.empty()) {
    Item it = stack.back();
    stack.pop_back();
    int id = e.num_states();
    if (id >= max_states) {
      throw too_large("game exceeds the state budget of " +
                      std::to_string(max_states));
    }
    e.states.push_back(it.s);
    e.owners.push_back(g.owner(it.s));
    e.parent.push_back(it.parent);
    e.parent_action.push_back(it.action);
    e.depth.push_back(it.parent < 0 ? 0 : e.depth[it.parent] + 1);
    e.children.emplace_back();
    e.probs.emplace_back();
    e.r1.push_back(0);
    e.r2.push_back(0);
    if (it.parent >= 0) {
      auto& kids = e.children[it.parent];
      kids[it.action] = id;
    }
    Owner o = e.owners.back();
    if (o == Owner::kLeaf) {
      auto [r1, r2] = g.leaf_payoff(it.s);
      e.r1.back() = r1;
      e.r2.back() = r2;
      continue;
    }
    int k = g.num_actions(it.s);
    if (k <= 0) throw bad_parameter("decision state with no actions");
    e.children.back().assign(k, -1);
    if (o == Owner::kChance) {
      auto& ps = e.probs.back();
      for (int a = 0; a < k; ++a) ps.push_back(g.chance_prob(it.s, a));
    }
    // Push in reverse so children are numbered in action order.
    for (int a = k - 1; a >= 0; --a) {
      stack.push_back({g.child(it.s, a), id, a});
    }
  }

  e.leaves_below.assign(e.num_states(), 0);
  for (int s = e.num_states() - 1; s >= 0; --s) {
    if (e.is_leaf(s)) {
      e.leaves_below[s] = 1;
    } else {
      for (int c : e.children[s]) e.leaves_below[s] += e.leaves_below[c];
    }
  }
  return e;
}

}  // namespace sefce
