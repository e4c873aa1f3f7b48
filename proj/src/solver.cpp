#include "sefce/solver.hpp"

#include <algorithm>
#include <stack>

namespace sefce {

std::vector<double> deviation_values(const EnumeratedGame& e,
                                     const std::vector<double>& lo, int s) {
  const auto& kids = e.children[s];
  int k = static_cast<int>(kids.size());
  std::vector<double> tau(k, kNegInf);
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      if (b != a) tau[a] = std::max(tau[a], lo[kids[b]]);
    }
  }
  return tau;
}

std::vector<Epf> solve_epfs(const EnumeratedGame& e,
                            const ExactTableBounds& b) {
  int n = e.num_states();
  std::vector<Epf> epfs(n);
  std::vector<Epf> scratch;
  for (int s = n - 1; s >= 0; --s) {  // children have larger ids
    switch (e.owners[s]) {
      case Owner::kLeaf:
        epfs[s] = make_epf({{e.r2[s], e.r1[s]}});
        break;
      case Owner::kLeader: {
        scratch.clear();
        for (int c : e.children[s]) scratch.push_back(epfs[c]);
        epfs[s] = envelope(scratch);
        break;
      }
      case Owner::kFollower: {
        std::vector<double> tau = deviation_values(e, b.lo(), s);
        scratch.clear();
        for (size_t i = 0; i < e.children[s].size(); ++i) {
          auto cut = truncate(epfs[e.children[s][i]], tau[i]);
          if (cut) scratch.push_back(std::move(*cut));
        }
        if (scratch.empty()) {
          throw numerical_error(
              "no child frontier survived truncation; grim values are "
              "inconsistent with the frontiers");
        }
        epfs[s] = envelope(scratch);
        break;
      }
      case Owner::kChance: {
        scratch.clear();
        for (int c : e.children[s]) scratch.push_back(epfs[c]);
        epfs[s] = max_convolve(e.probs[s], scratch);
        break;
      }
    }
  }
  return epfs;
}

namespace {

double clamp_to_domain(const Epf& f, double mu) {
  return std::clamp(mu, f.x_min(), f.x_max());
}

}  // namespace

StrategyProfile extract_strategy(const EnumeratedGame& e,
                                 const ExactTableBounds& b,
                                 const std::vector<Epf>& epfs,
                                 double mu_root) {
  int n = e.num_states();
  StrategyProfile p;
  p.probs.resize(n);
  p.promise.assign(n, 0.0);
  p.reached.assign(n, 0);

  std::stack<std::pair<int, double>> work;
  work.emplace(0, clamp_to_domain(epfs[0], mu_root));
  while (!work.empty()) {
    auto [s, mu] = work.top();
    work.pop();
    p.reached[s] = 1;
    p.promise[s] = mu;
    const auto& kids = e.children[s];
    switch (e.owners[s]) {
      case Owner::kLeaf:
        break;
      case Owner::kLeader: {
        std::vector<Epf> fs;
        for (int c : kids) fs.push_back(epfs[c]);
        Decomposition d = decompose(fs, epfs[s], mu);
        p.probs[s].assign(kids.size(), 0.0);
        p.probs[s][d.left] += d.t;
        p.probs[s][d.right] += 1.0 - d.t;
        if (d.t > 0) {
          work.emplace(kids[d.left],
                       clamp_to_domain(epfs[kids[d.left]], d.mu_left));
        }
        if (d.t < 1 && d.right != d.left) {
          work.emplace(kids[d.right],
                       clamp_to_domain(epfs[kids[d.right]], d.mu_right));
        }
        break;
      }
      case Owner::kFollower: {
        std::vector<double> tau = deviation_values(e, b.lo(), s);
        std::vector<Epf> fs;
        std::vector<int> action_of;
        for (size_t i = 0; i < kids.size(); ++i) {
          auto cut = truncate(epfs[kids[i]], tau[i]);
          if (cut) {
            fs.push_back(std::move(*cut));
            action_of.push_back(static_cast<int>(i));
          }
        }
        Decomposition d = decompose(fs, epfs[s], mu);
        int left = action_of[d.left];
        int right = action_of[d.right];
        p.probs[s].assign(kids.size(), 0.0);
        p.probs[s][left] += d.t;
        p.probs[s][right] += 1.0 - d.t;
        if (d.t > 0) {
          work.emplace(kids[left], clamp_to_domain(epfs[kids[left]], d.mu_left));
        }
        if (d.t < 1 && right != left) {
          work.emplace(kids[right],
                       clamp_to_domain(epfs[kids[right]], d.mu_right));
        }
        break;
      }
      case Owner::kChance: {
        std::vector<Epf> fs;
        for (int c : kids) fs.push_back(epfs[c]);
        std::vector<double> mus = max_convolve_split(e.probs[s], fs, mu);
        p.probs[s] = e.probs[s];
        for (size_t i = 0; i < kids.size(); ++i) {
          work.emplace(kids[i], clamp_to_domain(epfs[kids[i]], mus[i]));
        }
        break;
      }
    }
  }

  // Punishment play everywhere extraction never went.
  for (int s = 0; s < n; ++s) {
    if (p.reached[s]) continue;
    p.promise[s] = b.lo_at(s);
    const auto& kids = e.children[s];
    switch (e.owners[s]) {
      case Owner::kLeaf:
        break;
      case Owner::kChance:
        p.probs[s] = e.probs[s];
        break;
      case Owner::kLeader: {
        int best = 0;
        for (size_t i = 1; i < kids.size(); ++i) {
          if (b.lo_at(kids[i]) < b.lo_at(kids[best])) {
            best = static_cast<int>(i);
          }
        }
        p.probs[s].assign(kids.size(), 0.0);
        p.probs[s][best] = 1.0;
        break;
      }
      case Owner::kFollower: {
        int best = 0;
        for (size_t i = 1; i < kids.size(); ++i) {
          if (b.lo_at(kids[i]) > b.lo_at(kids[best])) {
            best = static_cast<int>(i);
          }
        }
        p.probs[s].assign(kids.size(), 0.0);
        p.probs[s][best] = 1.0;
        break;
      }
    }
  }
  return p;
}

SolveResult solve(const EnumeratedGame& e, std::optional<double> mu_root) {
  ExactTableBounds b(e);
  SolveResult r;
  r.lo = b.lo();
  r.hi = b.hi();
  r.epfs = solve_epfs(e, b);
  double mu = mu_root ? *mu_root : r.epfs[0].peak_x();
  r.profile = extract_strategy(e, b, r.epfs, mu);
  r.opt2 = clamp_to_domain(r.epfs[0], mu);
  r.opt1 = r.epfs[0].eval(r.opt2);
  return r;
}

}  // namespace sefce
