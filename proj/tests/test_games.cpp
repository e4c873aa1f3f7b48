#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "sefce/games.hpp"
#include "support/random_tree.hpp"

using namespace sefce;

TEST_CASE("fig1 and friends have the documented shapes") {
  ExplicitGame g = build_fig1(0, 0);
  EnumeratedGame e = enumerate_game(g);
  CHECK(e.num_states() == 5);
  CHECK(e.owners[0] == Owner::kFollower);
  CHECK(e.num_decision_states() == 2);
  CHECK(g.action_label(g.root(), 0) == "stay");
  CHECK(g.action_label(g.root(), 1) == "exit");

  ExplicitGame p = build_promise_game(-10, -1, 0.1);
  EnumeratedGame ep = enumerate_game(p);
  CHECK(ep.num_states() == 7);
  int leaves = 0;
  for (int s = 0; s < ep.num_states(); ++s) {
    if (ep.is_leaf(s)) ++leaves;
  }
  CHECK(leaves == 4);
  CHECK_THROWS_AS(build_promise_game(0, 0, 0.0), bad_parameter);

  ExplicitGame f6 = build_fig6();
  EnumeratedGame e6 = enumerate_game(f6);
  CHECK(e6.num_states() == 7);
  CHECK(e6.owners[0] == Owner::kFollower);
  // Both follower moves land in leader states.
  for (int c : e6.children[0]) CHECK(e6.owners[c] == Owner::kLeader);
}

TEST_CASE("explicit game validation rejects malformed trees") {
  // Node with two parents.
  std::vector<ExplicitNode> dag(3);
  dag[0].owner = Owner::kLeader;
  dag[0].children = {1, 2};
  dag[1].owner = Owner::kFollower;
  dag[1].children = {2};
  dag[2].owner = Owner::kLeaf;
  CHECK_THROWS_AS(ExplicitGame("dag", std::move(dag)), bad_parameter);

  // Chance probabilities that do not sum to one.
  std::vector<ExplicitNode> bad(3);
  bad[0].owner = Owner::kChance;
  bad[0].children = {1, 2};
  bad[0].probs = {0.5, 0.6};
  bad[1].owner = Owner::kLeaf;
  bad[2].owner = Owner::kLeaf;
  CHECK_THROWS_AS(ExplicitGame("bad", std::move(bad)), bad_parameter);
}

TEST_CASE("tantrum stage game unrolls with accumulated payoffs") {
  Eigen::VectorXd q1(1), q2(1);
  q1 << 1;
  q2 << 2;
  TantrumGame g(1, q1, q2);
  EnumeratedGame e = enumerate_game(g);
  CHECK(e.num_states() == 5);
  std::multiset<std::pair<double, double>> leaves;
  for (int s = 0; s < e.num_states(); ++s) {
    if (e.is_leaf(s)) leaves.insert({e.r1[s], e.r2[s]});
  }
  std::multiset<std::pair<double, double>> want{{1, -2}, {0, 0}, {-1, -1}};
  CHECK(leaves == want);

  Eigen::VectorXd q1b = Eigen::VectorXd::Ones(3);
  Eigen::VectorXd q2b = Eigen::VectorXd::Constant(3, 2.0);
  TantrumGame g3(3, q1b, q2b);
  EnumeratedGame e3 = enumerate_game(g3);
  CHECK(e3.num_states() == 53);
  CHECK(e3.num_decision_states() == 26);
  CHECK(e3.max_depth() == 6);

  // Depth bookkeeping matches the enumerator's edge counts.
  for (int s = 0; s < e3.num_states(); ++s) {
    CHECK(g3.depth(e3.states[s]) == e3.depth[s]);
  }

  Eigen::VectorXd cheap = Eigen::VectorXd::Constant(3, 0.5);
  CHECK_THROWS_AS(TantrumGame(3, q1b, cheap), bad_parameter);
}

TEST_CASE("tantrum features expose outcome counts and phase") {
  Eigen::VectorXd q1 = Eigen::VectorXd::Ones(2);
  Eigen::VectorXd q2 = Eigen::VectorXd::Constant(2, 2.0);
  TantrumGame g(2, q1, q2);
  CHECK(g.feature_dim() == 5);
  GameState s = g.root();
  s = g.child(s, 1);  // refuse
  Eigen::VectorXd f = g.features(s);
  CHECK(f[3] == 0.0);
  CHECK(f[4] == 1.0);
  s = g.child(s, 1);  // tantrum
  s = g.child(s, 0);  // accede
  f = g.features(s);
  CHECK(f[0] == 1.0);
  CHECK(f[2] == 1.0);

  TantrumGame gf(2, q1, q2, true);
  CHECK(gf.feature_dim() == 5 + 4 + 2);
  GameState t = gf.child(gf.root(), 0);
  Eigen::VectorXd ff = gf.features(t);
  CHECK(ff[5] == 1.0);               // q1 vector
  CHECK(ff[7] == 2.0);               // q2 vector
  CHECK(ff[9] == 1.0);               // collected by the leader
  CHECK(ff[10] == -2.0);             // paid by the follower
}

TEST_CASE("resource grid collects once and clips at borders") {
  Eigen::MatrixXd r1 = Eigen::MatrixXd::Zero(3, 3);
  Eigen::MatrixXd r2 = Eigen::MatrixXd::Zero(3, 3);
  r1(0, 1) = 1.0;  // directly above the center
  RcGame g(3, 1, r1, r2);
  EnumeratedGame e = enumerate_game(g);
  CHECK(e.num_states() == 1 + 5 + 25);
  CHECK(e.owners[0] == Owner::kLeader);

  GameState s = g.child(g.root(), 1);  // up
  CHECK(g.owner(s) == Owner::kFollower);
  GameState l = g.child(s, 0);  // follower stays
  CHECK(g.leaf_payoff(l).first == 1.0);

  // Second visit collects nothing.
  RcGame g2(3, 3, r1, r2);
  GameState t = g2.root();
  t = g2.child(t, 1);  // leader up: collect 1
  t = g2.child(t, 0);  // follower stay
  t = g2.child(t, 2);  // leader back down onto the visited center
  t = g2.child(t, 0);
  t = g2.child(t, 1);  // leader up again: already visited
  t = g2.child(t, 0);
  CHECK(g2.leaf_payoff(t).first == 1.0);

  // Border clipping: moving up from the top row stays put.
  GameState b = g2.root();
  b = g2.child(b, 1);           // leader to row 0
  b = g2.child(b, 0);           // follower stay
  GameState clipped = g2.child(b, 1);
  GameState stayed = g2.child(b, 0);
  const auto& cs = std::get<RcState>(clipped);
  const auto& ss = std::get<RcState>(stayed);
  CHECK(cs.row1 == 0);
  CHECK(cs.row1 == ss.row1);
  CHECK(cs.col1 == ss.col1);

  CHECK_THROWS_AS(RcGame(4, 1, Eigen::MatrixXd::Zero(4, 4),
                         Eigen::MatrixXd::Zero(4, 4)),
                  bad_parameter);
}

TEST_CASE("rc features describe visits, positions, turn and budget") {
  Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(3, 3);
  RcGame g(3, 2, ones, ones);
  CHECK(g.feature_dim() == 9 + 9);
  Eigen::VectorXd f = g.features(g.root());
  CHECK(f.segment(0, 9).sum() == 1.0);  // only the center visited
  CHECK(f[9] == 1.0);                   // leader row
  CHECK(f[13] == 1.0);                  // leader to move
  CHECK(f[17] == 4.0);                  // plies remaining
}

TEST_CASE("gp maps: degenerate sigma, determinism, neighbor correlation") {
  auto [a, b] = sample_gp_maps(3, 2.0, 0.0, 7);
  CHECK((a - Eigen::MatrixXd::Ones(3, 3)).norm() == doctest::Approx(0.0));
  CHECK((b - Eigen::MatrixXd::Ones(3, 3)).norm() == doctest::Approx(0.0));

  auto [c1, d1] = sample_gp_maps(5, 2.0, 0.1, 42);
  auto [c2, d2] = sample_gp_maps(5, 2.0, 0.1, 42);
  CHECK((c1 - c2).norm() == 0.0);
  CHECK((d1 - d2).norm() == 0.0);
  auto [c3, d3] = sample_gp_maps(5, 2.0, 0.1, 43);
  CHECK((c1 - c3).norm() > 0.0);

  // Adjacent cells correlate strongly at length scale 2.
  int n = 100;
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (int seed = 0; seed < n; ++seed) {
    auto [m1, m2] = sample_gp_maps(3, 2.0, 0.1, seed);
    double x = std::log(m1(1, 1));
    double y = std::log(m1(1, 2));
    sx += x;
    sy += y;
    sxx += x * x;
    syy += y * y;
    sxy += x * y;
  }
  double cov = sxy / n - (sx / n) * (sy / n);
  double vx = sxx / n - (sx / n) * (sx / n);
  double vy = syy / n - (sy / n) * (sy / n);
  double corr = cov / std::sqrt(vx * vy);
  CHECK(corr > 0.5);
}

TEST_CASE("featurized q vectors sit above the shift with unit-mean excess") {
  auto [q1, q2] = sample_featurized_q(200, 1.0, 5);
  CHECK(q1.minCoeff() >= 1.0);
  CHECK(q2.minCoeff() >= 1.0);
  CHECK((q1.array() - 1.0).mean() == doctest::Approx(1.0).epsilon(0.2));
  auto [p1, p2] = sample_featurized_q(200, 4.0, 5);
  CHECK(p1.minCoeff() >= 4.0);
  auto [r1, r2] = sample_featurized_q(5, 1.0, 5);
  auto [s1, s2] = sample_featurized_q(5, 1.0, 5);
  CHECK((r1 - s1).norm() == 0.0);
  CHECK_THROWS_AS(sample_featurized_q(3, 0.5, 1), bad_parameter);
}

TEST_CASE("enumerate_game respects the state budget and id order") {
  Eigen::VectorXd q1 = Eigen::VectorXd::Ones(6);
  Eigen::VectorXd q2 = Eigen::VectorXd::Constant(6, 2.0);
  TantrumGame g(6, q1, q2);
  CHECK_THROWS_AS(enumerate_game(g, 100), too_large);
  EnumeratedGame e = enumerate_game(g);
  CHECK(e.num_states() == 1457);
  for (int s = 0; s < e.num_states(); ++s) {
    for (int c : e.children[s]) CHECK(c > s);
  }
  // Path decoding round-trips through state_at.
  std::vector<int> path{1, 1, 0, 1, 0};
  GameState st = g.state_at(path);
  const auto& ts = std::get<TantrumState>(st);
  CHECK(ts.tantrums == 1);
  CHECK(ts.acceded == 1);
  CHECK(g.depth(st) == 5);
}

TEST_CASE("random trees are valid games of bounded size") {
  sefce::rng r(31);
  for (int trial = 0; trial < 50; ++trial) {
    ExplicitGame g = sefce::testing::random_tree(r);
    EnumeratedGame e = enumerate_game(g);
    CHECK(e.num_states() <= 500);
    CHECK(e.num_states() >= 1);
    for (int s = 0; s < e.num_states(); ++s) {
      if (e.is_leaf(s)) {
        CHECK(e.r1[s] >= -10);
        CHECK(e.r1[s] <= 10);
      }
    }
  }
}
