#include <charconv>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sefce/baselines.hpp"
#include "sefce/bounds.hpp"
#include "sefce/errors.hpp"
#include "sefce/games.hpp"
#include "sefce/io.hpp"
#include "sefce/net.hpp"
#include "sefce/policy.hpp"
#include "sefce/solver.hpp"
#include "sefce/svg_plot.hpp"
#include "sefce/trainer.hpp"
#include "sefce/verifier.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sefce;

namespace {

std::string fmt(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

struct GenArgs {
  std::string kind, out;
  std::uint64_t seed = 0;
  double k1 = 0, k2 = 0, eps = 0.1;
  int n = 3, grid = 3;
  double q1 = 1, q2 = 2, shift = 1;
  bool featurized = false;
  double length_scale = 2, sigma = 0.5;
};

void cmd_gen_game(const GenArgs& a) {
  std::unique_ptr<GameTree> g;
  if (a.kind == "fig1") {
    g = std::make_unique<ExplicitGame>(build_fig1(a.k1, a.k2));
  } else if (a.kind == "fig6") {
    g = std::make_unique<ExplicitGame>(build_fig6());
  } else if (a.kind == "promise") {
    g = std::make_unique<ExplicitGame>(build_promise_game(a.k1, a.k2, a.eps));
  } else if (a.kind == "tantrum") {
    Eigen::VectorXd q1v, q2v;
    if (a.featurized) {
      std::tie(q1v, q2v) = sample_featurized_q(a.n, a.shift, a.seed);
    } else {
      q1v = Eigen::VectorXd::Constant(a.n, a.q1);
      q2v = Eigen::VectorXd::Constant(a.n, a.q2);
    }
    g = std::make_unique<TantrumGame>(a.n, q1v, q2v, a.featurized);
  } else if (a.kind == "rc") {
    auto [m1, m2] = sample_gp_maps(a.grid, a.length_scale, a.sigma, a.seed);
    g = std::make_unique<RcGame>(a.grid, a.n, m1, m2);
  } else {
    throw bad_parameter("unknown game kind '" + a.kind + "'");
  }
  write_text_file(a.out, game_to_json(*g));
  std::cout << "wrote " << a.out << "\n";
}

struct SolveArgs {
  std::string game, out;
  std::optional<double> mu2;
  int max_states = 2'000'000;
  int epf_cap = 10000;
};

void cmd_solve(const SolveArgs& a) {
  auto g = game_from_json(read_text_file(a.game));
  EnumeratedGame e = enumerate_game(*g, a.max_states);
  SolveResult r = solve(e, a.mu2);
  fs::create_directories(a.out);
  write_text_file(fs::path(a.out) / "result.json",
                  solve_result_to_json(e, r, a.epf_cap));
  write_text_file(fs::path(a.out) / "root_epf.csv", epf_to_csv(r.epfs[0]));
  std::cout << "OPT " << fmt(r.opt2) << "," << fmt(r.opt1) << "\n";
}

/// Picks the payoff-window oracle for training or extraction. The tantrum
/// family has closed-form exact windows at any horizon; the grid game has
/// the heuristic oracle; everything else enumerates.
std::unique_ptr<BoundsOracle> make_bounds(const GameTree& g, BoundsMode mode,
                                          int max_states,
                                          std::unique_ptr<EnumeratedGame>* held) {
  if (dynamic_cast<const TantrumGame*>(&g)) {
    return std::make_unique<TantrumBoundsOracle>();
  }
  if (mode == BoundsMode::kApproximate) {
    if (dynamic_cast<const RcGame*>(&g)) {
      return std::make_unique<RcApproxBounds>();
    }
    throw bad_parameter("approximate windows exist only for the grid game");
  }
  auto e = std::make_unique<EnumeratedGame>(enumerate_game(g, max_states));
  auto b = std::make_unique<ExactTableBounds>(*e);
  if (held) *held = std::move(e);
  return b;
}

struct TrainArgs {
  std::string game, config, out, resume;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> epochs;
  int max_states = 2'000'000;
};

void cmd_train(const TrainArgs& a) {
  auto g = game_from_json(read_text_file(a.game));
  TrainConfig cfg = train_config_from_json(read_text_file(a.config));
  if (a.seed) cfg.seed = *a.seed;
  if (a.epochs) cfg.epochs = *a.epochs;
  cfg.validate();

  std::unique_ptr<EnumeratedGame> held;
  auto bounds = make_bounds(*g, cfg.bounds_mode, a.max_states, &held);
  SingleInstance src(*g, *bounds);
  EpfModel model(cfg.m, cfg.depth, cfg.width, g->feature_dim(), cfg.seed);
  Trainer tr(src, model, cfg);

  std::int64_t start_epoch = 0;
  if (!a.resume.empty()) {
    Checkpoint c = checkpoint_from_bytes(read_text_file(a.resume));
    restore_checkpoint(c, model, tr.opt());
    tr.set_steps_done(c.opt_step);
    start_epoch = c.epoch;
  }

  TrainResult res = tr.run(start_epoch);

  fs::create_directories(a.out);
  std::int64_t end_epoch = start_epoch + res.epochs_done;
  write_text_file(
      fs::path(a.out) / "checkpoint.bin",
      checkpoint_to_bytes(make_checkpoint(model, tr.opt(), end_epoch)));
  std::vector<TrainMetricsRow> rows;
  fs::path metrics_path = fs::path(a.out) / "metrics.csv";
  if (!a.resume.empty() && fs::exists(metrics_path)) {
    rows = metrics_from_csv(read_text_file(metrics_path));
  }
  rows.insert(rows.end(), res.metrics.begin(), res.metrics.end());
  write_text_file(metrics_path, metrics_to_csv(rows));
  std::cout << "trained " << res.epochs_done << " epochs (through epoch "
            << end_epoch << ")";
  if (!res.metrics.empty()) {
    std::cout << ", final mean loss " << fmt(res.metrics.back().mean_loss);
  }
  std::cout << "\n";
}

struct EvalArgs {
  std::string game, checkpoint, out;
  std::string bounds = "exact";
  int holdout = 0;
  double shift = 1;
  std::uint64_t seed = 0;
  int max_states = 2'000'000;
};

void cmd_eval(const EvalArgs& a) {
  auto g = game_from_json(read_text_file(a.game));
  EnumeratedGame e = enumerate_game(*g, a.max_states);
  ExactTableBounds exact(e);
  SolveResult sol = solve(e);
  SpNash sp = sp_nash(e);

  json doc;
  doc["schema"] = "sefce-eval-v1";
  doc["game"] = g->name();
  doc["opt1"] = sol.opt1;
  doc["opt2"] = sol.opt2;
  doc["sp_value1"] = sp.value1;

  double r1 = sol.opt1;
  if (a.checkpoint.empty()) {
    // Self-evaluation of the exact solution.
    AuditReport rep = audit_ic(e, sol.profile, exact);
    doc["compliant"] = rep.compliant;
    doc["min_slack"] = rep.min_slack;
    doc["r1"] = sol.opt1;
    doc["r2"] = sol.opt2;
    doc["delta_opt"] = 0.0;
    doc["kappa"] = 1.0;
    doc["eps"] = 0.0;
  } else {
    Checkpoint c = checkpoint_from_bytes(read_text_file(a.checkpoint));
    if (c.feature_dim != g->feature_dim()) {
      throw shape_error("checkpoint feature width does not match the game");
    }
    EpfModel model(c.m, c.depth, c.width, c.feature_dim, 0);
    AdamState opt(model.online().total_size());
    restore_checkpoint(c, model, opt);

    std::unique_ptr<BoundsOracle> pol_bounds;
    if (a.bounds == "exact") {
      pol_bounds = std::make_unique<ExactTableBounds>(e);
    } else if (a.bounds == "approximate") {
      pol_bounds = make_bounds(*g, BoundsMode::kApproximate, a.max_states,
                               nullptr);
    } else {
      throw bad_parameter("bounds must be 'exact' or 'approximate'");
    }
    LookaheadPolicy pol = LookaheadPolicy::from_model(*g, *pol_bounds, model);
    StrategyProfile p = materialize(pol, e, exact);
    AuditReport rep = audit_ic(e, p, exact);
    auto [pr1, pr2] = expected_payoffs(e, p);
    r1 = pr1;
    double eps = measure_eps(model, e, *pol_bounds);
    BoundCheck bc = check_bound(e, sol.opt1, p, eps);
    doc["compliant"] = rep.compliant;
    doc["min_slack"] = rep.min_slack;
    doc["r1"] = pr1;
    doc["r2"] = pr2;
    doc["eps"] = eps;
    doc["bound"] = bc.bound;
    doc["bound_residual"] = bc.residual;
    doc["bound_ok"] = bc.ok;
    doc["delta_opt"] = sol.opt1 - pr1;
    if (std::abs(sol.opt1) > 1e-12) doc["kappa"] = pr1 / sol.opt1;
  }
  doc["delta_sp"] = r1 - sp.value1;

  if (auto* tg = dynamic_cast<const TantrumGame*>(g.get())) {
    TantrumGreedy greedy = greedy_tantrum(*tg);
    doc["greedy_r1"] = greedy.r1;
    if (std::abs(sol.opt1) > 1e-12) doc["greedy_kappa"] = greedy.r1 / sol.opt1;

    if (a.holdout > 0 && !a.checkpoint.empty()) {
      Checkpoint c = checkpoint_from_bytes(read_text_file(a.checkpoint));
      EpfModel model(c.m, c.depth, c.width, c.feature_dim, 0);
      AdamState opt(model.online().total_size());
      restore_checkpoint(c, model, opt);
      TantrumBoundsOracle closed;
      json held = json::array();
      double sum_kappa = 0, sum_greedy = 0;
      for (int i = 0; i < a.holdout; ++i) {
        auto [q1, q2] =
            sample_featurized_q(tg->stages(), a.shift,
                                a.seed + 1000003ULL * (i + 1));
        TantrumGame gi(tg->stages(), q1, q2, tg->featurized());
        EnumeratedGame ei = enumerate_game(gi);
        ExactTableBounds exi(ei);
        SolveResult soli = solve(ei);
        LookaheadPolicy poli = LookaheadPolicy::from_model(gi, closed, model);
        StrategyProfile pi = materialize(poli, ei, exi);
        auto [ri1, ri2] = expected_payoffs(ei, pi);
        TantrumGreedy gr = greedy_tantrum(gi);
        double kap = ri1 / soli.opt1;
        double gkap = gr.r1 / soli.opt1;
        sum_kappa += kap;
        sum_greedy += gkap;
        held.push_back(json{{"opt1", soli.opt1},
                            {"r1", ri1},
                            {"kappa", kap},
                            {"greedy_kappa", gkap}});
      }
      doc["holdout"] = std::move(held);
      doc["mean_kappa"] = sum_kappa / a.holdout;
      doc["greedy_mean_kappa"] = sum_greedy / a.holdout;
    }
  }

  fs::create_directories(a.out);
  write_text_file(fs::path(a.out) / "eval.json", doc.dump(2) + "\n");
  std::cout << "R1 " << fmt(doc["r1"].get<double>()) << " OPT1 "
            << fmt(sol.opt1) << " compliant "
            << (doc["compliant"].get<bool>() ? "yes" : "no") << "\n";
  if (doc.contains("mean_kappa")) {
    std::cout << "holdout mean kappa " << fmt(doc["mean_kappa"].get<double>())
              << " greedy " << fmt(doc["greedy_mean_kappa"].get<double>())
              << "\n";
  }
}

struct PlotArgs {
  std::vector<std::string> in;
  std::string out, title;
};

void cmd_plot(const PlotArgs& a) {
  std::vector<PlotSeries> series;
  for (const std::string& path : a.in) {
    Epf f = epf_from_csv(read_text_file(path));
    series.push_back({fs::path(path).stem().string(), f.knots()});
  }
  write_text_file(a.out, render_epf_svg(series, a.title));
  std::cout << "wrote " << a.out << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stackelberg frontier toolkit: exact solving, fitted-frontier "
               "training, certification, and plotting for two-player "
               "perfect-information game trees"};
  app.require_subcommand(1);

  GenArgs gen;
  CLI::App* cgen = app.add_subcommand(
      "gen-game", "Write a self-contained game document");
  cgen->add_option("--kind", gen.kind,
                   "fig1 | fig6 | promise | tantrum | rc")->required();
  cgen->add_option("--out", gen.out, "output file")->required();
  cgen->add_option("--seed", gen.seed, "generator seed");
  cgen->add_option("--k1", gen.k1, "outside-option leader payoff");
  cgen->add_option("--k2", gen.k2, "outside-option follower payoff");
  cgen->add_option("--eps", gen.eps, "promise-game margin");
  cgen->add_option("--n", gen.n, "stages (tantrum) or rounds (rc)");
  cgen->add_option("--q1", gen.q1, "tantrum per-stage gift");
  cgen->add_option("--q2", gen.q2, "tantrum per-stage cost");
  cgen->add_flag("--featurized", gen.featurized,
                 "sample tantrum stage vectors and expose features");
  cgen->add_option("--shift", gen.shift, "featurized sampling shift");
  cgen->add_option("--J", gen.grid, "grid side length (odd)");
  cgen->add_option("--length-scale", gen.length_scale, "map kernel scale");
  cgen->add_option("--sigma", gen.sigma, "map kernel magnitude");

  SolveArgs sv;
  CLI::App* csolve = app.add_subcommand(
      "solve", "Exact frontiers and an optimal commitment plan");
  csolve->add_option("--game", sv.game, "game document")->required();
  csolve->add_option("--out", sv.out, "output directory")->required();
  csolve->add_option("--mu2", sv.mu2, "root promise override");
  csolve->add_option("--max-states", sv.max_states, "enumeration budget");
  csolve->add_option("--epf-cap", sv.epf_cap,
                     "max states with per-state frontier dumps");

  TrainArgs tn;
  CLI::App* ctrain = app.add_subcommand(
      "train", "Fitted-frontier training to a checkpoint and metrics log");
  ctrain->add_option("--game", tn.game, "game document")->required();
  ctrain->add_option("--config", tn.config, "training config")->required();
  ctrain->add_option("--out", tn.out, "output directory")->required();
  ctrain->add_option("--seed", tn.seed, "config seed override");
  ctrain->add_option("--epochs", tn.epochs, "config epoch override");
  ctrain->add_option("--resume", tn.resume, "checkpoint to continue from");
  ctrain->add_option("--max-states", tn.max_states, "enumeration budget");

  EvalArgs ev;
  CLI::App* ceval = app.add_subcommand(
      "eval", "Audit a checkpoint or the exact solution on a game");
  ceval->add_option("--game", ev.game, "game document")->required();
  ceval->add_option("--out", ev.out, "output directory")->required();
  ceval->add_option("--checkpoint", ev.checkpoint, "trained parameters");
  ceval->add_option("--bounds", ev.bounds,
                    "windows for extraction: exact | approximate");
  ceval->add_option("--holdout", ev.holdout,
                    "held-out featurized instances to score");
  ceval->add_option("--shift", ev.shift, "holdout sampling shift");
  ceval->add_option("--seed", ev.seed, "holdout sampling seed");
  ceval->add_option("--max-states", ev.max_states, "enumeration budget");

  PlotArgs pl;
  CLI::App* cplot = app.add_subcommand(
      "plot", "Render frontier CSVs as a standalone SVG");
  cplot->add_option("--in", pl.in, "frontier CSV (repeatable)")->required();
  cplot->add_option("--out", pl.out, "output SVG file")->required();
  cplot->add_option("--title", pl.title, "chart title");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (cgen->parsed()) cmd_gen_game(gen);
    if (csolve->parsed()) cmd_solve(sv);
    if (ctrain->parsed()) cmd_train(tn);
    if (ceval->parsed()) cmd_eval(ev);
    if (cplot->parsed()) cmd_plot(pl);
  } catch (const config_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const too_large& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
