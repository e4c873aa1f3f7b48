#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sefce/bounds.hpp"
#include "sefce/game.hpp"
#include "sefce/net.hpp"
#include "sefce/rng.hpp"

namespace sefce {

enum class SampleMode { kUniformTrajectory, kUniformState, kLayered };
enum class BoundsMode { kExact, kApproximate };

/// Hyperparameters for fitted-frontier training. Defaults target the large
/// benchmarks; tests shrink them.
struct TrainConfig {
  int m = 8;
  int depth = 8;
  int width = 128;
  int batch = 128;
  std::int64_t buffer_capacity = 1'000'000;
  double lr = 1e-5;
  std::int64_t sync_period = 2000;
  double alpha = 0.5;            // priority exponent
  std::int64_t trajectory_every = 10;
  std::int64_t epochs = 0;
  SampleMode mode = SampleMode::kUniformTrajectory;
  BoundsMode bounds_mode = BoundsMode::kExact;
  LossKind loss = LossKind::kKnotSq;
  int layered_start = 0;             // initial minimum admission depth
  std::int64_t layered_interval = 1000;  // epochs per threshold decrement
  std::uint64_t seed = 0;
  int audit_sample = 64;             // states per eps audit
  std::int64_t metrics_every = 100;  // epochs per metrics row

  void validate() const;  // throws bad_parameter on out-of-range fields
};

/// One training instance: a game plus the payoff-window oracle to train
/// against. The oracle must outlive the trainer.
struct TrainInstance {
  const GameTree* game = nullptr;
  BoundsOracle* bounds = nullptr;
};

/// Source of training instances. Single-game training uses one fixed
/// instance; parameterized families (featurized tantrum) pre-sample a pool
/// and draw an instance per trajectory.
class InstanceSource {
 public:
  virtual ~InstanceSource() = default;
  virtual int count() const = 0;
  virtual TrainInstance at(int id) = 0;
  virtual int draw(rng& r) = 0;
};

class SingleInstance : public InstanceSource {
 public:
  SingleInstance(const GameTree& g, BoundsOracle& b) : inst_{&g, &b} {}
  int count() const override { return 1; }
  TrainInstance at(int) override { return inst_; }
  int draw(rng&) override { return 0; }

 private:
  TrainInstance inst_;
};

/// Owning pool drawn uniformly per trajectory; all games must share a
/// feature dimension so one model covers the family.
class PoolInstanceSource : public InstanceSource {
 public:
  void add(std::unique_ptr<GameTree> g, std::unique_ptr<BoundsOracle> b) {
    games_.push_back(std::move(g));
    oracles_.push_back(std::move(b));
  }
  int count() const override { return static_cast<int>(games_.size()); }
  TrainInstance at(int id) override {
    return {games_[id].get(), oracles_[id].get()};
  }
  int draw(rng& r) override { return r.uniform_int(count()); }

 private:
  std::vector<std::unique_ptr<GameTree>> games_;
  std::vector<std::unique_ptr<BoundsOracle>> oracles_;
};

/// Clamps a frontier onto exactly [lo, hi]: the overlap is kept and the
/// boundary segments are extended linearly to reach the window edges; a
/// window disjoint from the domain degenerates to the nearest endpoint
/// value held flat. With exact windows this is the identity; heuristic
/// windows need it because the window of a state and the span of its
/// backed-up children can disagree.
Epf fit_to_window(const Epf& f, double lo, double hi);

/// One-step backup of a non-leaf state from predicted child frontiers
/// (leaf children contribute their exact payoff points), clamped to the
/// state's window and reduced to its decreasing part. `wipeout` marks the
/// approximate-mode fallback where every child truncated to absent and the
/// best-punishment child was used untruncated.
struct Lookahead {
  Epf target;
  bool wipeout = false;
};
Lookahead lookahead_target(const EpfModel& model, const GameTree& g,
                           BoundsOracle& b, const GameState& s,
                           bool use_target = true);

/// Sum and per-state values of the training loss between the online
/// prediction and the frozen-target lookahead, both reduced to decreasing
/// parts. Batch must be non-empty and hold non-leaf states.
std::pair<double, std::vector<double>> compute_loss(
    const EpfModel& model, const GameTree& g, BoundsOracle& b,
    std::span<const GameState> batch, LossKind kind = LossKind::kKnotSq);

/// Root-to-leaf walk choosing uniformly at decision states and by the
/// chance distribution at chance states. Returns every state on the walk,
/// leaf included.
std::vector<GameState> sample_trajectory(const GameTree& g, rng& r);

/// Worst one-step inconsistency of the online model over all non-leaf
/// states of an enumerable game: max of linf_distance between the online
/// prediction and the online lookahead backup, both decreasing parts. This
/// is the certified epsilon of the payoff bound.
double measure_eps(const EpfModel& model, const EnumeratedGame& e,
                   BoundsOracle& b);

/// Replay entry: a state addressed by its action path from the root, so
/// lazy games never hold materialized states.
struct ReplayEntry {
  int instance = 0;
  std::vector<int> path;
  int depth = 0;
  double priority = 1.0;
};

/// Fixed-capacity ring with prioritized sampling: P(i) proportional to
/// priority_i^alpha, maintained in a Fenwick tree for log-time updates.
class ReplayBuffer {
 public:
  ReplayBuffer(std::int64_t capacity, double alpha);

  int size() const { return static_cast<int>(entries_.size()); }
  bool empty() const { return entries_.empty(); }
  void add(ReplayEntry e);
  int sample(rng& r) const;
  void set_priority(int idx, double priority);
  const ReplayEntry& at(int idx) const { return entries_[idx]; }

 private:
  void set_weight(int idx, double w);

  std::int64_t capacity_;
  double alpha_;
  std::int64_t cursor_ = 0;  // ring replacement position
  std::vector<ReplayEntry> entries_;
  std::vector<double> fenwick_;
  std::vector<double> weights_;
  double total_weight_ = 0;
};

struct TrainMetricsRow {
  std::int64_t epoch = 0;
  double total_loss = 0;
  double mean_loss = 0;
  double eps_audit = 0;
  std::string notes;
};

struct TrainResult {
  std::vector<TrainMetricsRow> metrics;
  std::int64_t epochs_done = 0;
  std::int64_t wipeouts = 0;
};

/// Fitted-frontier training loop: trajectories feed the replay buffer, each
/// epoch draws a prioritized batch, updates the online parameters against
/// frozen-target backups, refreshes priorities with the new per-state
/// losses, and copies online to target every sync period. Deterministic
/// given (config, seed, start_epoch).
class Trainer {
 public:
  Trainer(InstanceSource& src, EpfModel& model, const TrainConfig& cfg);

  TrainResult run(std::int64_t start_epoch = 0);

  /// One optimization step against the current buffer; returns (total,
  /// per-state) losses of the sampled batch. Buffer must be non-empty.
  /// Randomness is keyed on the running step counter, so a resumed run
  /// draws the same batches a continuous run would.
  std::pair<double, std::vector<double>> train_step();

  void admit_states(std::int64_t epoch);  // trajectory or uniform admission

  ReplayBuffer& buffer() { return buffer_; }
  AdamState& opt() { return opt_; }
  EpfModel& model() { return *model_; }
  std::int64_t wipeouts() const { return wipeouts_; }
  std::int64_t steps_done() const { return steps_done_; }
  void set_steps_done(std::int64_t n) { steps_done_ = n; }

  /// Minimum admission depth active at the given epoch (layered mode).
  int depth_threshold(std::int64_t epoch) const;

  double audit_eps(int sample, std::int64_t epoch);  // max one-step gap

 private:
  const EnumeratedGame& enumerated(int instance);

  InstanceSource* src_;
  EpfModel* model_;
  TrainConfig cfg_;
  ReplayBuffer buffer_;
  AdamState opt_;
  std::int64_t steps_done_ = 0;
  std::int64_t admissions_ = 0;
  std::int64_t wipeouts_ = 0;
  std::vector<std::optional<EnumeratedGame>> enum_cache_;
};

}  // namespace sefce
