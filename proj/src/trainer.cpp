#include "sefce/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "sefce/errors.hpp"

namespace sefce {

void TrainConfig::validate() const {
  if (m < 2) throw bad_parameter("knot count must be at least 2");
  if (depth < 1 || width < 1) throw bad_parameter("network must have depth and width at least 1");
  if (batch < 1) throw bad_parameter("batch size must be positive");
  if (buffer_capacity < 1) throw bad_parameter("buffer capacity must be positive");
  if (!(lr > 0)) throw bad_parameter("step size must be positive");
  if (sync_period < 1) throw bad_parameter("sync period must be positive");
  if (alpha < 0 || alpha > 1) throw bad_parameter("priority exponent must lie in [0, 1]");
  if (trajectory_every < 1) throw bad_parameter("trajectory cadence must be positive");
  if (epochs < 0) throw bad_parameter("epoch budget must be non-negative");
  if (layered_start < 0) throw bad_parameter("layered start depth must be non-negative");
  if (layered_interval < 1) throw bad_parameter("layered interval must be positive");
  if (audit_sample < 1) throw bad_parameter("audit sample must be positive");
  if (metrics_every < 1) throw bad_parameter("metrics cadence must be positive");
}

Epf fit_to_window(const Epf& f, double lo, double hi) {
  if (f.empty()) throw empty_epf();
  if (hi < lo) throw bad_parameter("window must be a non-empty interval");

  // Window disjoint from the domain: hold the nearest endpoint value flat.
  if (lo > f.x_max() + kTol || hi < f.x_min() - kTol) {
    double v = lo > f.x_max() ? f.knots().back().y : f.knots().front().y;
    if (hi - lo <= kTol) return make_epf({{lo, v}});
    return make_epf({{lo, v}, {hi, v}});
  }

  Epf cur = f;
  if (auto t = truncate(cur, lo)) cur = std::move(*t);
  if (auto t = truncate_above(cur, hi)) cur = std::move(*t);

  std::vector<Knot> ks = cur.knots();
  if (ks.front().x > lo) {
    double s = ks.size() > 1
                   ? (ks[1].y - ks[0].y) / (ks[1].x - ks[0].x)
                   : 0.0;
    ks.insert(ks.begin(), {lo, ks.front().y + s * (lo - ks.front().x)});
  }
  if (ks.back().x < hi) {
    std::size_t n = ks.size();
    double s = n > 1 ? (ks[n - 1].y - ks[n - 2].y) / (ks[n - 1].x - ks[n - 2].x)
                     : 0.0;
    ks.push_back({hi, ks.back().y + s * (hi - ks.back().x)});
  }
  return make_epf(std::move(ks));
}

Lookahead lookahead_target(const EpfModel& model, const GameTree& g,
                           BoundsOracle& b, const GameState& s,
                           bool use_target) {
  int n = g.num_actions(s);
  if (n == 0) throw bad_parameter("a leaf has no backup");

  auto child_epf = [&](const GameState& c) -> Epf {
    if (g.owner(c) == Owner::kLeaf) {
      auto [r1, r2] = g.leaf_payoff(c);
      return make_epf({{r2, r1}});
    }
    auto [clo, chi] = b.bounds(g, c);
    return model.predict(g.features(c), clo, chi, use_target);
  };

  Lookahead out;
  Owner o = g.owner(s);
  if (o == Owner::kFollower) {
    std::vector<double> taus = b.taus(g, s);
    std::vector<Epf> raw(n);
    std::vector<double> lows(n);
    std::vector<Epf> present;
    for (int a = 0; a < n; ++a) {
      GameState c = g.child(s, a);
      raw[a] = child_epf(c);
      lows[a] = b.bounds(g, c).first;
      if (auto t = truncate(raw[a], taus[a])) present.push_back(std::move(*t));
    }
    if (present.empty()) {
      // Heuristic thresholds overshot every predicted domain; keep the
      // child backed by the strongest punishment so the backup stays
      // defined. Exact windows cannot reach here.
      out.wipeout = true;
      int best = static_cast<int>(
          std::max_element(lows.begin(), lows.end()) - lows.begin());
      present.push_back(raw[best]);
    }
    out.target = envelope(present);
  } else if (o == Owner::kLeader) {
    std::vector<Epf> fs;
    fs.reserve(n);
    for (int a = 0; a < n; ++a) fs.push_back(child_epf(g.child(s, a)));
    out.target = envelope(fs);
  } else if (o == Owner::kChance) {
    std::vector<Epf> fs;
    std::vector<double> ps(n);
    fs.reserve(n);
    for (int a = 0; a < n; ++a) {
      ps[a] = g.chance_prob(s, a);
      fs.push_back(child_epf(g.child(s, a)));
    }
    out.target = max_convolve(ps, fs);
  } else {
    throw bad_parameter("a leaf has no backup");
  }

  auto [lo, hi] = b.bounds(g, s);
  out.target = decreasing_part(fit_to_window(out.target, lo, hi));
  return out;
}

std::pair<double, std::vector<double>> compute_loss(
    const EpfModel& model, const GameTree& g, BoundsOracle& b,
    std::span<const GameState> batch, LossKind kind) {
  if (batch.empty()) throw bad_parameter("loss needs a non-empty batch");
  double total = 0;
  std::vector<double> per(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    auto [lo, hi] = b.bounds(g, batch[i]);
    Epf pred =
        decreasing_part(model.predict(g.features(batch[i]), lo, hi, false));
    Epf target = lookahead_target(model, g, b, batch[i], true).target;
    per[i] = kind == LossKind::kKnotSq ? knot_sq_loss(pred, target)
                                       : integral_sq_loss(pred, target);
    total += per[i];
  }
  return {total, std::move(per)};
}

std::vector<GameState> sample_trajectory(const GameTree& g, rng& r) {
  std::vector<GameState> out;
  GameState s = g.root();
  while (g.owner(s) != Owner::kLeaf) {
    out.push_back(s);
    int n = g.num_actions(s);
    int a;
    if (g.owner(s) == Owner::kChance) {
      double u = r.uniform();
      double acc = 0;
      a = n - 1;
      for (int i = 0; i < n; ++i) {
        acc += g.chance_prob(s, i);
        if (u < acc) {
          a = i;
          break;
        }
      }
    } else {
      a = static_cast<int>(r.uniform_int(n));
    }
    s = g.child(s, a);
  }
  out.push_back(s);
  return out;
}

double measure_eps(const EpfModel& model, const EnumeratedGame& e,
                   BoundsOracle& b) {
  double eps = 0;
  for (int id = 0; id < e.num_states(); ++id) {
    if (e.is_leaf(id)) continue;
    const GameState& s = e.states[id];
    auto [lo, hi] = b.bounds(*e.game, s);
    Epf pred =
        decreasing_part(model.predict(e.game->features(s), lo, hi, false));
    Epf back = lookahead_target(model, *e.game, b, s, false).target;
    eps = std::max(eps, linf_distance(pred, back));
  }
  return eps;
}

ReplayBuffer::ReplayBuffer(std::int64_t capacity, double alpha)
    : capacity_(capacity), alpha_(alpha) {
  if (capacity < 1) throw bad_parameter("buffer capacity must be positive");
  if (alpha < 0 || alpha > 1) throw bad_parameter("priority exponent must lie in [0, 1]");
  fenwick_.assign(static_cast<std::size_t>(capacity) + 1, 0.0);
  weights_.assign(static_cast<std::size_t>(capacity), 0.0);
}

void ReplayBuffer::set_weight(int idx, double w) {
  double delta = w - weights_[idx];
  weights_[idx] = w;
  total_weight_ += delta;
  for (int i = idx + 1; i < static_cast<int>(fenwick_.size()); i += i & -i) {
    fenwick_[i] += delta;
  }
}

void ReplayBuffer::add(ReplayEntry e) {
  double w = std::pow(std::max(e.priority, 1e-8), alpha_);
  int idx;
  if (static_cast<std::int64_t>(entries_.size()) < capacity_) {
    idx = static_cast<int>(entries_.size());
    entries_.push_back(std::move(e));
  } else {
    idx = static_cast<int>(cursor_);
    cursor_ = (cursor_ + 1) % capacity_;
    entries_[idx] = std::move(e);
  }
  set_weight(idx, w);
}

int ReplayBuffer::sample(rng& r) const {
  if (entries_.empty()) throw bad_parameter("cannot sample an empty buffer");
  double rem = r.uniform() * total_weight_;
  int idx = 0;
  int mask = 1;
  while (mask * 2 < static_cast<int>(fenwick_.size())) mask *= 2;
  for (int pw = mask; pw > 0; pw >>= 1) {
    int nxt = idx + pw;
    if (nxt < static_cast<int>(fenwick_.size()) && fenwick_[nxt] <= rem) {
      rem -= fenwick_[nxt];
      idx = nxt;
    }
  }
  return std::min(idx, static_cast<int>(entries_.size()) - 1);
}

void ReplayBuffer::set_priority(int idx, double priority) {
  entries_[idx].priority = priority;
  set_weight(idx, std::pow(std::max(priority, 1e-8), alpha_));
}

Trainer::Trainer(InstanceSource& src, EpfModel& model, const TrainConfig& cfg)
    : src_(&src),
      model_(&model),
      cfg_(cfg),
      buffer_(cfg.buffer_capacity, cfg.alpha),
      opt_(model.online().total_size()) {
  cfg_.validate();
  if (src.count() < 1) throw bad_parameter("trainer needs at least one instance");
  if (model.m() != cfg.m || model.depth() != cfg.depth ||
      model.width() != cfg.width) {
    throw bad_parameter("model shape does not match the training config");
  }
  TrainInstance first = src_->at(0);
  if (model.feature_dim() != first.game->feature_dim()) {
    throw shape_error("model feature width does not match the game");
  }
  enum_cache_.resize(src.count());
}

int Trainer::depth_threshold(std::int64_t epoch) const {
  if (cfg_.mode != SampleMode::kLayered) return 0;
  std::int64_t steps = epoch / cfg_.layered_interval;
  return static_cast<int>(
      std::max<std::int64_t>(0, cfg_.layered_start - steps));
}

const EnumeratedGame& Trainer::enumerated(int instance) {
  auto& slot = enum_cache_[instance];
  if (!slot) slot = enumerate_game(*src_->at(instance).game);
  return *slot;
}

void Trainer::admit_states(std::int64_t epoch) {
  rng r = derive_stream(cfg_.seed, "admit",
                        static_cast<std::uint64_t>(admissions_++));
  int inst = src_->draw(r);
  TrainInstance ti = src_->at(inst);

  if (cfg_.mode == SampleMode::kUniformState) {
    const EnumeratedGame& e = enumerated(inst);
    int id;
    do {
      id = static_cast<int>(r.uniform_int(e.num_states()));
    } while (e.is_leaf(id));
    std::vector<int> path;
    for (int c = id; e.parent[c] >= 0; c = e.parent[c]) {
      path.push_back(e.parent_action[c]);
    }
    std::reverse(path.begin(), path.end());
    buffer_.add({inst, std::move(path), e.depth[id], 1.0});
    return;
  }

  int thr = depth_threshold(epoch);
  const GameTree& g = *ti.game;
  GameState s = g.root();
  std::vector<int> path;
  while (g.owner(s) != Owner::kLeaf) {
    if (static_cast<int>(path.size()) >= thr) {
      buffer_.add({inst, path, static_cast<int>(path.size()), 1.0});
    }
    int n = g.num_actions(s);
    int a;
    if (g.owner(s) == Owner::kChance) {
      double u = r.uniform();
      double acc = 0;
      a = n - 1;
      for (int i = 0; i < n; ++i) {
        acc += g.chance_prob(s, i);
        if (u < acc) {
          a = i;
          break;
        }
      }
    } else {
      a = static_cast<int>(r.uniform_int(n));
    }
    path.push_back(a);
    s = g.child(s, a);
  }
}

std::pair<double, std::vector<double>> Trainer::train_step() {
  if (buffer_.empty()) throw bad_parameter("train_step on an empty buffer");
  rng r = derive_stream(cfg_.seed, "batch",
                        static_cast<std::uint64_t>(steps_done_));
  NetParams grad =
      NetParams::zeros(cfg_.m, cfg_.depth, cfg_.width, model_->feature_dim());
  int n = cfg_.batch;
  double total = 0;
  std::vector<double> per(n);
  std::vector<int> picked(n);
  for (int k = 0; k < n; ++k) {
    int idx = buffer_.sample(r);
    picked[k] = idx;
    const ReplayEntry& ent = buffer_.at(idx);
    TrainInstance ti = src_->at(ent.instance);
    GameState s = ti.game->state_at(ent.path);
    auto [lo, hi] = ti.bounds->bounds(*ti.game, s);
    ForwardTrace tr = model_->trace(ti.game->features(s), lo, hi, false);
    Lookahead la = lookahead_target(*model_, *ti.game, *ti.bounds, s, true);
    if (la.wipeout) ++wipeouts_;
    per[k] = state_backward(tr, model_->online(), la.target, cfg_.loss, grad);
    total += per[k];
  }
  adam_update(model_->online(), grad, opt_, cfg_.lr);
  for (int k = 0; k < n; ++k) buffer_.set_priority(picked[k], per[k]);
  ++steps_done_;
  return {total, std::move(per)};
}

double Trainer::audit_eps(int sample, std::int64_t epoch) {
  if (buffer_.empty()) return 0;
  rng r = derive_stream(cfg_.seed, "audit", static_cast<std::uint64_t>(epoch));
  double eps = 0;
  for (int k = 0; k < sample; ++k) {
    int idx = static_cast<int>(r.uniform_int(buffer_.size()));
    const ReplayEntry& ent = buffer_.at(idx);
    TrainInstance ti = src_->at(ent.instance);
    GameState s = ti.game->state_at(ent.path);
    auto [lo, hi] = ti.bounds->bounds(*ti.game, s);
    Epf pred = decreasing_part(
        model_->predict(ti.game->features(s), lo, hi, false));
    Epf back = lookahead_target(*model_, *ti.game, *ti.bounds, s, false).target;
    eps = std::max(eps, linf_distance(pred, back));
  }
  return eps;
}

TrainResult Trainer::run(std::int64_t start_epoch) {
  TrainResult res;
  std::int64_t wipe_mark = wipeouts_;
  for (std::int64_t i = 0; i < cfg_.epochs; ++i) {
    std::int64_t e = start_epoch + i;
    if (i == 0 || e % cfg_.trajectory_every == 0) admit_states(e);
    // A high layered threshold can reject whole trajectories; keep walking
    // until something is admitted so the first step has data.
    for (int guard = 0; buffer_.empty(); ++guard) {
      if (guard >= 1000) throw numerical_error("replay admission starved");
      admit_states(e);
    }
    auto [total, per] = train_step();
    if ((e + 1) % cfg_.sync_period == 0) model_->sync_target();
    if ((e + 1) % cfg_.metrics_every == 0 || i + 1 == cfg_.epochs) {
      TrainMetricsRow row;
      row.epoch = e;
      row.total_loss = total;
      row.mean_loss = total / static_cast<double>(per.size());
      row.eps_audit = audit_eps(cfg_.audit_sample, e);
      if (wipeouts_ > wipe_mark) {
        row.notes = "wipeouts=" + std::to_string(wipeouts_ - wipe_mark);
        wipe_mark = wipeouts_;
      }
      res.metrics.push_back(std::move(row));
    }
    res.epochs_done = i + 1;
  }
  res.wipeouts = wipeouts_;
  return res;
}

}  // namespace sefce
