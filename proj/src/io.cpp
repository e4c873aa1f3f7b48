#include "sefce/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "sefce/bounds.hpp"
#include "sefce/errors.hpp"
#include "sefce/games.hpp"

namespace sefce {

namespace {

using nlohmann::json;

constexpr const char* kGameSchema = "sefce-game-v1";
constexpr const char* kTrainSchema = "sefce-train-v1";
constexpr const char* kSolveSchema = "sefce-solve-v1";
constexpr const char* kCheckpointMagic = "sefce-checkpoint-v1";

std::string owner_name(Owner o) {
  switch (o) {
    case Owner::kLeader: return "leader";
    case Owner::kFollower: return "follower";
    case Owner::kChance: return "chance";
    case Owner::kLeaf: return "leaf";
  }
  throw parse_error("unknown owner");
}

Owner owner_from_name(const std::string& s) {
  if (s == "leader") return Owner::kLeader;
  if (s == "follower") return Owner::kFollower;
  if (s == "chance") return Owner::kChance;
  if (s == "leaf") return Owner::kLeaf;
  throw parse_error("unknown owner '" + s + "'");
}

json vec_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vec_from_json(const json& a) {
  if (!a.is_array()) throw parse_error("expected an array of numbers");
  Eigen::VectorXd v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

json mat_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd mat_from_json(const json& rows) {
  if (!rows.is_array() || rows.empty()) throw parse_error("expected a matrix");
  Eigen::Index nr = static_cast<Eigen::Index>(rows.size());
  Eigen::Index nc = static_cast<Eigen::Index>(rows[0].size());
  Eigen::MatrixXd m(nr, nc);
  for (Eigen::Index i = 0; i < nr; ++i) {
    const json& row = rows[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(row.size()) != nc) {
      throw parse_error("ragged matrix rows");
    }
    for (Eigen::Index j = 0; j < nc; ++j) m(i, j) = row[static_cast<std::size_t>(j)].get<double>();
  }
  return m;
}

json knots_to_json(const Epf& f) {
  json a = json::array();
  for (const Knot& k : f.knots()) a.push_back(json::array({k.x, k.y}));
  return a;
}

/// Wraps json access so malformed documents surface as parse_error with
/// context instead of nlohmann's type exceptions.
template <typename F>
auto parse_guard(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw parse_error(std::string(what) + ": " + e.what());
  }
}

void append_le_double(std::string& out, double d) {
  auto bits = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
  }
}

double read_le_double(const std::string& bytes, std::size_t off) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) {
    bits |= static_cast<std::uint64_t>(
                static_cast<unsigned char>(bytes[off + i]))
            << (8 * i);
  }
  return std::bit_cast<double>(bits);
}

double parse_double_field(const std::string& s, const char* what) {
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw parse_error(std::string("bad number in ") + what + ": '" + s + "'");
  }
  return v;
}

std::int64_t parse_int_field(const std::string& s, const char* what) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw parse_error(std::string("bad integer in ") + what + ": '" + s + "'");
  }
  return v;
}

/// Shortest decimal that round-trips the double, so serialized numbers are
/// byte-stable across save/load cycles.
std::string fmt_double(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

}  // namespace

std::string game_to_json(const GameTree& g) {
  json doc;
  doc["schema"] = kGameSchema;
  if (auto* eg = dynamic_cast<const ExplicitGame*>(&g)) {
    doc["kind"] = "explicit";
    doc["name"] = eg->name();
    json nodes = json::array();
    for (const ExplicitNode& n : eg->nodes()) {
      json jn;
      jn["owner"] = owner_name(n.owner);
      if (n.owner == Owner::kLeaf) {
        jn["r1"] = n.r1;
        jn["r2"] = n.r2;
      } else {
        jn["children"] = n.children;
        if (n.owner == Owner::kChance) jn["probs"] = n.probs;
        if (!n.labels.empty()) jn["labels"] = n.labels;
      }
      if (!n.features.empty()) jn["features"] = n.features;
      nodes.push_back(std::move(jn));
    }
    doc["nodes"] = std::move(nodes);
  } else if (auto* tg = dynamic_cast<const TantrumGame*>(&g)) {
    doc["kind"] = "tantrum";
    doc["n"] = tg->stages();
    doc["q1"] = vec_to_json(tg->q1());
    doc["q2"] = vec_to_json(tg->q2());
    doc["featurized"] = tg->featurized();
  } else if (auto* rg = dynamic_cast<const RcGame*>(&g)) {
    doc["kind"] = "rc";
    doc["J"] = rg->side();
    doc["n"] = rg->rounds();
    doc["r1_map"] = mat_to_json(rg->r1_map());
    doc["r2_map"] = mat_to_json(rg->r2_map());
  } else {
    throw bad_parameter("game kind '" + g.name() + "' has no document form");
  }
  return doc.dump(2) + "\n";
}

std::unique_ptr<GameTree> game_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw parse_error(std::string("game document: ") + e.what());
  }
  return parse_guard("game document", [&]() -> std::unique_ptr<GameTree> {
    if (!doc.contains("schema") || doc["schema"] != kGameSchema) {
      throw parse_error("game document schema must be 'sefce-game-v1'");
    }
    std::string kind = doc.at("kind").get<std::string>();
    if (kind == "explicit") {
      std::vector<ExplicitNode> nodes;
      for (const json& jn : doc.at("nodes")) {
        ExplicitNode n;
        n.owner = owner_from_name(jn.at("owner").get<std::string>());
        if (n.owner == Owner::kLeaf) {
          n.r1 = jn.at("r1").get<double>();
          n.r2 = jn.at("r2").get<double>();
        } else {
          n.children = jn.at("children").get<std::vector<int>>();
          if (n.owner == Owner::kChance) {
            n.probs = jn.at("probs").get<std::vector<double>>();
          }
          if (jn.contains("labels")) {
            n.labels = jn.at("labels").get<std::vector<std::string>>();
          }
        }
        if (jn.contains("features")) {
          n.features = jn.at("features").get<std::vector<double>>();
        }
        nodes.push_back(std::move(n));
      }
      return std::make_unique<ExplicitGame>(
          doc.at("name").get<std::string>(), std::move(nodes));
    }
    if (kind == "tantrum") {
      return std::make_unique<TantrumGame>(
          doc.at("n").get<int>(), vec_from_json(doc.at("q1")),
          vec_from_json(doc.at("q2")), doc.at("featurized").get<bool>());
    }
    if (kind == "rc") {
      return std::make_unique<RcGame>(
          doc.at("J").get<int>(), doc.at("n").get<int>(),
          mat_from_json(doc.at("r1_map")), mat_from_json(doc.at("r2_map")));
    }
    throw parse_error("unknown game kind '" + kind + "'");
  });
}

std::string train_config_to_json(const TrainConfig& cfg) {
  json doc;
  doc["schema"] = kTrainSchema;
  doc["m"] = cfg.m;
  doc["depth"] = cfg.depth;
  doc["width"] = cfg.width;
  doc["batch"] = cfg.batch;
  doc["buffer_capacity"] = cfg.buffer_capacity;
  doc["lr"] = cfg.lr;
  doc["sync_period"] = cfg.sync_period;
  doc["alpha"] = cfg.alpha;
  doc["trajectory_every"] = cfg.trajectory_every;
  doc["epochs"] = cfg.epochs;
  doc["mode"] = cfg.mode == SampleMode::kUniformTrajectory ? "trajectory"
                : cfg.mode == SampleMode::kUniformState    ? "state"
                                                           : "layered";
  doc["bounds_mode"] =
      cfg.bounds_mode == BoundsMode::kExact ? "exact" : "approximate";
  doc["loss"] = cfg.loss == LossKind::kKnotSq ? "knot_sq" : "integral_sq";
  doc["layered_start"] = cfg.layered_start;
  doc["layered_interval"] = cfg.layered_interval;
  doc["seed"] = cfg.seed;
  doc["audit_sample"] = cfg.audit_sample;
  doc["metrics_every"] = cfg.metrics_every;
  return doc.dump(2) + "\n";
}

TrainConfig train_config_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw parse_error(std::string("training config: ") + e.what());
  }
  return parse_guard("training config", [&]() -> TrainConfig {
    if (!doc.is_object() || !doc.contains("schema") ||
        doc["schema"] != kTrainSchema) {
      throw parse_error("training config schema must be 'sefce-train-v1'");
    }
    TrainConfig cfg;
    for (const auto& [key, val] : doc.items()) {
      if (key == "schema") continue;
      if (key == "m") cfg.m = val.get<int>();
      else if (key == "depth") cfg.depth = val.get<int>();
      else if (key == "width") cfg.width = val.get<int>();
      else if (key == "batch") cfg.batch = val.get<int>();
      else if (key == "buffer_capacity") cfg.buffer_capacity = val.get<std::int64_t>();
      else if (key == "lr") cfg.lr = val.get<double>();
      else if (key == "sync_period") cfg.sync_period = val.get<std::int64_t>();
      else if (key == "alpha") cfg.alpha = val.get<double>();
      else if (key == "trajectory_every") cfg.trajectory_every = val.get<std::int64_t>();
      else if (key == "epochs") cfg.epochs = val.get<std::int64_t>();
      else if (key == "layered_start") cfg.layered_start = val.get<int>();
      else if (key == "layered_interval") cfg.layered_interval = val.get<std::int64_t>();
      else if (key == "seed") cfg.seed = val.get<std::uint64_t>();
      else if (key == "audit_sample") cfg.audit_sample = val.get<int>();
      else if (key == "metrics_every") cfg.metrics_every = val.get<std::int64_t>();
      else if (key == "mode") {
        std::string v = val.get<std::string>();
        if (v == "trajectory") cfg.mode = SampleMode::kUniformTrajectory;
        else if (v == "state") cfg.mode = SampleMode::kUniformState;
        else if (v == "layered") cfg.mode = SampleMode::kLayered;
        else throw parse_error("unknown sampling mode '" + v + "'");
      } else if (key == "bounds_mode") {
        std::string v = val.get<std::string>();
        if (v == "exact") cfg.bounds_mode = BoundsMode::kExact;
        else if (v == "approximate") cfg.bounds_mode = BoundsMode::kApproximate;
        else throw parse_error("unknown bounds mode '" + v + "'");
      } else if (key == "loss") {
        std::string v = val.get<std::string>();
        if (v == "knot_sq") cfg.loss = LossKind::kKnotSq;
        else if (v == "integral_sq") cfg.loss = LossKind::kIntegralSq;
        else throw parse_error("unknown loss '" + v + "'");
      } else {
        throw parse_error("unknown training config key '" + key + "'");
      }
    }
    cfg.validate();
    return cfg;
  });
}

Checkpoint make_checkpoint(const EpfModel& model, const AdamState& opt,
                           std::int64_t epoch) {
  Checkpoint c;
  c.m = model.m();
  c.depth = model.depth();
  c.width = model.width();
  c.feature_dim = model.feature_dim();
  c.online = model.online().flatten();
  c.target = model.target().flatten();
  c.opt_m = opt.m;
  c.opt_v = opt.v;
  c.opt_vmax = opt.vmax;
  c.opt_step = opt.step;
  c.epoch = epoch;
  return c;
}

void restore_checkpoint(const Checkpoint& c, EpfModel& model, AdamState& opt) {
  if (model.m() != c.m || model.depth() != c.depth ||
      model.width() != c.width || model.feature_dim() != c.feature_dim) {
    throw shape_error("checkpoint shape does not match the model");
  }
  if (c.online.size() != model.online().total_size() ||
      c.target.size() != c.online.size() || c.opt_m.size() != c.online.size() ||
      c.opt_v.size() != c.online.size() ||
      c.opt_vmax.size() != c.online.size()) {
    throw shape_error("checkpoint vector sizes are inconsistent");
  }
  model.online().unflatten(c.online);
  model.target().unflatten(c.target);
  opt.m = c.opt_m;
  opt.v = c.opt_v;
  opt.vmax = c.opt_vmax;
  opt.step = c.opt_step;
}

std::string checkpoint_to_bytes(const Checkpoint& c) {
  std::string out;
  out += kCheckpointMagic;
  out += "\n";
  out += "m " + std::to_string(c.m) + "\n";
  out += "depth " + std::to_string(c.depth) + "\n";
  out += "width " + std::to_string(c.width) + "\n";
  out += "feature_dim " + std::to_string(c.feature_dim) + "\n";
  out += "opt_step " + std::to_string(c.opt_step) + "\n";
  out += "epoch " + std::to_string(c.epoch) + "\n";
  std::int64_t n = c.online.size();
  out += "params " + std::to_string(n) + "\n";
  out += "blob\n";
  out.reserve(out.size() + static_cast<std::size_t>(5 * n) * 8);
  for (const Eigen::VectorXd* v :
       {&c.online, &c.target, &c.opt_m, &c.opt_v, &c.opt_vmax}) {
    if (v->size() != n) throw shape_error("checkpoint vector sizes differ");
    for (Eigen::Index i = 0; i < n; ++i) append_le_double(out, (*v)[i]);
  }
  return out;
}

Checkpoint checkpoint_from_bytes(const std::string& bytes) {
  std::size_t pos = 0;
  auto next_line = [&]() -> std::string {
    std::size_t nl = bytes.find('\n', pos);
    if (nl == std::string::npos) throw parse_error("truncated checkpoint header");
    std::string line = bytes.substr(pos, nl - pos);
    pos = nl + 1;
    return line;
  };
  if (next_line() != kCheckpointMagic) {
    throw parse_error("checkpoint header must start with 'sefce-checkpoint-v1'");
  }
  Checkpoint c;
  std::int64_t n = -1;
  for (;;) {
    std::string line = next_line();
    if (line == "blob") break;
    std::size_t sp = line.find(' ');
    if (sp == std::string::npos) throw parse_error("bad checkpoint header line '" + line + "'");
    std::string key = line.substr(0, sp);
    std::string val = line.substr(sp + 1);
    if (key == "m") c.m = static_cast<int>(parse_int_field(val, "checkpoint m"));
    else if (key == "depth") c.depth = static_cast<int>(parse_int_field(val, "checkpoint depth"));
    else if (key == "width") c.width = static_cast<int>(parse_int_field(val, "checkpoint width"));
    else if (key == "feature_dim") c.feature_dim = static_cast<int>(parse_int_field(val, "checkpoint feature_dim"));
    else if (key == "opt_step") c.opt_step = parse_int_field(val, "checkpoint opt_step");
    else if (key == "epoch") c.epoch = parse_int_field(val, "checkpoint epoch");
    else if (key == "params") n = parse_int_field(val, "checkpoint params");
    else throw parse_error("unknown checkpoint header key '" + key + "'");
  }
  if (n < 0) throw parse_error("checkpoint header is missing the params count");
  if (bytes.size() - pos != static_cast<std::size_t>(5 * n) * 8) {
    throw parse_error("checkpoint blob size does not match the header");
  }
  for (Eigen::VectorXd* v :
       {&c.online, &c.target, &c.opt_m, &c.opt_v, &c.opt_vmax}) {
    v->resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      (*v)[i] = read_le_double(bytes, pos);
      pos += 8;
    }
  }
  return c;
}

std::string metrics_to_csv(std::span<const TrainMetricsRow> rows) {
  std::string out = "epoch,total_loss,mean_loss,eps_audit,notes\n";
  for (const TrainMetricsRow& r : rows) {
    out += std::to_string(r.epoch) + "," + fmt_double(r.total_loss) + "," +
           fmt_double(r.mean_loss) + "," + fmt_double(r.eps_audit) + "," +
           r.notes + "\n";
  }
  return out;
}

std::vector<TrainMetricsRow> metrics_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) ||
      line != "epoch,total_loss,mean_loss,eps_audit,notes") {
    throw parse_error("metrics header must be 'epoch,total_loss,mean_loss,eps_audit,notes'");
  }
  std::vector<TrainMetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (int i = 0; i < 4; ++i) {
      std::size_t comma = line.find(',', start);
      if (comma == std::string::npos) throw parse_error("metrics row has too few fields: '" + line + "'");
      parts.push_back(line.substr(start, comma - start));
      start = comma + 1;
    }
    TrainMetricsRow r;
    r.epoch = parse_int_field(parts[0], "metrics epoch");
    r.total_loss = parse_double_field(parts[1], "metrics total_loss");
    r.mean_loss = parse_double_field(parts[2], "metrics mean_loss");
    r.eps_audit = parse_double_field(parts[3], "metrics eps_audit");
    r.notes = line.substr(start);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string epf_to_csv(const Epf& f) {
  std::string out = "mu2,u\n";
  for (const Knot& k : f.knots()) {
    out += fmt_double(k.x) + "," + fmt_double(k.y) + "\n";
  }
  return out;
}

Epf epf_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "mu2,u") {
    throw parse_error("frontier CSV must start with the header 'mu2,u'");
  }
  std::vector<Knot> ks;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::size_t comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      throw parse_error("frontier row must be 'x,y': '" + line + "'");
    }
    ks.push_back({parse_double_field(line.substr(0, comma), "frontier x"),
                  parse_double_field(line.substr(comma + 1), "frontier y")});
  }
  if (ks.empty()) throw parse_error("frontier CSV has no knots");
  return make_epf(std::move(ks));
}

std::string solve_result_to_json(const EnumeratedGame& e, const SolveResult& r,
                                 int epf_cap) {
  json doc;
  doc["schema"] = kSolveSchema;
  doc["game"] = e.game->name();
  doc["num_states"] = e.num_states();
  doc["opt1"] = r.opt1;
  doc["opt2"] = r.opt2;
  doc["root_epf"] = knots_to_json(r.epfs[0]);
  doc["root_window"] = json::array({r.lo[0], r.hi[0]});
  if (e.num_states() <= epf_cap) {
    json epfs = json::array();
    for (const Epf& f : r.epfs) epfs.push_back(knots_to_json(f));
    doc["epfs"] = std::move(epfs);
    json profile;
    profile["probs"] = r.profile.probs;
    profile["promise"] = r.profile.promise;
    json reached = json::array();
    for (char c : r.profile.reached) reached.push_back(c != 0);
    profile["reached"] = std::move(reached);
    doc["profile"] = std::move(profile);
  } else {
    doc["epfs_elided"] = true;
  }
  return doc.dump(2) + "\n";
}

std::string read_text_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw io_error("cannot read '" + p.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw io_error("read failed on '" + p.string() + "'");
  return std::move(buf).str();
}

void write_text_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot write '" + p.string() + "'");
  out << text;
  out.flush();
  if (!out) throw io_error("write failed on '" + p.string() + "'");
}

}  // namespace sefce
