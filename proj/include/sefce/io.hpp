#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sefce/game.hpp"
#include "sefce/net.hpp"
#include "sefce/solver.hpp"
#include "sefce/trainer.hpp"

namespace sefce {

/// Serializes a game to the versioned JSON game document (schema
/// "sefce-game-v1"). Documents are self-contained: generator outputs such
/// as resource maps and stage vectors are embedded, never re-sampled.
std::string game_to_json(const GameTree& g);

/// Parses a game document; wrong schema or malformed fields throw
/// parse_error.
std::unique_ptr<GameTree> game_from_json(const std::string& text);

/// Training configs as JSON (schema "sefce-train-v1"). Parsing starts from
/// the defaults, applies known keys, rejects unknown ones, and validates.
std::string train_config_to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const std::string& text);

/// Full training snapshot: both parameter sets, optimizer moments, and the
/// counters, so a resumed run continues where the saved one stopped.
struct Checkpoint {
  int m = 0, depth = 0, width = 0, feature_dim = 0;
  Eigen::VectorXd online, target;
  Eigen::VectorXd opt_m, opt_v, opt_vmax;
  std::int64_t opt_step = 0;
  std::int64_t epoch = 0;
};

Checkpoint make_checkpoint(const EpfModel& model, const AdamState& opt,
                           std::int64_t epoch);

/// Writes the snapshot back into a model and optimizer of matching shape;
/// throws shape_error otherwise.
void restore_checkpoint(const Checkpoint& c, EpfModel& model, AdamState& opt);

/// Checkpoint encoding: a text header listing the shapes and counters,
/// then one blob of little-endian 64-bit floats. Byte-stable round trip.
std::string checkpoint_to_bytes(const Checkpoint& c);
Checkpoint checkpoint_from_bytes(const std::string& bytes);

/// Metrics log as CSV with the fixed header
/// "epoch,total_loss,mean_loss,eps_audit,notes".
std::string metrics_to_csv(std::span<const TrainMetricsRow> rows);
std::vector<TrainMetricsRow> metrics_from_csv(const std::string& text);

/// Frontier knot tables as CSV with header "mu2,u", one knot per row.
std::string epf_to_csv(const Epf& f);
Epf epf_from_csv(const std::string& text);

/// Solve outcome as JSON (schema "sefce-solve-v1"): optimum, windows and
/// the root frontier always; per-state frontiers and the full profile only
/// up to epf_cap states, elided beyond it.
std::string solve_result_to_json(const EnumeratedGame& e,
                                 const SolveResult& r, int epf_cap = 10000);

std::string read_text_file(const std::filesystem::path& p);
void write_text_file(const std::filesystem::path& p, const std::string& text);

}  // namespace sefce
