#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "zen/cluster.hpp"
#include "zen/milp.hpp"
#include "zen/solve.hpp"
#include "zen/timeseries.hpp"

namespace zen {

/// Deviation grid over clustering configurations. Day grids run for every
/// variant, hour grids for M1 only (M0 needs multi-hour clusters).
struct ExperimentConfig {
  std::optional<std::filesystem::path> dataset;  // CSV bundle; synthetic data when absent
  std::uint64_t synth_seed = 1;
  std::size_t horizon = 720;
  std::size_t buildings = 2;
  std::filesystem::path catalog = "data/catalog.json";
  std::vector<Algorithm> algorithms{Algorithm::KMeans, Algorithm::KMedoids};
  std::vector<Normalization> normalizations{Normalization::Range, Normalization::Std};
  bool heuristic = true;
  std::vector<std::size_t> k_days{4, 5, 6, 24, 30, 36};
  std::vector<std::size_t> k_hours{96, 120, 144};
  std::vector<Variant> variants{Variant::M0, Variant::M1};
  bool simplified = true;
  std::uint64_t cluster_seed = 0;
  std::size_t restarts = 5;
  double gap_tol = 1e-4;
  double time_limit = 1800.0;  // per solve, seconds
  std::size_t node_limit = 100000;
  std::size_t threads = 0;  // 0: hardware concurrency
  std::filesystem::path output = "out/experiment";

  /// Throws std::invalid_argument on empty lists, a Full variant in the grid or bad limits.
  void validate() const;
};

ExperimentConfig parse_experiment_config(std::string_view json_text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
/// Canonical JSON with sorted keys, the basis of the config hash.
std::string to_json(const ExperimentConfig& config);
/// SHA-1 of the canonical JSON in git blob framing ("blob <size>\0<bytes>").
std::string config_hash(const ExperimentConfig& config);

struct ReferenceResult {
  Variant variant = Variant::M0;
  std::string status;
  double objective = 0.0;
  double gap = 0.0;
  std::size_t nodes = 0;
  double runtime = 0.0;
  bool verified = false;
  bool has_solution = false;
};

struct CellResult {
  Variant variant = Variant::M0;
  Granularity granularity = Granularity::Day;
  Algorithm algorithm = Algorithm::KMeans;
  Normalization normalization = Normalization::Range;
  std::size_t k = 0;
  std::string status;  // solver status, or "skipped" / "error"
  std::string note;
  double objective = 0.0;
  double deviation = 0.0;  // percent of the reference, signed
  double gap = 0.0;
  std::size_t nodes = 0;
  double runtime = 0.0;          // solve seconds
  double cluster_runtime = 0.0;  // clustering seconds
  bool verified = false;
  bool has_solution = false;
  bool has_deviation = false;
};

struct ExperimentResult {
  std::string config_hash;
  std::vector<ReferenceResult> references;
  std::vector<CellResult> cells;  // sorted by configuration key
  double wall_time = 0.0;
};

/// 100 * (clustered - reference) / reference.
double percent_deviation(double clustered, double reference);

/// The reference for M0 is the day-identity clustering (every day its own
/// cluster); for M1 it is the Full variant. Both use the same simplified flag as the grid.
using ProgressFn = std::function<void(const std::string&)>;
ExperimentResult run_experiment(const ExperimentConfig& config, const TimeSeriesBundle& bundle,
                                const Catalog& catalog, const ProgressFn& progress = {});

/// Writes deviation.csv, runtime.csv, cells.csv and meta.json into `dir`.
/// Everything except runtime.csv is reproducible byte for byte.
void write_experiment(const ExperimentResult& result, const ExperimentConfig& config,
                      const std::filesystem::path& dir);

}  // namespace zen
