#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "zen/cluster.hpp"

namespace zen {

struct SeriesError {
  std::string name;
  double rmsd = 0.0;   // series units
  double nrmsd = 0.0;  // rmsd / (max - min) of the original, 0 for flat series
  double yae = 0.0;    // mean(reconstructed - original), series units
};

struct MetricsReport {
  std::size_t k = 0;
  Granularity granularity = Granularity::Day;
  Algorithm algorithm = Algorithm::KMeans;
  Normalization normalization = Normalization::Range;
  bool heuristic = false;
  std::uint64_t seed = 0;
  std::vector<SeriesError> series;
  double mean_nrmsd = 0.0;
};

double rmsd(const Series& original, const Series& reconstructed);
double nrmsd(const Series& original, const Series& reconstructed);
double yae(const Series& original, const Series& reconstructed);

/// Full-horizon hourly series rebuilt from representatives, in model series order.
std::vector<Series> reconstruct_series(const ClusterModel& model);

/// Copy of `shape` with every clustered series replaced by its reconstruction.
/// Series that are not clustered (dhi, dni, sun position) are kept as-is.
TimeSeriesBundle reconstruct(const ClusterModel& model, const TimeSeriesBundle& shape);

MetricsReport evaluate(const ClusterModel& model, const TimeSeriesBundle& original);

struct SweepOptions {
  Granularity granularity = Granularity::Day;
  Algorithm algorithm = Algorithm::KMeans;
  Normalization normalization = Normalization::Range;
  bool heuristic = false;
  std::vector<std::size_t> ks;
  std::uint64_t seed = 0;
  std::size_t restarts = 1;
};

/// One report per cluster count.
std::vector<MetricsReport> sweep(const TimeSeriesBundle& bundle, const SweepOptions& options);

/// Long-format table: K, algorithm, norm, heuristic, granularity, series, rmsd, nrmsd, yae, seed.
void write_sweep_csv(const std::vector<MetricsReport>& reports, const std::filesystem::path& path);

/// Elbow-curve tables: mean_nrmsd.csv plus rmsd_<series>.csv for every series.
void write_plotdata(const std::vector<MetricsReport>& reports, const std::filesystem::path& dir);

}  // namespace zen
