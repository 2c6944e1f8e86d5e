#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "zen/timeseries.hpp"

namespace zen {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Granularity { Day, Hour };
enum class Algorithm { KMeans, KMedoids };
enum class Normalization { Range, Std };

std::string_view to_string(Granularity g);
std::string_view to_string(Algorithm a);
std::string_view to_string(Normalization n);
Granularity parse_granularity(std::string_view s);
Algorithm parse_algorithm(std::string_view s);
Normalization parse_normalization(std::string_view s);

/// Hours per clustered object.
constexpr std::size_t block_length(Granularity g) { return g == Granularity::Day ? 24 : 1; }

/// How one series was scaled: x' = (x - offset) / scale.
/// Degenerate series (zero range or zero deviation) pass through unscaled.
struct NormRecord {
  Normalization method = Normalization::Range;
  double offset = 0.0;
  double scale = 1.0;
  bool passthrough = false;
};

struct Normalized {
  Matrix data;
  std::vector<NormRecord> records;  // one per series
};

/// Normalizes each series. A series occupies `block` consecutive columns
/// (24 for day objects, 1 for hour objects); statistics span the whole block.
/// Std uses the population standard deviation and does not centre.
Normalized normalize(const Matrix& x, Normalization method, std::size_t block = 1);
Matrix denormalize(const Matrix& x, const std::vector<NormRecord>& records, std::size_t block = 1);

/// Objects (days or hours) as rows. Day rows hold 24 consecutive hours per
/// series, series blocks in `series` order: column = series * 24 + hour.
struct FeatureMatrix {
  Granularity granularity = Granularity::Hour;
  Matrix data;
  std::vector<std::string> series;
  std::vector<std::size_t> object_index;

  std::size_t block() const { return block_length(granularity); }
};

/// Names of the clustered series in column order: el_, dhw_, sh_ per building,
/// then temperature, irr_tilt, spot_price, co2_el.
std::vector<std::string> clustered_series_names(const TimeSeriesBundle& bundle);
std::vector<const Series*> clustered_series(const TimeSeriesBundle& bundle);

FeatureMatrix assemble(const TimeSeriesBundle& bundle, Granularity granularity);

/// Day/hour with the highest total building load and the one with the lowest
/// tilted irradiance (daily sums for days). Ties go to the lowest index; a
/// shared object is returned once.
std::vector<std::size_t> select_extremes(const TimeSeriesBundle& bundle, Granularity granularity);

struct KMeansResult {
  std::vector<std::size_t> labels;
  Matrix centroids;
  double distortion = 0.0;  // sum of squared distances
  std::size_t iterations = 0;
  std::vector<double> history;  // distortion after every Lloyd update
};

/// k-means++ seeding followed by Lloyd iterations (at most `max_iter`).
KMeansResult kmeans(const Matrix& x, std::size_t k, std::uint64_t seed, std::size_t max_iter = 300);

struct KMedoidsResult {
  std::vector<std::size_t> labels;
  std::vector<std::size_t> medoids;  // row indices, one per cluster
  double cost = 0.0;                 // sum of squared distances to medoids
  std::vector<double> history;       // cost after build and after every swap
};

/// PAM: greedy build then best-improvement swaps until no swap helps.
/// With `random_first` the first build medoid is drawn from the seeded RNG
/// instead of being the overall best single medoid.
KMedoidsResult kmedoids(const Matrix& x, std::size_t k, std::uint64_t seed, bool random_first = false);

struct FitOptions {
  Granularity granularity = Granularity::Day;
  Algorithm algorithm = Algorithm::KMeans;
  Normalization normalization = Normalization::Range;
  bool heuristic = false;
  std::size_t k = 10;
  std::uint64_t seed = 0;
  std::size_t restarts = 1;
};

/// Result of clustering a bundle. Representatives are in original units with
/// the FeatureMatrix column layout. Heuristic objects are singleton clusters
/// placed after the algorithm's clusters.
struct ClusterModel {
  std::size_t k = 0;
  Granularity granularity = Granularity::Day;
  Algorithm algorithm = Algorithm::KMeans;
  Normalization normalization = Normalization::Range;
  bool heuristic = false;
  std::uint64_t seed = 0;
  std::vector<std::string> series;
  Matrix representatives;
  std::vector<std::size_t> xi;     // cluster of every object
  std::vector<std::size_t> sigma;  // occurrences per cluster
  std::vector<std::size_t> forced; // heuristic object indices
  double objective = 0.0;          // algorithm cost in normalized space

  std::size_t block() const { return block_length(granularity); }
  std::size_t objects() const { return xi.size(); }
  std::size_t horizon() const { return xi.size() * block(); }
  std::size_t series_index(std::string_view name) const;
  /// Value of series `s` at position `pos` (hour within the object) of cluster `c`.
  double value(std::size_t c, std::size_t s, std::size_t pos) const {
    return representatives(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(s * block() + pos));
  }
};

ClusterModel fit(const TimeSeriesBundle& bundle, const FitOptions& options);

/// One cluster per object with the object itself as representative.
ClusterModel identity_model(const TimeSeriesBundle& bundle, Granularity granularity);

/// Writes representatives.csv and assignment.csv into `dir`.
void write_cluster_model(const ClusterModel& model, const std::filesystem::path& dir);
/// Reads the pair back. Algorithm tags are not stored and come back as defaults.
ClusterModel read_cluster_model(const std::filesystem::path& dir);

}  // namespace zen
