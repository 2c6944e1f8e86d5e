#include "zen/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace zen {

namespace {

void check_equal_length(const Series& a, const Series& b) {
  if (a.size() != b.size()) throw std::invalid_argument("series lengths differ");
  if (a.empty()) throw std::invalid_argument("empty series");
}

}  // namespace

double rmsd(const Series& original, const Series& reconstructed) {
  check_equal_length(original, reconstructed);
  double sum = 0.0;
  for (std::size_t t = 0; t < original.size(); ++t) {
    const double e = reconstructed[t] - original[t];
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(original.size()));
}

double nrmsd(const Series& original, const Series& reconstructed) {
  const auto [lo, hi] = std::minmax_element(original.begin(), original.end());
  const double range = original.empty() ? 0.0 : *hi - *lo;
  const double r = rmsd(original, reconstructed);
  return range > 0.0 ? r / range : 0.0;
}

double yae(const Series& original, const Series& reconstructed) {
  check_equal_length(original, reconstructed);
  double sum = 0.0;
  for (std::size_t t = 0; t < original.size(); ++t) sum += reconstructed[t] - original[t];
  return sum / static_cast<double>(original.size());
}

std::vector<Series> reconstruct_series(const ClusterModel& m) {
  const std::size_t block = m.block();
  for (auto c : m.xi)
    if (c >= m.k) throw std::invalid_argument("reconstruct: assignment refers to a missing cluster");
  std::vector<Series> out(m.series.size(), Series(m.horizon()));
  for (std::size_t o = 0; o < m.objects(); ++o)
    for (std::size_t s = 0; s < m.series.size(); ++s)
      for (std::size_t h = 0; h < block; ++h) out[s][o * block + h] = m.value(m.xi[o], s, h);
  return out;
}

TimeSeriesBundle reconstruct(const ClusterModel& model, const TimeSeriesBundle& shape) {
  if (model.horizon() != shape.horizon)
    throw std::invalid_argument("reconstruct: model covers " + std::to_string(model.horizon()) +
                                " hours, bundle has " + std::to_string(shape.horizon));
  if (model.series != clustered_series_names(shape))
    throw std::invalid_argument("reconstruct: series layout does not match the bundle");
  TimeSeriesBundle out = shape;
  auto rebuilt = reconstruct_series(model);
  std::size_t s = 0;
  for (auto& b : out.buildings) {
    b.el = std::move(rebuilt[s++]);
    b.dhw = std::move(rebuilt[s++]);
    b.sh = std::move(rebuilt[s++]);
  }
  out.temperature = std::move(rebuilt[s++]);
  out.irr_tilt = std::move(rebuilt[s++]);
  out.spot_price = std::move(rebuilt[s++]);
  out.co2_el = std::move(rebuilt[s++]);
  return out;
}

MetricsReport evaluate(const ClusterModel& model, const TimeSeriesBundle& original) {
  if (model.horizon() != original.horizon) throw std::invalid_argument("evaluate: horizon mismatch");
  const auto orig = clustered_series(original);
  const auto rec = reconstruct_series(model);
  if (orig.size() != rec.size()) throw std::invalid_argument("evaluate: series count mismatch");
  MetricsReport r;
  r.k = model.k;
  r.granularity = model.granularity;
  r.algorithm = model.algorithm;
  r.normalization = model.normalization;
  r.heuristic = model.heuristic;
  r.seed = model.seed;
  double total = 0.0;
  for (std::size_t s = 0; s < orig.size(); ++s) {
    SeriesError e{model.series[s], rmsd(*orig[s], rec[s]), nrmsd(*orig[s], rec[s]), yae(*orig[s], rec[s])};
    total += e.nrmsd;
    r.series.push_back(std::move(e));
  }
  r.mean_nrmsd = total / static_cast<double>(r.series.size());
  return r;
}

std::vector<MetricsReport> sweep(const TimeSeriesBundle& bundle, const SweepOptions& o) {
  if (o.ks.empty()) throw std::invalid_argument("sweep: empty cluster-count list");
  std::vector<MetricsReport> out;
  out.reserve(o.ks.size());
  for (auto k : o.ks) {
    FitOptions f{o.granularity, o.algorithm, o.normalization, o.heuristic, k, o.seed, o.restarts};
    out.push_back(evaluate(fit(bundle, f), bundle));
  }
  return out;
}

void write_sweep_csv(const std::vector<MetricsReport>& reports, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << "K,algorithm,norm,heuristic,granularity,series,rmsd,nrmsd,yae,seed\n";
  for (const auto& r : reports)
    for (const auto& e : r.series)
      out << r.k << ',' << to_string(r.algorithm) << ',' << to_string(r.normalization) << ','
          << (r.heuristic ? 1 : 0) << ',' << to_string(r.granularity) << ',' << e.name << ','
          << format_double(e.rmsd) << ',' << format_double(e.nrmsd) << ',' << format_double(e.yae) << ','
          << r.seed << '\n';
}

void write_plotdata(const std::vector<MetricsReport>& reports, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const std::string tags = "K,algorithm,norm,heuristic,granularity,seed";
  auto prefix = [](const MetricsReport& r) {
    return std::to_string(r.k) + ',' + std::string(to_string(r.algorithm)) + ',' +
           std::string(to_string(r.normalization)) + ',' + (r.heuristic ? "1" : "0") + ',' +
           std::string(to_string(r.granularity)) + ',' + std::to_string(r.seed);
  };
  {
    auto out = open_output(dir / "mean_nrmsd.csv");
    out << tags << ",mean_nrmsd\n";
    for (const auto& r : reports) out << prefix(r) << ',' << format_double(r.mean_nrmsd) << '\n';
  }
  if (reports.empty()) return;
  for (std::size_t s = 0; s < reports.front().series.size(); ++s) {
    auto out = open_output(dir / ("rmsd_" + reports.front().series[s].name + ".csv"));
    out << tags << ",rmsd\n";
    for (const auto& r : reports) out << prefix(r) << ',' << format_double(r.series.at(s).rmsd) << '\n';
  }
}

}  // namespace zen
