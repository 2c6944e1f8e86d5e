#include "zen/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include "zen/random.hpp"

namespace zen {

namespace {

using Index = Eigen::Index;

Index ix(std::size_t i) { return static_cast<Index>(i); }

double sq_dist(const Matrix& a, std::size_t i, const Matrix& b, std::size_t j) {
  return (a.row(ix(i)) - b.row(ix(j))).squaredNorm();
}

// Nearest row of `centers` to row i of x; ties go to the lowest center index.
std::pair<std::size_t, double> nearest(const Matrix& x, std::size_t i, const Matrix& centers) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < static_cast<std::size_t>(centers.rows()); ++c) {
    const double d = sq_dist(x, i, centers, c);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return {best, best_d};
}

void check_k(std::size_t k, std::size_t n) {
  if (k < 1) throw std::invalid_argument("cluster count must be at least 1");
  if (k > n)
    throw std::invalid_argument("cluster count " + std::to_string(k) + " exceeds object count " +
                                std::to_string(n));
}

std::uint64_t restart_seed(std::uint64_t seed, std::size_t r) {
  return seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(r);
}

}  // namespace

std::string_view to_string(Granularity g) { return g == Granularity::Day ? "days" : "hours"; }
std::string_view to_string(Algorithm a) { return a == Algorithm::KMeans ? "kmeans" : "kmedoids"; }
std::string_view to_string(Normalization n) { return n == Normalization::Range ? "range" : "std"; }

Granularity parse_granularity(std::string_view s) {
  if (s == "days" || s == "day") return Granularity::Day;
  if (s == "hours" || s == "hour") return Granularity::Hour;
  throw std::invalid_argument("unknown granularity '" + std::string(s) + "' (days|hours)");
}

Algorithm parse_algorithm(std::string_view s) {
  if (s == "kmeans" || s == "k-means") return Algorithm::KMeans;
  if (s == "kmedoids" || s == "k-medoids") return Algorithm::KMedoids;
  throw std::invalid_argument("unknown algorithm '" + std::string(s) + "' (kmeans|kmedoids)");
}

Normalization parse_normalization(std::string_view s) {
  if (s == "range") return Normalization::Range;
  if (s == "std") return Normalization::Std;
  throw std::invalid_argument("unknown normalization '" + std::string(s) + "' (range|std)");
}

Normalized normalize(const Matrix& x, Normalization method, std::size_t block) {
  if (block == 0 || x.cols() % ix(block) != 0)
    throw std::invalid_argument("normalize: column count is not a multiple of the block size");
  const std::size_t n_series = static_cast<std::size_t>(x.cols()) / block;
  Normalized out{x, std::vector<NormRecord>(n_series)};
  for (std::size_t s = 0; s < n_series; ++s) {
    const auto cols = x.middleCols(ix(s * block), ix(block));
    NormRecord rec;
    rec.method = method;
    if (method == Normalization::Range) {
      const double lo = cols.minCoeff();
      const double hi = cols.maxCoeff();
      rec.offset = lo;
      rec.scale = hi - lo;
    } else {
      const double count = static_cast<double>(cols.size());
      const double mean = cols.sum() / count;
      const double var = (cols.array() - mean).square().sum() / count;
      rec.offset = 0.0;
      rec.scale = std::sqrt(var);
    }
    if (!(rec.scale > 0.0) || !std::isfinite(rec.scale)) {
      rec.offset = 0.0;
      rec.scale = 1.0;
      rec.passthrough = true;
    } else {
      out.data.middleCols(ix(s * block), ix(block)) = (cols.array() - rec.offset) / rec.scale;
    }
    out.records[s] = rec;
  }
  return out;
}

Matrix denormalize(const Matrix& x, const std::vector<NormRecord>& records, std::size_t block) {
  if (x.cols() != ix(records.size() * block))
    throw std::invalid_argument("denormalize: record count does not match columns");
  Matrix out = x;
  for (std::size_t s = 0; s < records.size(); ++s) {
    if (records[s].passthrough) continue;
    out.middleCols(ix(s * block), ix(block)) =
        x.middleCols(ix(s * block), ix(block)).array() * records[s].scale + records[s].offset;
  }
  return out;
}

std::vector<std::string> clustered_series_names(const TimeSeriesBundle& bundle) {
  std::vector<std::string> names;
  for (const auto& b : bundle.buildings) {
    names.push_back("el_" + b.id);
    names.push_back("dhw_" + b.id);
    names.push_back("sh_" + b.id);
  }
  for (const char* n : {"temperature", "irr_tilt", "spot_price", "co2_el"}) names.emplace_back(n);
  return names;
}

std::vector<const Series*> clustered_series(const TimeSeriesBundle& bundle) {
  if (!bundle.irr_tilt) throw DataError("bundle has no tilted irradiance; apply transposition first");
  std::vector<const Series*> out;
  for (const auto& b : bundle.buildings) {
    out.push_back(&b.el);
    out.push_back(&b.dhw);
    out.push_back(&b.sh);
  }
  out.push_back(&bundle.temperature);
  out.push_back(&*bundle.irr_tilt);
  out.push_back(&bundle.spot_price);
  out.push_back(&bundle.co2_el);
  return out;
}

FeatureMatrix assemble(const TimeSeriesBundle& bundle, Granularity granularity) {
  bundle.validate();
  const auto series = clustered_series(bundle);
  const std::size_t block = block_length(granularity);
  const std::size_t n = bundle.horizon / block;
  FeatureMatrix fm;
  fm.granularity = granularity;
  fm.series = clustered_series_names(bundle);
  fm.data.resize(ix(n), ix(series.size() * block));
  fm.object_index.resize(n);
  for (std::size_t o = 0; o < n; ++o) {
    fm.object_index[o] = o;
    for (std::size_t s = 0; s < series.size(); ++s)
      for (std::size_t h = 0; h < block; ++h) fm.data(ix(o), ix(s * block + h)) = (*series[s])[o * block + h];
  }
  return fm;
}

std::vector<std::size_t> select_extremes(const TimeSeriesBundle& bundle, Granularity granularity) {
  bundle.validate();
  if (!bundle.irr_tilt) throw DataError("bundle has no tilted irradiance; apply transposition first");
  const std::size_t block = block_length(granularity);
  const std::size_t n = bundle.horizon / block;
  std::vector<double> load(n, 0.0), irr(n, 0.0);
  for (std::size_t t = 0; t < bundle.horizon; ++t) {
    double total = 0.0;
    for (const auto& b : bundle.buildings) total += b.el[t] + b.dhw[t] + b.sh[t];
    load[t / block] += total;
    irr[t / block] += (*bundle.irr_tilt)[t];
  }
  // max_element/min_element return the first of equal elements.
  const auto peak = static_cast<std::size_t>(std::max_element(load.begin(), load.end()) - load.begin());
  const auto dark = static_cast<std::size_t>(std::min_element(irr.begin(), irr.end()) - irr.begin());
  if (peak == dark) return {peak};
  return {peak, dark};
}

KMeansResult kmeans(const Matrix& x, std::size_t k, std::uint64_t seed, std::size_t max_iter) {
  const std::size_t n = static_cast<std::size_t>(x.rows());
  check_k(k, n);
  if (!x.allFinite()) throw std::invalid_argument("kmeans: non-finite input");
  Rng rng(seed);

  // k-means++ seeding
  Matrix centers(ix(k), x.cols());
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::size_t first = rng.index(n);
  centers.row(0) = x.row(ix(first));
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], sq_dist(x, i, centers, c - 1));
      total += d2[i];
    }
    std::size_t pick = n - 1;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc > target && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
      // Rounding can leave acc <= target; fall back to the last positive weight.
      if (acc <= target)
        for (std::size_t i = n; i-- > 0;)
          if (d2[i] > 0.0) {
            pick = i;
            break;
          }
    } else {
      pick = rng.index(n);
    }
    centers.row(ix(c)) = x.row(ix(pick));
  }

  KMeansResult res;
  res.labels.assign(n, 0);
  std::vector<std::size_t> prev(n, k);  // k = "unassigned"
  double prev_distortion = std::numeric_limits<double>::infinity();
  std::vector<double> dist(n);

  for (std::size_t it = 0; it < max_iter; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      auto [c, d] = nearest(x, i, centers);
      res.labels[i] = c;
      dist[i] = d;
    }
    // Repair empty clusters with the point farthest from its own center.
    std::vector<std::size_t> counts(k, 0);
    for (auto l : res.labels) ++counts[l];
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = n;
      double far_d = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        if (counts[res.labels[i]] > 1 && dist[i] > far_d) {
          far_d = dist[i];
          far = i;
        }
      if (far == n) continue;  // every point sits on its center: nothing to split
      --counts[res.labels[far]];
      res.labels[far] = c;
      counts[c] = 1;
      dist[far] = 0.0;
      centers.row(ix(c)) = x.row(ix(far));
    }
    // Mean update.
    Matrix sums = Matrix::Zero(ix(k), x.cols());
    for (std::size_t i = 0; i < n; ++i) sums.row(ix(res.labels[i])) += x.row(ix(i));
    for (std::size_t c = 0; c < k; ++c)
      if (counts[c] > 0) centers.row(ix(c)) = sums.row(ix(c)) / static_cast<double>(counts[c]);

    double distortion = 0.0;
    for (std::size_t i = 0; i < n; ++i) distortion += sq_dist(x, i, centers, res.labels[i]);
    res.history.push_back(distortion);
    res.iterations = it + 1;

    const bool unchanged = res.labels == prev;
    const bool stalled = std::isfinite(prev_distortion) &&
                         prev_distortion - distortion <= 1e-10 * std::max(prev_distortion, 1e-300);
    prev = res.labels;
    prev_distortion = distortion;
    if (unchanged || stalled) break;
  }
  res.centroids = std::move(centers);
  res.distortion = prev_distortion;
  return res;
}

namespace {

// Pairwise squared distances, cached when the matrix is small enough.
class Distances {
public:
  explicit Distances(const Matrix& x) : x_(x), n_(static_cast<std::size_t>(x.rows())) {
    if (n_ <= 4096) {
      cache_.resize(n_ * n_);
      for (std::size_t i = 0; i < n_; ++i) {
        cache_[i * n_ + i] = 0.0;
        for (std::size_t j = i + 1; j < n_; ++j) cache_[i * n_ + j] = cache_[j * n_ + i] = sq_dist(x_, i, x_, j);
      }
    }
  }
  double operator()(std::size_t i, std::size_t j) const {
    return cache_.empty() ? sq_dist(x_, i, x_, j) : cache_[i * n_ + j];
  }
  std::size_t size() const { return n_; }

private:
  const Matrix& x_;
  std::size_t n_;
  std::vector<double> cache_;
};

struct NearestTwo {
  std::vector<std::size_t> slot;
  std::vector<double> d1, d2;
};

NearestTwo nearest_two(const Distances& dist, const std::vector<std::size_t>& medoids) {
  const std::size_t n = dist.size();
  NearestTwo nt{std::vector<std::size_t>(n), std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t o = 0; o < n; ++o) {
    double b1 = std::numeric_limits<double>::infinity(), b2 = b1;
    std::size_t s1 = 0;
    for (std::size_t s = 0; s < medoids.size(); ++s) {
      const double d = dist(o, medoids[s]);
      if (d < b1) {
        b2 = b1;
        b1 = d;
        s1 = s;
      } else if (d < b2) {
        b2 = d;
      }
    }
    nt.slot[o] = s1;
    nt.d1[o] = b1;
    nt.d2[o] = b2;
  }
  return nt;
}

}  // namespace

KMedoidsResult kmedoids(const Matrix& x, std::size_t k, std::uint64_t seed, bool random_first) {
  const std::size_t n = static_cast<std::size_t>(x.rows());
  check_k(k, n);
  if (!x.allFinite()) throw std::invalid_argument("kmedoids: non-finite input");
  const Distances dist(x);
  std::vector<char> is_medoid(n, 0);
  std::vector<std::size_t> medoids;

  // Build: first medoid, then greedy additions with the largest cost reduction.
  std::size_t first = 0;
  if (random_first) {
    Rng rng(seed);
    first = rng.index(n);
  } else {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < n; ++c) {
      double total = 0.0;
      for (std::size_t o = 0; o < n; ++o) total += dist(c, o);
      if (total < best) {
        best = total;
        first = c;
      }
    }
  }
  medoids.push_back(first);
  is_medoid[first] = 1;
  std::vector<double> d1(n);
  for (std::size_t o = 0; o < n; ++o) d1[o] = dist(first, o);
  while (medoids.size() < k) {
    std::size_t pick = n;
    double best_gain = -1.0;
    for (std::size_t c = 0; c < n; ++c) {
      if (is_medoid[c]) continue;
      double gain = 0.0;
      for (std::size_t o = 0; o < n; ++o) gain += std::max(0.0, d1[o] - dist(c, o));
      if (gain > best_gain) {
        best_gain = gain;
        pick = c;
      }
    }
    medoids.push_back(pick);
    is_medoid[pick] = 1;
    for (std::size_t o = 0; o < n; ++o) d1[o] = std::min(d1[o], dist(pick, o));
  }

  KMedoidsResult res;
  NearestTwo nt = nearest_two(dist, medoids);
  double cost = std::accumulate(nt.d1.begin(), nt.d1.end(), 0.0);
  res.history.push_back(cost);

  // Swap: evaluate every (medoid slot, candidate) pair with one pass over the
  // objects per candidate, apply the best improving swap, repeat.
  std::vector<double> delta(k);
  for (;;) {
    double best_delta = 0.0;
    std::size_t best_slot = k, best_cand = n;
    for (std::size_t c = 0; c < n; ++c) {
      if (is_medoid[c]) continue;
      double shared = 0.0;
      std::fill(delta.begin(), delta.end(), 0.0);
      for (std::size_t o = 0; o < n; ++o) {
        const double doc = dist(o, c);
        shared += std::min(doc, nt.d1[o]) - nt.d1[o];
        delta[nt.slot[o]] += std::min(doc, nt.d2[o]) - std::min(doc, nt.d1[o]);
      }
      for (std::size_t s = 0; s < k; ++s) {
        const double total = shared + delta[s];
        if (total < best_delta) {
          best_delta = total;
          best_slot = s;
          best_cand = c;
        }
      }
    }
    if (best_slot == k || best_delta >= -1e-12 * std::max(cost, 1.0)) break;
    is_medoid[medoids[best_slot]] = 0;
    medoids[best_slot] = best_cand;
    is_medoid[best_cand] = 1;
    nt = nearest_two(dist, medoids);
    cost = std::accumulate(nt.d1.begin(), nt.d1.end(), 0.0);
    res.history.push_back(cost);
  }

  res.medoids = medoids;
  res.labels = nt.slot;
  res.cost = cost;
  return res;
}

std::size_t ClusterModel::series_index(std::string_view name) const {
  for (std::size_t s = 0; s < series.size(); ++s)
    if (series[s] == name) return s;
  throw std::out_of_range("no clustered series named '" + std::string(name) + "'");
}

ClusterModel fit(const TimeSeriesBundle& bundle, const FitOptions& opt) {
  const FeatureMatrix fm = assemble(bundle, opt.granularity);
  const std::size_t n = static_cast<std::size_t>(fm.data.rows());
  const std::size_t block = fm.block();

  std::vector<std::size_t> forced;
  if (opt.heuristic) {
    if (opt.k < 3) throw std::invalid_argument("heuristic needs at least 3 clusters");
    forced = select_extremes(bundle, opt.granularity);
  }
  check_k(opt.k, n);
  const std::size_t k_free = opt.k - forced.size();
  std::vector<char> is_forced(n, 0);
  for (auto f : forced) is_forced[f] = 1;

  std::vector<std::size_t> free_rows;
  for (std::size_t o = 0; o < n; ++o)
    if (!is_forced[o]) free_rows.push_back(o);
  check_k(k_free, free_rows.size());

  Matrix free_x(ix(free_rows.size()), fm.data.cols());
  for (std::size_t r = 0; r < free_rows.size(); ++r) free_x.row(ix(r)) = fm.data.row(ix(free_rows[r]));
  const Normalized norm = normalize(free_x, opt.normalization, block);

  ClusterModel m;
  m.k = opt.k;
  m.granularity = opt.granularity;
  m.algorithm = opt.algorithm;
  m.normalization = opt.normalization;
  m.heuristic = opt.heuristic;
  m.seed = opt.seed;
  m.series = fm.series;
  m.forced = forced;
  m.representatives.resize(ix(opt.k), fm.data.cols());
  m.xi.assign(n, 0);
  m.sigma.assign(opt.k, 0);

  std::vector<std::size_t> labels;
  const std::size_t restarts = std::max<std::size_t>(1, opt.restarts);
  if (opt.algorithm == Algorithm::KMeans) {
    KMeansResult best;
    for (std::size_t r = 0; r < restarts; ++r) {
      KMeansResult run = kmeans(norm.data, k_free, restart_seed(opt.seed, r));
      if (r == 0 || run.distortion < best.distortion) best = std::move(run);
    }
    // Centroids as means of the original rows: equal to the denormalized
    // centroids up to rounding, and exact for singleton clusters.
    m.representatives.topRows(ix(k_free)) = denormalize(best.centroids, norm.records, block);
    Matrix sums = Matrix::Zero(ix(k_free), fm.data.cols());
    std::vector<std::size_t> members(k_free, 0);
    for (std::size_t r = 0; r < free_rows.size(); ++r) {
      sums.row(ix(best.labels[r])) += fm.data.row(ix(free_rows[r]));
      ++members[best.labels[r]];
    }
    for (std::size_t c = 0; c < k_free; ++c)
      if (members[c] > 0) m.representatives.row(ix(c)) = sums.row(ix(c)) / static_cast<double>(members[c]);
    labels = std::move(best.labels);
    m.objective = best.distortion;
  } else {
    KMedoidsResult best;
    for (std::size_t r = 0; r < restarts; ++r) {
      KMedoidsResult run = kmedoids(norm.data, k_free, restart_seed(opt.seed, r), r > 0);
      if (r == 0 || run.cost < best.cost) best = std::move(run);
    }
    for (std::size_t c = 0; c < k_free; ++c)
      m.representatives.row(ix(c)) = fm.data.row(ix(free_rows[best.medoids[c]]));
    labels = std::move(best.labels);
    m.objective = best.cost;
  }

  for (std::size_t r = 0; r < free_rows.size(); ++r) {
    m.xi[free_rows[r]] = labels[r];
    ++m.sigma[labels[r]];
  }
  for (std::size_t j = 0; j < forced.size(); ++j) {
    const std::size_t c = k_free + j;
    m.representatives.row(ix(c)) = fm.data.row(ix(forced[j]));
    m.xi[forced[j]] = c;
    m.sigma[c] = 1;
  }
  return m;
}

ClusterModel identity_model(const TimeSeriesBundle& bundle, Granularity granularity) {
  const FeatureMatrix fm = assemble(bundle, granularity);
  ClusterModel m;
  m.granularity = granularity;
  m.series = fm.series;
  m.k = static_cast<std::size_t>(fm.data.rows());
  m.representatives = fm.data;
  m.xi.resize(m.k);
  std::iota(m.xi.begin(), m.xi.end(), std::size_t{0});
  m.sigma.assign(m.k, 1);
  return m;
}

namespace {

std::string feature_name(const std::string& series, Granularity g, std::size_t h) {
  if (g == Granularity::Hour) return series;
  char buf[8];
  std::snprintf(buf, sizeof(buf), "@%02zu", h);
  return series + buf;
}

}  // namespace

void write_cluster_model(const ClusterModel& m, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    auto out = open_output(dir / "representatives.csv");
    out << "cluster,sigma";
    for (const auto& s : m.series)
      for (std::size_t h = 0; h < m.block(); ++h) out << ',' << feature_name(s, m.granularity, h);
    out << '\n';
    for (std::size_t c = 0; c < m.k; ++c) {
      out << c << ',' << m.sigma[c];
      for (Index j = 0; j < m.representatives.cols(); ++j) out << ',' << format_double(m.representatives(ix(c), j));
      out << '\n';
    }
  }
  auto out = open_output(dir / "assignment.csv");
  out << "object,cluster,forced\n";
  for (std::size_t o = 0; o < m.xi.size(); ++o) {
    const bool f = std::find(m.forced.begin(), m.forced.end(), o) != m.forced.end();
    out << o << ',' << m.xi[o] << ',' << (f ? 1 : 0) << '\n';
  }
}

ClusterModel read_cluster_model(const std::filesystem::path& dir) {
  const CsvTable reps = read_csv(dir / "representatives.csv");
  const CsvTable asg = read_csv(dir / "assignment.csv");
  if (reps.header.size() < 3 || reps.header[0] != "cluster" || reps.header[1] != "sigma")
    throw DataError("representatives.csv: unexpected header");
  if (asg.header != std::vector<std::string>{"object", "cluster", "forced"})
    throw DataError("assignment.csv: unexpected header");

  ClusterModel m;
  const bool days = reps.header[2].find('@') != std::string::npos;
  m.granularity = days ? Granularity::Day : Granularity::Hour;
  const std::size_t block = m.block();
  const std::size_t n_feat = reps.header.size() - 2;
  if (n_feat % block != 0) throw DataError("representatives.csv: incomplete day blocks");
  for (std::size_t s = 0; s < n_feat / block; ++s) {
    std::string name = reps.header[2 + s * block];
    if (days) name = name.substr(0, name.rfind('@'));
    m.series.push_back(name);
  }
  m.k = reps.rows.size();
  m.representatives.resize(ix(m.k), ix(n_feat));
  m.sigma.resize(m.k);
  for (std::size_t r = 0; r < m.k; ++r) {
    const auto& row = reps.rows[r];
    if (row.size() != reps.header.size()) throw DataError("representatives.csv: ragged row " + std::to_string(r + 1));
    if (parse_cell(row[0], r + 1, "cluster") != static_cast<double>(r))
      throw DataError("representatives.csv: clusters must be listed in order");
    m.sigma[r] = static_cast<std::size_t>(parse_cell(row[1], r + 1, "sigma"));
    for (std::size_t j = 0; j < n_feat; ++j)
      m.representatives(ix(r), ix(j)) = parse_cell(row[2 + j], r + 1, reps.header[2 + j]);
  }
  m.xi.resize(asg.rows.size());
  for (std::size_t r = 0; r < asg.rows.size(); ++r) {
    const auto& row = asg.rows[r];
    if (row.size() != 3) throw DataError("assignment.csv: ragged row " + std::to_string(r + 1));
    const auto c = static_cast<std::size_t>(parse_cell(row[1], r + 1, "cluster"));
    if (c >= m.k) throw DataError("assignment.csv: cluster id out of range at row " + std::to_string(r + 1));
    m.xi[r] = c;
    if (parse_cell(row[2], r + 1, "forced") != 0.0) m.forced.push_back(r);
  }
  m.heuristic = !m.forced.empty();
  return m;
}

}  // namespace zen
