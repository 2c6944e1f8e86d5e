#include "zen/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <openssl/evp.h>

#include "json.hpp"
#include "zen/csv.hpp"
#include "zen/verify.hpp"

namespace zen {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

template <class T, class Parse>
std::vector<T> parse_list(const json& j, const char* key, Parse parse) {
  if (!j.is_array()) throw std::invalid_argument(std::string("experiment config: '") + key + "' must be a list");
  std::vector<T> out;
  for (const auto& v : j) out.push_back(parse(v.get<std::string>()));
  return out;
}

std::vector<std::size_t> parse_ks(const json& j, const char* key) {
  if (!j.is_array()) throw std::invalid_argument(std::string("experiment config: '") + key + "' must be a list");
  std::vector<std::size_t> out;
  for (const auto& v : j) {
    if (!v.is_number_integer() || v.get<long long>() < 1)
      throw std::invalid_argument(std::string("experiment config: '") + key + "' holds a non-positive entry");
    out.push_back(v.get<std::size_t>());
  }
  return out;
}

template <class T>
json names_of(const std::vector<T>& v) {
  json out = json::array();
  for (const auto& x : v) out.push_back(std::string(to_string(x)));
  return out;
}

// Result-affecting fields only; threads and output do not change the numbers.
json canonical(const ExperimentConfig& c) {
  json j;
  j["dataset"] = c.dataset ? json(c.dataset->generic_string()) : json(nullptr);
  j["synth_seed"] = c.synth_seed;
  j["horizon"] = c.horizon;
  j["buildings"] = c.buildings;
  j["catalog"] = c.catalog.generic_string();
  j["algorithms"] = names_of(c.algorithms);
  j["normalizations"] = names_of(c.normalizations);
  j["heuristic"] = c.heuristic;
  j["k_days"] = c.k_days;
  j["k_hours"] = c.k_hours;
  j["variants"] = names_of(c.variants);
  j["simplified"] = c.simplified;
  j["cluster_seed"] = c.cluster_seed;
  j["restarts"] = c.restarts;
  j["gap_tol"] = c.gap_tol;
  j["time_limit"] = c.time_limit;
  j["node_limit"] = c.node_limit;
  return j;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  std::string s = buf;
  if (s.find_first_not_of("-0.") == std::string::npos) s = s.substr(s[0] == '-' ? 1 : 0);  // no "-0.00"
  return s;
}

MilpOptions solver_options(const ExperimentConfig& c) {
  MilpOptions o;
  o.gap_tol = c.gap_tol;
  o.time_limit = c.time_limit;
  o.node_limit = c.node_limit;
  return o;
}

struct Solved {
  std::string status;
  double objective = 0.0;
  double gap = 0.0;
  std::size_t nodes = 0;
  double runtime = 0.0;
  bool verified = false;
  bool has_solution = false;
  std::string note;
};

Solved solve_and_check(const TimeData& td, const Catalog& catalog, const BuildOptions& bo, const MilpOptions& mo) {
  const auto t0 = Clock::now();
  const MilpModel model = build(td, catalog, bo);
  const SolveReport rep = solve_milp(model, mo);
  Solved s;
  s.runtime = seconds_since(t0);
  s.status = std::string(to_string(rep.status));
  s.nodes = rep.nodes;
  s.gap = rep.gap;
  s.has_solution = rep.has_solution();
  if (s.has_solution) {
    s.objective = rep.objective;
    const SolutionCheck sc = verify_solution(model, rep.values, td, catalog, bo);
    s.verified = sc.ok();
    if (!sc.ok()) s.note = sc.failures.front();
  }
  return s;
}

struct CellKey {
  Granularity granularity;
  Algorithm algorithm;
  Normalization normalization;
  std::size_t k;
};

}  // namespace

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("experiment config: " + what); };
  if (algorithms.empty() || normalizations.empty() || variants.empty()) fail("algorithm, normalization and variant lists must be non-empty");
  if (k_days.empty() && k_hours.empty()) fail("K lists must not both be empty");
  for (auto v : variants)
    if (v == Variant::Full) fail("the Full variant is the reference, not a grid variant");
  const bool has_m1 = std::find(variants.begin(), variants.end(), Variant::M1) != variants.end();
  if (!k_hours.empty() && !has_m1) fail("hour grids need variant M1 (M0 requires day clusters)");
  if (!dataset && (horizon == 0 || horizon % 24 != 0 || buildings == 0))
    fail("synthetic data needs a positive horizon divisible by 24 and at least one building");
  if (!(gap_tol >= 0.0) || !(time_limit > 0.0)) fail("gap_tol must be >= 0 and time_limit > 0");
  if (restarts == 0) fail("restarts must be at least 1");
}

ExperimentConfig parse_experiment_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("experiment config: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("experiment config: top level must be an object");
  ExperimentConfig c;
  static const std::set<std::string> known{"dataset", "synth_seed", "horizon",   "buildings",    "catalog",
                                           "algorithms", "normalizations", "heuristic", "k_days", "k_hours",
                                           "variants", "simplified", "cluster_seed", "restarts", "gap_tol",
                                           "time_limit", "node_limit", "threads", "output"};
  try {
    for (const auto& [key, v] : j.items()) {
      if (!known.count(key)) throw std::invalid_argument("experiment config: unknown key '" + key + "'");
      if (key == "dataset") c.dataset = v.is_null() ? std::nullopt : std::optional<std::filesystem::path>(v.get<std::string>());
      else if (key == "synth_seed") c.synth_seed = v.get<std::uint64_t>();
      else if (key == "horizon") c.horizon = v.get<std::size_t>();
      else if (key == "buildings") c.buildings = v.get<std::size_t>();
      else if (key == "catalog") c.catalog = v.get<std::string>();
      else if (key == "algorithms") c.algorithms = parse_list<Algorithm>(v, "algorithms", parse_algorithm);
      else if (key == "normalizations") c.normalizations = parse_list<Normalization>(v, "normalizations", parse_normalization);
      else if (key == "heuristic") c.heuristic = v.get<bool>();
      else if (key == "k_days") c.k_days = parse_ks(v, "k_days");
      else if (key == "k_hours") c.k_hours = parse_ks(v, "k_hours");
      else if (key == "variants") c.variants = parse_list<Variant>(v, "variants", parse_variant);
      else if (key == "simplified") c.simplified = v.get<bool>();
      else if (key == "cluster_seed") c.cluster_seed = v.get<std::uint64_t>();
      else if (key == "restarts") c.restarts = v.get<std::size_t>();
      else if (key == "gap_tol") c.gap_tol = v.get<double>();
      else if (key == "time_limit") c.time_limit = v.get<double>();
      else if (key == "node_limit") c.node_limit = v.get<std::size_t>();
      else if (key == "threads") c.threads = v.get<std::size_t>();
      else if (key == "output") c.output = v.get<std::string>();
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("experiment config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open experiment config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str());
}

std::string to_json(const ExperimentConfig& config) {
  json j = canonical(config);
  j["threads"] = config.threads;
  j["output"] = config.output.generic_string();
  return j.dump(2);
}

std::string config_hash(const ExperimentConfig& config) {
  const std::string body = canonical(config).dump();
  const std::string blob = "blob " + std::to_string(body.size()) + '\0' + body;
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(blob.data(), blob.size(), md, &len, EVP_sha1(), nullptr))
    throw std::runtime_error("config_hash: SHA-1 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

double percent_deviation(double clustered, double reference) {
  if (reference == 0.0) throw std::invalid_argument("percent_deviation: zero reference objective");
  return 100.0 * (clustered - reference) / reference;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const TimeSeriesBundle& bundle, const Catalog& catalog,
                                const ProgressFn& progress) {
  config.validate();
  catalog.validate();
  const auto t0 = Clock::now();
  const MilpOptions mo = solver_options(config);
  const bool has_m1 = std::find(config.variants.begin(), config.variants.end(), Variant::M1) != config.variants.end();

  std::vector<CellKey> keys;
  for (auto g : {Granularity::Day, Granularity::Hour}) {
    const auto& ks = g == Granularity::Day ? config.k_days : config.k_hours;
    if (g == Granularity::Hour && !has_m1) continue;
    for (auto a : config.algorithms)
      for (auto n : config.normalizations)
        for (auto k : ks) keys.push_back({g, a, n, k});
  }

  std::mutex log_mutex;
  auto log = [&](const std::string& line) {
    if (!progress) return;
    std::lock_guard<std::mutex> lock(log_mutex);
    progress(line);
  };

  // Tasks: references first, then one clustering per key shared by its variants.
  const std::size_t n_refs = config.variants.size();
  std::vector<ReferenceResult> refs(n_refs);
  std::vector<std::vector<CellResult>> cells(keys.size());

  auto run_reference = [&](std::size_t i) {
    ReferenceResult& r = refs[i];
    r.variant = config.variants[i];
    try {
      const TimeData td = r.variant == Variant::M0 ? time_data(identity_model(bundle, Granularity::Day))
                                                   : full_time_data(bundle);
      const BuildOptions bo{r.variant == Variant::M0 ? Variant::M0 : Variant::Full, config.simplified};
      const Solved s = solve_and_check(td, catalog, bo, mo);
      r.status = s.status;
      r.objective = s.objective;
      r.gap = s.gap;
      r.nodes = s.nodes;
      r.runtime = s.runtime;
      r.verified = s.verified;
      r.has_solution = s.has_solution;
    } catch (const std::exception& e) {
      r.status = "error";
      log(std::string("reference ") + std::string(to_string(r.variant)) + " failed: " + e.what());
      return;
    }
    log("reference " + std::string(to_string(r.variant)) + ": " + r.status + " " + format_double(r.objective) + " in " +
        fixed(r.runtime, 1) + " s");
  };

  auto run_cell = [&](std::size_t i) {
    const CellKey& key = keys[i];
    std::vector<Variant> variants;
    for (auto v : config.variants)
      if (key.granularity == Granularity::Day || v == Variant::M1) variants.push_back(v);
    auto blank = [&](Variant v) {
      CellResult c;
      c.variant = v;
      c.granularity = key.granularity;
      c.algorithm = key.algorithm;
      c.normalization = key.normalization;
      c.k = key.k;
      return c;
    };
    const std::size_t objects = key.granularity == Granularity::Day ? bundle.days() : bundle.horizon;
    if (key.k > objects) {
      for (auto v : variants) {
        CellResult c = blank(v);
        c.status = "skipped";
        c.note = "K exceeds the " + std::to_string(objects) + " available objects";
        cells[i].push_back(std::move(c));
      }
      return;
    }
    ClusterModel cm;
    double cluster_time = 0.0;
    try {
      const auto tc = Clock::now();
      cm = fit(bundle, FitOptions{key.granularity, key.algorithm, key.normalization, config.heuristic, key.k,
                                  config.cluster_seed, config.restarts});
      cluster_time = seconds_since(tc);
    } catch (const std::exception& e) {
      for (auto v : variants) {
        CellResult c = blank(v);
        c.status = "error";
        c.note = e.what();
        cells[i].push_back(std::move(c));
      }
      return;
    }
    const TimeData td = time_data(cm);
    for (auto v : variants) {
      CellResult c = blank(v);
      c.cluster_runtime = cluster_time;
      try {
        const Solved s = solve_and_check(td, catalog, BuildOptions{v, config.simplified}, mo);
        c.status = s.status;
        c.objective = s.objective;
        c.gap = s.gap;
        c.nodes = s.nodes;
        c.runtime = s.runtime;
        c.verified = s.verified;
        c.has_solution = s.has_solution;
        c.note = s.note;
      } catch (const std::exception& e) {
        c.status = "error";
        c.note = e.what();
      }
      log(std::string(to_string(v)) + " " + std::string(to_string(key.granularity)) + " " +
          std::string(to_string(key.algorithm)) + " " + std::string(to_string(key.normalization)) + " K=" +
          std::to_string(key.k) + ": " + c.status + " in " + fixed(c.runtime, 1) + " s");
      cells[i].push_back(std::move(c));
    }
  };

  const std::size_t n_tasks = n_refs + keys.size();
  std::size_t threads = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n_tasks);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < n_tasks; t = next++) {
      if (t < n_refs) run_reference(t);
      else run_cell(t - n_refs);
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  ExperimentResult res;
  res.config_hash = config_hash(config);
  res.references = std::move(refs);
  for (auto& group : cells)
    for (auto& c : group) {
      for (const auto& r : res.references)
        if (r.variant == c.variant && r.has_solution && c.has_solution && r.objective != 0.0) {
          c.deviation = percent_deviation(c.objective, r.objective);
          c.has_deviation = true;
        }
      res.cells.push_back(std::move(c));
    }
  std::sort(res.cells.begin(), res.cells.end(), [](const CellResult& a, const CellResult& b) {
    return std::tie(a.variant, a.granularity, a.algorithm, a.normalization, a.k) <
           std::tie(b.variant, b.granularity, b.algorithm, b.normalization, b.k);
  });
  res.wall_time = seconds_since(t0);
  return res;
}

void write_experiment(const ExperimentResult& result, const ExperimentConfig& config, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);

  // Wide tables: one row per variant x granularity x algorithm x normalization, one column per K.
  std::set<std::size_t> ks;
  for (const auto& c : result.cells) ks.insert(c.k);
  using RowKey = std::tuple<Variant, Granularity, Algorithm, Normalization>;
  std::map<RowKey, std::map<std::size_t, const CellResult*>> rows;
  for (const auto& c : result.cells) rows[{c.variant, c.granularity, c.algorithm, c.normalization}][c.k] = &c;
  auto reference_of = [&](Variant v) -> const ReferenceResult* {
    for (const auto& r : result.references)
      if (r.variant == v) return &r;
    return nullptr;
  };

  auto write_wide = [&](const std::filesystem::path& path, bool runtime) {
    auto out = open_output(path);
    out << "variant,granularity,algorithm,normalization";
    if (runtime) out << ",reference";
    for (auto k : ks) out << ',' << k;
    out << '\n';
    for (const auto& [key, by_k] : rows) {
      const auto& [v, g, a, n] = key;
      out << to_string(v) << ',' << to_string(g) << ',' << to_string(a) << ',' << to_string(n);
      if (runtime) {
        const auto* r = reference_of(v);
        out << ',' << (r ? fixed(r->runtime, 3) : "");
      }
      for (auto k : ks) {
        out << ',';
        auto it = by_k.find(k);
        if (it == by_k.end()) continue;
        const CellResult& c = *it->second;
        if (runtime) {
          if (c.status != "skipped" && c.status != "error") out << fixed(c.runtime, 3);
          else out << c.status;
        } else {
          if (c.has_deviation) out << fixed(c.deviation, 4);
          else out << c.status;
        }
      }
      out << '\n';
    }
  };
  write_wide(dir / "deviation.csv", false);
  write_wide(dir / "runtime.csv", true);

  {
    auto out = open_output(dir / "cells.csv");
    out << "variant,granularity,algorithm,normalization,heuristic,k,cluster_seed,restarts,status,objective,"
           "reference_objective,deviation_pct,gap,nodes,verified,note\n";
    for (const auto& c : result.cells) {
      const auto* r = reference_of(c.variant);
      std::string note = c.note;
      std::replace(note.begin(), note.end(), ',', ';');
      std::replace(note.begin(), note.end(), '\n', ' ');
      out << to_string(c.variant) << ',' << to_string(c.granularity) << ',' << to_string(c.algorithm) << ','
          << to_string(c.normalization) << ',' << (config.heuristic ? 1 : 0) << ',' << c.k << ','
          << config.cluster_seed << ',' << config.restarts << ',' << c.status << ','
          << (c.has_solution ? format_double(c.objective) : "") << ','
          << (r && r->has_solution ? format_double(r->objective) : "") << ','
          << (c.has_deviation ? format_double(c.deviation) : "") << ','
          << (c.has_solution ? format_double(c.gap) : "") << ',' << c.nodes << ',' << (c.verified ? 1 : 0) << ','
          << note << '\n';
    }
  }

  json meta;
  meta["config"] = json::parse(to_json(config));
  meta["config"].erase("threads");
  meta["config"].erase("output");
  meta["config_hash"] = result.config_hash;
  meta["references"] = json::array();
  for (const auto& r : result.references)
    meta["references"].push_back({{"variant", std::string(to_string(r.variant))},
                                  {"status", r.status},
                                  {"objective", r.has_solution ? json(format_double(r.objective)) : json(nullptr)},
                                  {"gap", format_double(r.gap)},
                                  {"nodes", r.nodes},
                                  {"verified", r.verified}});
  auto out = open_output(dir / "meta.json");
  out << meta.dump(2) << '\n';
}

}  // namespace zen
