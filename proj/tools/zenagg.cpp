#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "zen/cluster.hpp"
#include "zen/experiment.hpp"
#include "zen/metrics.hpp"
#include "zen/milp.hpp"
#include "zen/mps.hpp"
#include "zen/solve.hpp"
#include "zen/timeseries.hpp"
#include "zen/verify.hpp"

using namespace zen;

namespace {

// "a:b:step" or "a,b,c".
std::vector<std::size_t> parse_k_list(const std::string& text) {
  std::vector<std::size_t> out;
  auto num = [&](const std::string& s) {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(s, &used);
    if (used != s.size() || v == 0) throw std::invalid_argument("bad cluster count '" + s + "'");
    return static_cast<std::size_t>(v);
  };
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw std::invalid_argument("K range must be start:stop:step");
    const std::size_t a = num(parts[0]), b = num(parts[1]), step = num(parts[2]);
    for (std::size_t k = a; k <= b; k += step) out.push_back(k);
  } else {
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ',');) out.push_back(num(p));
  }
  if (out.empty()) throw std::invalid_argument("empty K list");
  return out;
}

struct DataOpts {
  std::string path;
  std::uint64_t seed = 1;
  std::size_t horizon = 720;
  std::size_t buildings = 2;

  void add(CLI::App* app) {
    app->add_option("--data", path, "input CSV bundle (synthetic data when omitted)");
    app->add_option("--synth-seed", seed, "seed of the synthetic bundle");
    app->add_option("--horizon", horizon, "synthetic horizon in hours");
    app->add_option("--buildings", buildings, "synthetic building count");
  }
  TimeSeriesBundle load() const { return path.empty() ? synth_bundle(seed, horizon, buildings) : load_bundle(path); }
};

struct ClusterOpts {
  std::string granularity = "days";
  std::string algorithm = "kmeans";
  std::string norm = "range";
  bool heuristic = false;
  std::uint64_t seed = 0;
  std::size_t restarts = 1;

  void add(CLI::App* app) {
    app->add_option("--granularity", granularity, "days or hours");
    app->add_option("--algorithm", algorithm, "kmeans or kmedoids");
    app->add_option("--norm", norm, "range or std");
    app->add_flag("--heuristic", heuristic, "keep the peak-load and lowest-irradiance objects as own clusters");
    app->add_option("--seed", seed, "clustering seed");
    app->add_option("--restarts", restarts, "restarts, best kept");
  }
  FitOptions fit_options(std::size_t k) const {
    return FitOptions{parse_granularity(granularity), parse_algorithm(algorithm), parse_normalization(norm), heuristic,
                      k, seed, restarts};
  }
};

struct ModelOpts {
  std::string catalog = "data/catalog.json";
  std::string variant = "M0";
  bool simplified = false;
  std::size_t k = 0;
  std::string clusters;

  void add(CLI::App* app) {
    app->add_option("--catalog", catalog, "technology catalog JSON");
    app->add_option("--variant", variant, "M0, M1 or Full");
    app->add_flag("--simplified", simplified, "drop fixed costs, minimum capacities, part-load minima and grid cost");
    app->add_option("--k", k, "cluster count (ignored for Full)");
    app->add_option("--clusters", clusters, "directory with representatives.csv and assignment.csv");
  }
};

struct Built {
  MilpModel model;
  TimeData td;
  Catalog catalog;
  BuildOptions options;
};

Built build_model(const DataOpts& d, const ClusterOpts& c, const ModelOpts& m) {
  Built b;
  b.catalog = load_catalog(m.catalog);
  b.options = BuildOptions{parse_variant(m.variant), m.simplified};
  if (b.options.variant == Variant::Full) {
    b.td = full_time_data(d.load());
  } else {
    ClusterModel cm;
    if (!m.clusters.empty()) {
      cm = read_cluster_model(m.clusters);
    } else {
      const Granularity g = parse_granularity(c.granularity);
      if (b.options.variant == Variant::M0 && g == Granularity::Hour)
        throw std::invalid_argument("variant M0 requires day clusters: cyclic storage over single-hour clusters is meaningless");
      if (m.k == 0) throw std::invalid_argument("--k is required for clustered variants");
      cm = fit(d.load(), c.fit_options(m.k));
    }
    if (b.options.variant == Variant::M0 && cm.granularity == Granularity::Hour)
      throw std::invalid_argument("variant M0 requires day clusters: cyclic storage over single-hour clusters is meaningless");
    b.td = time_data(cm);
  }
  b.model = build(b.td, b.catalog, b.options);
  return b;
}

void print_stats(const MilpModel& m) {
  std::printf("variables %zu (integer %zu), constraints %zu\n", m.num_vars(), m.num_integer(), m.num_rows());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-series aggregation and investment model for zero emission neighborhoods"};
  app.require_subcommand(1);

  // synth
  DataOpts synth_data;
  std::string synth_out = "data/synthetic.csv";
  auto* synth = app.add_subcommand("synth", "write a synthetic hourly bundle");
  synth->add_option("--seed", synth_data.seed, "generator seed");
  synth->add_option("--horizon", synth_data.horizon, "hours, multiple of 24");
  synth->add_option("--buildings", synth_data.buildings, "building count");
  synth->add_option("--out", synth_out, "output CSV");

  // cluster
  DataOpts cl_data;
  ClusterOpts cl_opts;
  std::size_t cl_k = 10;
  std::string cl_out = "out/clusters";
  auto* cluster = app.add_subcommand("cluster", "cluster a bundle and write representatives.csv and assignment.csv");
  cl_data.add(cluster);
  cl_opts.add(cluster);
  cluster->add_option("--k", cl_k, "cluster count");
  cluster->add_option("--out", cl_out, "output directory");

  // sweep
  DataOpts sw_data;
  ClusterOpts sw_opts;
  std::string sw_k = "10:100:10";
  std::string sw_out = "out/sweep";
  auto* sweep_cmd = app.add_subcommand("sweep", "error metrics over a range of cluster counts");
  sw_data.add(sweep_cmd);
  sw_opts.add(sweep_cmd);
  sweep_cmd->add_option("--k", sw_k, "start:stop:step or a comma list");
  sweep_cmd->add_option("--out", sw_out, "output directory (sweep.csv, plotdata/)");

  // build
  DataOpts bd_data;
  ClusterOpts bd_cl;
  ModelOpts bd_model;
  std::string bd_out = "out/model.mps";
  auto* build_cmd = app.add_subcommand("build", "build the investment model and write it as MPS");
  bd_data.add(build_cmd);
  bd_cl.add(build_cmd);
  bd_model.add(build_cmd);
  build_cmd->add_option("--out", bd_out, "MPS file");

  // solve
  DataOpts sv_data;
  ClusterOpts sv_cl;
  ModelOpts sv_model;
  std::string sv_export, sv_solution, sv_external;
  bool sv_no_embedded = false;
  MilpOptions sv_milp;
  sv_milp.time_limit = 3600.0;
  auto* solve_cmd = app.add_subcommand("solve", "build and solve the investment model");
  sv_data.add(solve_cmd);
  sv_cl.add(solve_cmd);
  sv_model.add(solve_cmd);
  solve_cmd->add_option("--export", sv_export, "also write the model as MPS");
  solve_cmd->add_flag("--no-embedded", sv_no_embedded, "skip the embedded solver");
  solve_cmd->add_option("--external", sv_external, "external solver command with {mps} and {sol} placeholders");
  solve_cmd->add_option("--solution", sv_solution, "write name,value pairs of the solution");
  solve_cmd->add_option("--gap", sv_milp.gap_tol, "relative gap tolerance");
  solve_cmd->add_option("--time-limit", sv_milp.time_limit, "seconds");
  solve_cmd->add_option("--node-limit", sv_milp.node_limit, "branch-and-bound nodes");

  // experiment
  std::string ex_config = "data/experiment.json";
  std::string ex_out;
  std::size_t ex_threads = 0;
  bool ex_threads_set = false;
  auto* exp_cmd = app.add_subcommand("experiment", "deviation and runtime grid against the full-horizon reference");
  exp_cmd->add_option("--config", ex_config, "experiment config JSON");
  exp_cmd->add_option("--out", ex_out, "output directory (overrides the config)");
  exp_cmd->add_option("--threads", ex_threads, "parallel grid cells (overrides the config)")
      ->each([&](const std::string&) { ex_threads_set = true; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*synth) {
      write_bundle(synth_bundle(synth_data.seed, synth_data.horizon, synth_data.buildings), synth_out);
      std::printf("wrote %s\n", synth_out.c_str());
    } else if (*cluster) {
      const TimeSeriesBundle b = cl_data.load();
      const ClusterModel m = fit(b, cl_opts.fit_options(cl_k));
      write_cluster_model(m, cl_out);
      const MetricsReport r = evaluate(m, b);
      std::printf("K=%zu mean NRMSD %.6f, wrote %s\n", m.k, r.mean_nrmsd, cl_out.c_str());
    } else if (*sweep_cmd) {
      const TimeSeriesBundle b = sw_data.load();
      const FitOptions f = sw_opts.fit_options(0);
      SweepOptions so{f.granularity, f.algorithm, f.normalization, f.heuristic, parse_k_list(sw_k), f.seed, f.restarts};
      const auto reports = sweep(b, so);
      write_sweep_csv(reports, std::filesystem::path(sw_out) / "sweep.csv");
      write_plotdata(reports, std::filesystem::path(sw_out) / "plotdata");
      std::printf("%zu cluster counts, wrote %s\n", reports.size(), sw_out.c_str());
    } else if (*build_cmd) {
      const Built b = build_model(bd_data, bd_cl, bd_model);
      print_stats(b.model);
      export_mps(b.model, bd_out);
      std::printf("wrote %s\n", bd_out.c_str());
    } else if (*solve_cmd) {
      const Built b = build_model(sv_data, sv_cl, sv_model);
      print_stats(b.model);
      if (!sv_export.empty()) {
        export_mps(b.model, sv_export);
        std::printf("wrote %s\n", sv_export.c_str());
      }
      if (sv_no_embedded && sv_external.empty()) return 0;
      const SolveReport rep = sv_external.empty()
                                  ? solve_milp(b.model, sv_milp)
                                  : solve_external(b.model, sv_external, std::filesystem::path("out") / "external");
      std::printf("status %s objective %s gap %g nodes %zu runtime %.3f s\n", std::string(to_string(rep.status)).c_str(),
                  rep.has_solution() ? format_double(rep.objective).c_str() : "-", rep.gap, rep.nodes, rep.runtime);
      if (rep.has_solution()) {
        const SolutionCheck sc = verify_solution(b.model, rep.values, b.td, b.catalog, b.options);
        std::printf("solution check: %s\n", sc.ok() ? "passed" : sc.failures.front().c_str());
        if (!sv_solution.empty()) {
          auto out = open_output(sv_solution);
          out << "name,value\n";
          for (std::size_t j = 0; j < b.model.num_vars(); ++j)
            out << b.model.variables()[j].name << ',' << format_double(rep.values[j]) << '\n';
        }
      }
      return rep.status == SolveStatus::Optimal ? 0 : 2;
    } else if (*exp_cmd) {
      ExperimentConfig cfg = load_experiment_config(ex_config);
      if (!ex_out.empty()) cfg.output = ex_out;
      if (ex_threads_set) cfg.threads = ex_threads;
      const TimeSeriesBundle b =
          cfg.dataset ? load_bundle(*cfg.dataset) : synth_bundle(cfg.synth_seed, cfg.horizon, cfg.buildings);
      const Catalog cat = load_catalog(cfg.catalog);
      const ExperimentResult res =
          run_experiment(cfg, b, cat, [](const std::string& line) { std::fprintf(stderr, "%s\n", line.c_str()); });
      write_experiment(res, cfg, cfg.output);
      std::printf("%zu cells in %.1f s, config %s, wrote %s\n", res.cells.size(), res.wall_time,
                  res.config_hash.c_str(), cfg.output.string().c_str());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
