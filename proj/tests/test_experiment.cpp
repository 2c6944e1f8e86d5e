#include <cmath>

#include "doctest.h"
#include "support.hpp"
#include "zen/experiment.hpp"

using namespace zen;
using zen::test::TempDir;

namespace {

// Three days, every day its own cluster: clustered models equal the references.
ExperimentConfig self_reference() {
  ExperimentConfig c;
  c.horizon = 72;
  c.buildings = 1;
  c.algorithms = {Algorithm::KMeans, Algorithm::KMedoids};
  c.normalizations = {Normalization::Range};
  c.heuristic = false;
  c.k_days = {3, 4};
  c.k_hours = {72};
  c.variants = {Variant::M0, Variant::M1};
  c.restarts = 1;
  c.threads = 1;
  return c;
}

}  // namespace

TEST_CASE("percent deviation") {
  CHECK(percent_deviation(99.0, 100.0) == doctest::Approx(-1.0));
  CHECK(percent_deviation(-110.0, -100.0) == doctest::Approx(10.0));
  CHECK_THROWS_AS(percent_deviation(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("config parsing, validation and hash") {
  const auto c = load_experiment_config("data/experiment.json");
  CHECK(c.k_days == std::vector<std::size_t>{4, 5, 6, 24, 30, 36});
  CHECK(c.k_hours == std::vector<std::size_t>{96, 120, 144});
  CHECK(c.horizon == 720);
  CHECK_NOTHROW(c.validate());

  const auto again = parse_experiment_config(to_json(c));
  CHECK(to_json(again) == to_json(c));
  CHECK(config_hash(again) == config_hash(c));
  CHECK(config_hash(c).size() == 40);

  auto other = c;
  other.threads = 7;
  other.output = "elsewhere";
  CHECK(config_hash(other) == config_hash(c));
  other.cluster_seed = 3;
  CHECK(config_hash(other) != config_hash(c));

  CHECK_THROWS_AS(parse_experiment_config("{\"k_dayz\": [4]}"), std::invalid_argument);
  CHECK_THROWS_AS(parse_experiment_config("[1, 2]"), std::invalid_argument);
  CHECK_THROWS_AS(parse_experiment_config("{\"variants\": [\"Full\"]}"), std::invalid_argument);
  CHECK_THROWS_AS(parse_experiment_config("{\"variants\": [\"M0\"], \"k_hours\": [96]}"), std::invalid_argument);
  CHECK_THROWS_AS(parse_experiment_config("{\"k_days\": [], \"k_hours\": []}"), std::invalid_argument);
}

TEST_CASE("self-referencing grid has zero deviation and reproducible tables") {
  const auto cfg = self_reference();
  const auto bundle = synth_bundle(cfg.synth_seed, cfg.horizon, cfg.buildings);
  const auto cat = load_catalog("data/catalog.json");
  const auto res = run_experiment(cfg, bundle, cat);
  REQUIRE(res.references.size() == 2);
  for (const auto& r : res.references) {
    CHECK(r.status == "optimal");
    CHECK(r.verified);
  }
  std::size_t zero = 0;
  for (const auto& c : res.cells) {
    if (c.k == 4) {
      CHECK(c.status == "skipped");
      CHECK_FALSE(c.has_deviation);
      continue;
    }
    REQUIRE(c.has_deviation);
    CHECK(c.verified);
    CHECK(std::abs(c.deviation) <= 2.0 * 100.0 * cfg.gap_tol);
    ++zero;
  }
  // Days for M0 and M1, hours for M1, both algorithms.
  CHECK(zero == 6);

  TempDir a, b;
  write_experiment(res, cfg, a.path());
  write_experiment(run_experiment(cfg, bundle, cat), cfg, b.path());
  for (const char* f : {"deviation.csv", "cells.csv", "meta.json"})
    CHECK_MESSAGE(zen::test::slurp(a / f) == zen::test::slurp(b / f), f);
  const auto dev = zen::test::slurp(a / "deviation.csv");
  CHECK(dev.rfind("variant,granularity,algorithm,normalization,3,4,72\n", 0) == 0);
  CHECK(dev.find("skipped") != std::string::npos);
  CHECK(std::filesystem::exists(a / "runtime.csv"));
  CHECK(zen::test::slurp(a / "meta.json").find(res.config_hash) != std::string::npos);
}
