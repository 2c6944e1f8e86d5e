#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "support.hpp"
#include "zen/metrics.hpp"

using namespace zen;

namespace {

// Second, loop-free formulation used as an oracle.
double rmsd_oracle(const Series& a, const Series& b) {
  const double ss = std::inner_product(a.begin(), a.end(), b.begin(), 0.0, std::plus<>(),
                                       [](double x, double y) { return (y - x) * (y - x); });
  return std::sqrt(ss / static_cast<double>(a.size()));
}

}  // namespace

TEST_CASE("rmsd") {
  CHECK(rmsd({1, 2, 3}, {1, 2, 3}) == 0.0);
  CHECK(rmsd({1, 3}, {2, 2}) == 1.0);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  Series a(720), b(720);
  for (std::size_t i = 0; i < 720; ++i) {
    a[i] = u(rng);
    b[i] = u(rng);
  }
  CHECK(rmsd(a, b) == doctest::Approx(rmsd_oracle(a, b)).epsilon(1e-13));
  CHECK_THROWS_AS(rmsd({1.0}, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("nrmsd divides by the original range") {
  CHECK(nrmsd({0, 4}, {1, 3}) == doctest::Approx(0.25));
  CHECK(nrmsd({2, 2}, {3, 3}) == 0.0);
}

TEST_CASE("yae") {
  CHECK(yae({1, 2, 3}, {1, 2, 3}) == 0.0);
  Series a{1.5, -2.0, 7.25}, b = a;
  for (auto& v : b) v += 0.75;
  CHECK(yae(a, b) == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(yae({1, 1}, {0, 0}) == -1.0);
}

TEST_CASE("saturated models reconstruct exactly") {
  const auto b = synth_bundle(1, 720, 2);
  for (auto g : {Granularity::Day, Granularity::Hour}) {
    for (auto alg : {Algorithm::KMeans, Algorithm::KMedoids}) {
      FitOptions o;
      o.granularity = g;
      o.algorithm = alg;
      o.k = g == Granularity::Day ? 30 : 720;
      const auto m = fit(b, o);
      const auto rep = evaluate(m, b);
      for (const auto& s : rep.series) {
        CHECK(s.rmsd == 0.0);
        CHECK(s.yae == 0.0);
      }
      CHECK(reconstruct(m, b) == b);
    }
  }
}

TEST_CASE("day reconstruction layout") {
  const auto b = synth_bundle(1, 720, 2);
  FitOptions o;
  o.k = 5;
  const auto m = fit(b, o);
  const auto rec = reconstruct_series(m);
  const std::size_t s = m.series_index("spot_price");
  for (std::size_t t : {0u, 25u, 300u, 719u}) CHECK(rec[s][t] == m.value(m.xi[t / 24], s, t % 24));
}

TEST_CASE("single hour cluster is flat") {
  const auto b = synth_bundle(1, 48, 1);
  FitOptions o;
  o.granularity = Granularity::Hour;
  o.k = 1;
  const auto m = fit(b, o);
  const auto rec = reconstruct_series(m);
  for (const auto& series : rec)
    for (double v : series) CHECK(v == series[0]);
}

TEST_CASE("k-means keeps the yearly average") {
  const auto b = synth_bundle(1, 720, 2);
  for (auto g : {Granularity::Day, Granularity::Hour}) {
    SweepOptions o;
    o.granularity = g;
    o.ks = g == Granularity::Day ? std::vector<std::size_t>{4, 12, 29} : std::vector<std::size_t>{50, 144};
    for (const auto& rep : sweep(b, o)) {
      REQUIRE(rep.series.size() == 10);
      for (std::size_t s = 0; s < rep.series.size(); ++s) {
        const auto& orig = *clustered_series(b)[s];
        double mean_abs = 0.0;
        for (double v : orig) mean_abs += std::abs(v);
        mean_abs /= static_cast<double>(orig.size());
        CHECK(std::abs(rep.series[s].yae) <= 1e-9 * mean_abs);
      }
    }
  }
}

TEST_CASE("mean nrmsd is the arithmetic mean") {
  const auto b = synth_bundle(1, 720, 2);
  FitOptions o;
  o.algorithm = Algorithm::KMedoids;
  o.k = 6;
  const auto rep = evaluate(fit(b, o), b);
  double sum = 0.0;
  for (const auto& s : rep.series) {
    CHECK(s.rmsd >= 0.0);
    CHECK(std::isfinite(s.yae));
    sum += s.nrmsd;
  }
  CHECK(rep.mean_nrmsd == doctest::Approx(sum / static_cast<double>(rep.series.size())).epsilon(1e-14));
}

TEST_CASE("sweep output is one report per K and byte deterministic") {
  zen::test::TempDir dir;
  const auto b = synth_bundle(1, 720, 2);
  SweepOptions o;
  o.algorithm = Algorithm::KMedoids;
  for (std::size_t k = 10; k <= 30; k += 10) o.ks.push_back(k);
  const auto a = sweep(b, o);
  CHECK(a.size() == 3);
  for (const auto& s : a.back().series) CHECK(s.rmsd == 0.0);
  write_sweep_csv(a, dir / "a.csv");
  write_sweep_csv(sweep(b, o), dir / "b.csv");
  const auto text = zen::test::slurp(dir / "a.csv");
  CHECK(text == zen::test::slurp(dir / "b.csv"));
  CHECK(text.rfind("K,algorithm,norm,heuristic,granularity,series,rmsd,nrmsd,yae,seed\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 3 * 10);
  write_plotdata(a, dir / "plot");
  CHECK(std::filesystem::exists(dir / "plot" / "mean_nrmsd.csv"));
}
