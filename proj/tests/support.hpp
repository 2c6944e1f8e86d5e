#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <unistd.h>

#include "zen/milp.hpp"

namespace zen::test {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("zen_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Time data for one building "a" with `steps` timesteps grouped in clusters
// of `block`. Loads, prices and weather are constant unless overwritten.
inline TimeData toy_time(std::size_t clusters, std::size_t block, double weight = 1.0) {
  TimeData td;
  td.block = block;
  td.clusters = clusters;
  const std::size_t n = clusters * block;
  td.weight.assign(n, weight);
  td.xi.resize(clusters);
  for (std::size_t c = 0; c < clusters; ++c) td.xi[c] = c;
  td.horizon_map.resize(n);
  for (std::size_t t = 0; t < n; ++t) td.horizon_map[t] = t;
  td.buildings = {"a"};
  td.el = {std::vector<double>(n, 0.0)};
  td.dhw = {std::vector<double>(n, 0.0)};
  td.sh = {std::vector<double>(n, 0.0)};
  td.temperature.assign(n, 0.0);
  td.irr.assign(n, 0.0);
  td.spot.assign(n, 0.0);
  td.co2.assign(n, 0.0);
  return td;
}

// Economics with eps_tot = 1 so objective coefficients read directly.
inline EconomicParams unit_econ() {
  EconomicParams e;
  e.eps_tot = 1.0;
  e.fuels["gas"] = Fuel{0.0, 0.0};
  return e;
}

inline TechnologySpec boiler(std::string id = "boiler") {
  TechnologySpec t;
  t.id = std::move(id);
  t.kind = TechKind::Boiler;
  t.x_max = 100.0;
  t.eff_heat = 0.9;
  t.fuel = "gas";
  return t;
}

inline TechnologySpec eboiler(std::string id = "eb") {
  TechnologySpec t;
  t.id = std::move(id);
  t.kind = TechKind::ElectricBoiler;
  t.x_max = 100.0;
  t.eff_heat = 1.0;
  return t;
}

inline TechnologySpec battery(std::string id = "bat") {
  TechnologySpec t;
  t.id = std::move(id);
  t.kind = TechKind::Storage;
  t.stores = "el";
  t.x_max = 100.0;
  t.eta_storage = 0.9;
  t.rate = 0.5;
  return t;
}

inline TechnologySpec heat_store(std::string id = "tank") {
  TechnologySpec t;
  t.id = std::move(id);
  t.kind = TechKind::Storage;
  t.stores = "sh";
  t.x_max = 100.0;
  t.eta_storage = 1.0;
  t.rate = 1.0;
  return t;
}

inline TechnologySpec solar(std::string id = "pv") {
  TechnologySpec t;
  t.id = std::move(id);
  t.kind = TechKind::Solar;
  t.x_max = 100.0;
  t.eff_el = 1.0;
  return t;
}

}  // namespace zen::test
