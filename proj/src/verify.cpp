#include "zen/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace zen {

using names::var;

SolutionCheck verify_solution(const MilpModel& model, const std::vector<double>& x, const TimeData& td,
                              const Catalog& catalog_in, const BuildOptions& options, double tol) {
  const Catalog catalog = options.simplified ? simplify(catalog_in) : catalog_in;
  SolutionCheck sc;
  sc.rows = check_feasibility(model, x);
  auto fail = [&](const std::string& what, double by) {
    std::ostringstream os;
    os << what << " (by " << by << ")";
    sc.failures.push_back(os.str());
  };
  if (!sc.rows.ok(tol)) fail("row/bound/integrality violation at " + sc.rows.worst, sc.rows.max_row_violation);

  auto val = [&](const std::string& name) {
    const int c = model.col(name);
    if (c < 0) throw std::invalid_argument("verify_solution: model has no variable '" + name + "'");
    return x[static_cast<std::size_t>(c)];
  };

  const std::size_t steps = td.steps();
  const double alpha = catalog.econ.alpha_zen;
  bool has_plant = false;
  for (const auto& t : catalog.techs) has_plant = has_plant || t.level == Level::Plant;
  std::vector<std::string> sites = td.buildings;
  if (has_plant) sites.emplace_back(names::kPlant);

  // Zero emission balance, summed from scratch.
  double emitted = 0.0, compensated = 0.0;
  for (std::size_t tau = 0; tau < steps; ++tau) {
    const double w = td.weight[tau];
    const double phi = td.co2[tau];
    for (const auto& s : sites) {
      emitted += w * phi * val(var("imp", s, tau));
      compensated += w * phi * val(var("exp", s, tau));
    }
    for (const auto& t : catalog.techs) {
      for (const auto& s : sites) {
        const bool plant = s == names::kPlant;
        if (plant != (t.level == Level::Plant)) continue;
        if (t.kind == TechKind::Boiler || t.kind == TechKind::Chp)
          emitted += w * catalog.econ.fuels.at(t.fuel).co2 * val(var("f", t.id, s, tau));
        if (t.kind == TechKind::Storage && t.stores == "el") {
          emitted += w * phi * val(var("gimp", t.id, s, tau));
          compensated += w * phi * t.eta_storage *
                         (alpha * val(var("gexp", t.id, s, tau)) + val(var("pexp", t.id, s, tau)));
        }
      }
    }
  }
  sc.zeb_slack = compensated - emitted;
  if (sc.zeb_slack < -tol * std::max({1.0, emitted, compensated})) fail("zero emission balance violated", -sc.zeb_slack);

  // Capacities and their binaries.
  for (const auto& t : catalog.techs)
    for (const auto& s : sites) {
      const bool plant = s == names::kPlant;
      if (plant != (t.level == Level::Plant)) continue;
      const double cap = val(var("x", t.id, s));
      const double b = val(var("b", t.id, s));
      const double scale = std::max(1.0, t.x_max);
      double err = 0.0;
      if (cap > tol * scale) {
        err = std::max({err, t.x_min - cap, cap - t.x_max});
        if (b < 0.5) err = std::max(err, cap);
        if (plant && val("b_hg") < 0.5) err = std::max(err, cap);
      }
      err = std::max(err, -cap);
      sc.max_capacity_error = std::max(sc.max_capacity_error, err / scale);
    }
  if (sc.max_capacity_error > tol) fail("capacity outside its semi-continuous domain", sc.max_capacity_error);

  // Heat pumps: conversion and shared input limit.
  for (const auto& t : catalog.techs) {
    if (t.kind != TechKind::HeatPump) continue;
    const CopTables cop = precompute_cop(td.temperature, t);
    for (const auto& s : sites) {
      const bool plant = s == names::kPlant;
      if (plant != (t.level == Level::Plant)) continue;
      const double cap = val(var("x", t.id, s));
      for (std::size_t tau = 0; tau < steps; ++tau) {
        double load = 0.0;
        auto conv = [&](const char* q, const char* d, double c, double pmax) {
          const int qc = model.col(var(q, t.id, s, tau));
          if (qc < 0) return;
          const double qv = x[static_cast<std::size_t>(qc)];
          const double dv = val(var(d, t.id, s, tau));
          sc.max_cop_error = std::max(sc.max_cop_error, std::abs(dv - qv / c) / std::max(1.0, qv));
          load += dv / pmax;
        };
        conv("q", "d", cop.cop_sh[tau], cop.pmax_sh);
        conv("q_sh", "d_sh", cop.cop_sh[tau], cop.pmax_sh);
        conv("q_dhw", "d_dhw", cop.cop_dhw[tau], cop.pmax_dhw);
        sc.max_hp_excess = std::max(sc.max_hp_excess, (load - cap) / std::max(1.0, cap));
      }
    }
  }
  if (sc.max_cop_error > tol) fail("heat-pump input does not match output over COP", sc.max_cop_error);
  if (sc.max_hp_excess > tol) fail("heat-pump input limit exceeded", sc.max_hp_excess);

  // Storage chains: recursion, closure and level bounds.
  const bool chained = options.variant == Variant::M1;
  for (const auto& t : catalog.techs) {
    if (t.kind != TechKind::Storage) continue;
    for (const auto& s : td.buildings) {
      const double cap = val(var("x", t.id, s));
      struct Chain {
        std::string sym;
        std::vector<std::string> ch, dch;
      };
      std::vector<Chain> chains;
      if (t.stores == "el") {
        chains.push_back({"vg", {"gimp"}, {"gdl", "gexp"}});
        chains.push_back({"vp", {"pch"}, {"pdl", "pexp"}});
      } else {
        chains.push_back({"v", {"ch"}, {"dch"}});
      }
      auto flow = [&](const std::vector<std::string>& syms, std::size_t tau) {
        double f = 0.0;
        for (const auto& sym : syms) f += val(var(sym, t.id, s, tau));
        return f;
      };
      const std::size_t per = chained ? td.horizon() + 1 : td.block + 1;
      const std::size_t cycles = chained ? 1 : td.clusters;
      std::vector<double> total(per * cycles, 0.0);
      for (const auto& c : chains) {
        for (std::size_t k = 0; k < cycles; ++k) {
          const std::size_t base = k * per;
          for (std::size_t p = 0; p < per; ++p) {
            const double v = val(var(c.sym, t.id, s, base + p));
            total[base + p] += v;
            sc.max_level_excess = std::max(sc.max_level_excess, -v / std::max(1.0, cap));
            if (p == 0) continue;
            const std::size_t tau = chained ? td.horizon_map[p - 1] : k * td.block + p - 1;
            const double prev = val(var(c.sym, t.id, s, base + p - 1));
            const double resid = v - prev - t.eta_storage * flow(c.ch, tau) + flow(c.dch, tau);
            sc.max_level_error = std::max(sc.max_level_error, std::abs(resid) / std::max(1.0, cap));
          }
          const double start = val(var(c.sym, t.id, s, base));
          const double end = val(var(c.sym, t.id, s, base + per - 1));
          sc.max_closure_error = std::max(sc.max_closure_error, std::abs(start - end) / std::max(1.0, cap));
        }
      }
      for (double v : total) sc.max_level_excess = std::max(sc.max_level_excess, (v - cap) / std::max(1.0, cap));
    }
  }
  if (sc.max_level_error > tol) fail("storage level recursion violated", sc.max_level_error);
  if (sc.max_closure_error > tol) fail("storage closure violated", sc.max_closure_error);
  if (sc.max_level_excess > tol) fail("storage level outside [0, capacity]", sc.max_level_excess);
  return sc;
}

}  // namespace zen
