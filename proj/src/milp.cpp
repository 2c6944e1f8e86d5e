#include "zen/milp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace zen {

std::string_view to_string(TechKind k) {
  switch (k) {
    case TechKind::Solar: return "solar";
    case TechKind::HeatPump: return "heat_pump";
    case TechKind::ElectricBoiler: return "electric_boiler";
    case TechKind::Boiler: return "boiler";
    case TechKind::Chp: return "chp";
    case TechKind::Storage: return "storage";
  }
  return "?";
}

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::M0: return "M0";
    case Variant::M1: return "M1";
    case Variant::Full: return "Full";
  }
  return "?";
}

TechKind parse_tech_kind(std::string_view s) {
  for (auto k : {TechKind::Solar, TechKind::HeatPump, TechKind::ElectricBoiler, TechKind::Boiler, TechKind::Chp,
                 TechKind::Storage})
    if (s == to_string(k)) return k;
  throw std::invalid_argument("unknown technology kind '" + std::string(s) + "'");
}

Variant parse_variant(std::string_view s) {
  if (s == "M0" || s == "m0") return Variant::M0;
  if (s == "M1" || s == "m1") return Variant::M1;
  if (s == "Full" || s == "full") return Variant::Full;
  throw std::invalid_argument("unknown variant '" + std::string(s) + "' (expected M0, M1 or Full)");
}

double discount_factor(double r, int years) {
  if (!(r > 0.0) || years < 1) throw std::invalid_argument("discount_factor: need r > 0 and years >= 1");
  double eps = 0.0;
  double f = 1.0;
  for (int y = 1; y <= years; ++y) {
    f /= 1.0 + r;
    eps += f;
  }
  return eps;
}

double heat_pump_cop(double eta_ii, double t_supply, double t_out, double cop_max, bool* clamped) {
  const double ts = t_supply + 273.15;
  const double to = t_out + 273.15;
  if (clamped) *clamped = false;
  if (to >= ts) {
    if (clamped) *clamped = true;
    return cop_max;
  }
  return std::clamp(eta_ii * ts / (ts - to), 1.0, cop_max);
}

CopTables precompute_cop(const std::vector<double>& temperature, const TechnologySpec& hp) {
  if (hp.kind != TechKind::HeatPump) throw std::invalid_argument("precompute_cop: '" + hp.id + "' is not a heat pump");
  CopTables c;
  c.cop_sh.reserve(temperature.size());
  c.cop_dhw.reserve(temperature.size());
  for (double t : temperature) {
    bool a = false, b = false;
    c.cop_sh.push_back(heat_pump_cop(hp.eta_ii, hp.t_supply_sh, t, hp.cop_max, &a));
    c.cop_dhw.push_back(heat_pump_cop(hp.eta_ii, hp.t_supply_dhw, t, hp.cop_max, &b));
    if (a || b) ++c.clamped;
  }
  c.pmax_sh = 1.0 / heat_pump_cop(hp.eta_ii, hp.t_supply_sh, hp.t_rating, hp.cop_max);
  c.pmax_dhw = 1.0 / heat_pump_cop(hp.eta_ii, hp.t_supply_dhw, hp.t_rating, hp.cop_max);
  return c;
}

Catalog simplify(const Catalog& c) {
  Catalog s = c;
  for (auto& t : s.techs) {
    t.fix_cost = 0.0;
    t.x_min = 0.0;
    t.part_load_min = 0.0;
  }
  s.econ.c_hg = 0.0;
  return s;
}

std::size_t map_t_kappa(std::size_t t, const std::vector<std::size_t>& xi, Granularity g) {
  const std::size_t b = block_length(g);
  if (t >= xi.size() * b) throw std::out_of_range("map_t_kappa: hour outside the horizon");
  const std::size_t object = t / b;
  return xi[object] * b + (t - object * b);
}

TimeData time_data(const ClusterModel& model) {
  TimeData td;
  td.block = model.block();
  td.clusters = static_cast<std::size_t>(model.representatives.rows());
  td.xi = model.xi;
  const std::size_t steps = td.clusters * td.block;
  td.weight.resize(steps);
  for (std::size_t c = 0; c < td.clusters; ++c)
    for (std::size_t p = 0; p < td.block; ++p) td.weight[c * td.block + p] = static_cast<double>(model.sigma.at(c));
  td.horizon_map.resize(model.horizon());
  for (std::size_t t = 0; t < td.horizon_map.size(); ++t) td.horizon_map[t] = map_t_kappa(t, model.xi, model.granularity);

  auto series = [&](std::string_view name) {
    const std::size_t s = model.series_index(name);
    std::vector<double> v(steps);
    for (std::size_t c = 0; c < td.clusters; ++c)
      for (std::size_t p = 0; p < td.block; ++p) v[c * td.block + p] = model.value(c, s, p);
    return v;
  };
  for (const auto& name : model.series)
    if (name.rfind("el_", 0) == 0) td.buildings.push_back(name.substr(3));
  for (const auto& b : td.buildings) {
    td.el.push_back(series("el_" + b));
    td.dhw.push_back(series("dhw_" + b));
    td.sh.push_back(series("sh_" + b));
  }
  td.temperature = series("temperature");
  td.irr = series("irr_tilt");
  td.spot = series("spot_price");
  td.co2 = series("co2_el");
  return td;
}

TimeData full_time_data(const TimeSeriesBundle& bundle) {
  if (!bundle.irr_tilt) throw std::invalid_argument("full_time_data: bundle has no tilted irradiance");
  TimeData td;
  const std::size_t h = bundle.horizon;
  td.block = h;
  td.clusters = 1;
  td.xi = {0};
  td.weight.assign(h, 1.0);
  td.horizon_map.resize(h);
  for (std::size_t t = 0; t < h; ++t) td.horizon_map[t] = t;
  for (const auto& b : bundle.buildings) {
    td.buildings.push_back(b.id);
    td.el.push_back(b.el);
    td.dhw.push_back(b.dhw);
    td.sh.push_back(b.sh);
  }
  td.temperature = bundle.temperature;
  td.irr = *bundle.irr_tilt;
  td.spot = bundle.spot_price;
  td.co2 = bundle.co2_el;
  return td;
}

namespace names {
std::string var(std::string_view sym, std::string_view a) {
  return std::string(sym) + "[" + std::string(a) + "]";
}
std::string var(std::string_view sym, std::string_view a, std::size_t t) {
  return std::string(sym) + "[" + std::string(a) + "," + std::to_string(t) + "]";
}
std::string var(std::string_view sym, std::string_view a, std::string_view b) {
  return std::string(sym) + "[" + std::string(a) + "," + std::string(b) + "]";
}
std::string var(std::string_view sym, std::string_view a, std::string_view b, std::size_t t) {
  return std::string(sym) + "[" + std::string(a) + "," + std::string(b) + "," + std::to_string(t) + "]";
}
}  // namespace names

namespace {

using names::var;

struct Site {
  std::string name;  // building id or "plant"
  bool plant = false;
  std::size_t index = 0;  // building index
};

class Builder {
public:
  Builder(const TimeData& td, const Catalog& cat, const BuildOptions& opt) : td_(td), cat_(cat), opt_(opt) {
    eps_ = cat.econ.discount();
    steps_ = td.steps();
    const std::size_t nb = td.buildings.size();
    bal_el_.assign(nb, std::vector<std::vector<Term>>(steps_));
    bal_sh_ = bal_el_;
    bal_dhw_ = bal_el_;
    exp_lim_.assign(nb + 1, std::vector<std::vector<Term>>(steps_));
    for (const auto& t : cat.techs)
      if (t.level == Level::Plant) has_plant_ = true;
    if (has_plant_) {
      plant_heat_.assign(steps_, {});
      plant_el_.assign(steps_, {});
    }
  }

  MilpModel run();

private:
  // Objective weight of an operating quantity at tau.
  double op(std::size_t tau) const { return td_.weight[tau] / eps_; }

  void add_grid(const Site& s);
  void add_tech(const TechnologySpec& t, const Site& s);
  void add_partload(const TechnologySpec& t, const Site& s, std::size_t tau, const std::vector<Term>& output, int x);
  void add_storage(const TechnologySpec& t, const Site& s, int x);
  // Adds a level chain for one (virtual) storage. Returns level columns per chain index.
  std::vector<int> add_chain(const std::string& sym, const TechnologySpec& t, const Site& s,
                             const std::vector<std::vector<Term>>& charge, const std::vector<std::vector<Term>>& discharge);
  void add_heating_grid();
  void add_balances();

  std::vector<Term>& el(const Site& s, std::size_t tau) {
    return s.plant ? plant_el_[tau] : bal_el_[s.index][tau];
  }
  // Exports plus production-side battery charging, less on-site generation.
  std::vector<Term>& exp_lim(const Site& s, std::size_t tau) {
    return exp_lim_[s.plant ? td_.buildings.size() : s.index][tau];
  }

  const TimeData& td_;
  const Catalog& cat_;
  BuildOptions opt_;
  MilpModel m_;
  double eps_ = 1.0;
  std::size_t steps_ = 0;
  bool has_plant_ = false;
  int b_hg_ = -1;
  std::vector<std::vector<std::vector<Term>>> bal_el_, bal_sh_, bal_dhw_, exp_lim_;
  std::vector<std::vector<Term>> plant_heat_, plant_el_;
  std::vector<Term> zeb_;
  std::vector<bool> sh_served_, dhw_served_;
};

MilpModel Builder::run() {
  if (opt_.variant == Variant::M0 && td_.block < 2)
    throw std::invalid_argument("variant M0 requires day clusters: cyclic storage over single-hour clusters is meaningless");
  if (td_.co2.size() != steps_ || td_.spot.size() != steps_ || td_.irr.size() != steps_ ||
      td_.temperature.size() != steps_)
    throw std::invalid_argument("time data: series length differs from the number of timesteps");
  m_.variant = std::string(to_string(opt_.variant));

  b_hg_ = m_.add_variable("b_hg", VarKind::Binary, 0.0, 1.0);
  m_.add_objective(b_hg_, cat_.econ.c_hg);

  const std::size_t nb = td_.buildings.size();
  sh_served_.assign(nb, false);
  dhw_served_.assign(nb, false);
  for (std::size_t b = 0; b < nb; ++b) {
    Site s{td_.buildings[b], false, b};
    add_grid(s);
    for (const auto& t : cat_.techs)
      if (t.level == Level::Building) add_tech(t, s);
  }
  if (has_plant_) {
    Site s{std::string(names::kPlant), true, 0};
    add_grid(s);
    for (const auto& t : cat_.techs)
      if (t.level == Level::Plant) add_tech(t, s);
    add_heating_grid();
  }
  add_balances();
  m_.add_constraint("zeb", std::move(zeb_), Sense::LessEqual, 0.0);
  return std::move(m_);
}

void Builder::add_grid(const Site& s) {
  const auto& ec = cat_.econ;
  for (std::size_t tau = 0; tau < steps_; ++tau) {
    const int imp = m_.add_variable(var("imp", s.name, tau), VarKind::Continuous, 0.0, kInf);
    const int exp = m_.add_variable(var("exp", s.name, tau), VarKind::Continuous, 0.0, kInf);
    m_.add_objective(imp, op(tau) * (td_.spot[tau] + ec.p_grid + ec.p_ret));
    m_.add_objective(exp, -op(tau) * td_.spot[tau]);
    el(s, tau).push_back({imp, 1.0});
    el(s, tau).push_back({exp, -1.0});
    exp_lim(s, tau).push_back({exp, 1.0});
    zeb_.push_back({imp, td_.weight[tau] * td_.co2[tau]});
    zeb_.push_back({exp, -td_.weight[tau] * td_.co2[tau]});
  }
}

void Builder::add_tech(const TechnologySpec& t, const Site& s) {
  const std::string site = s.name;
  const int bin = m_.add_variable(var("b", t.id, site), VarKind::Binary, 0.0, 1.0);
  int x = -1;
  if (t.x_min > 0.0) {
    x = m_.add_semicontinuous(var("x", t.id, site), t.x_min, t.x_max, bin);
  } else {
    x = m_.add_variable(var("x", t.id, site), VarKind::Continuous, 0.0, t.x_max);
  }
  m_.add_objective(x, t.var_cost + t.maint_cost / eps_);
  m_.add_objective(bin, t.fix_cost);
  m_.add_constraint(var("inv_max", t.id, site), {{x, 1.0}, {bin, -t.x_max}}, Sense::LessEqual, 0.0);
  if (t.x_min > 0.0)
    m_.add_constraint(var("inv_min", t.id, site), {{x, 1.0}, {bin, -t.x_min}}, Sense::GreaterEqual, 0.0);
  if (s.plant)
    m_.add_constraint(var("inv_hg", t.id, site), {{x, 1.0}, {b_hg_, -t.x_max}}, Sense::LessEqual, 0.0);

  if (t.kind == TechKind::Storage) {
    add_storage(t, s, x);
    return;
  }

  const bool sh = !s.plant && t.serves_sh;
  const bool dhw = !s.plant && t.serves_dhw;
  if (!s.plant && t.kind != TechKind::Solar) {
    if (sh) sh_served_[s.index] = true;
    if (dhw) dhw_served_[s.index] = true;
  }

  CopTables cop;
  if (t.kind == TechKind::HeatPump) cop = precompute_cop(td_.temperature, t);

  const Fuel* fuel = nullptr;
  if (t.kind == TechKind::Boiler || t.kind == TechKind::Chp) {
    auto it = cat_.econ.fuels.find(t.fuel);
    if (it == cat_.econ.fuels.end()) throw std::invalid_argument("technology '" + t.id + "': no price for fuel '" + t.fuel + "'");
    fuel = &it->second;
  }

  for (std::size_t tau = 0; tau < steps_; ++tau) {
    // Heat outputs: two loads in buildings, one grid feed at the plant.
    std::vector<Term> heat;
    int q_sh = -1, q_dhw = -1, q = -1;
    auto make_heat = [&] {
      if (t.kind == TechKind::Solar) return;
      if (t.kind == TechKind::Chp && t.eff_heat <= 0.0) return;
      if (s.plant) {
        q = m_.add_variable(var("q", t.id, site, tau), VarKind::Continuous, 0.0, kInf);
        heat.push_back({q, 1.0});
        plant_heat_[tau].push_back({q, 1.0});
        return;
      }
      if (sh) {
        q_sh = m_.add_variable(var("q_sh", t.id, site, tau), VarKind::Continuous, 0.0, kInf);
        heat.push_back({q_sh, 1.0});
        bal_sh_[s.index][tau].push_back({q_sh, 1.0});
      }
      if (dhw) {
        q_dhw = m_.add_variable(var("q_dhw", t.id, site, tau), VarKind::Continuous, 0.0, kInf);
        heat.push_back({q_dhw, 1.0});
        bal_dhw_[s.index][tau].push_back({q_dhw, 1.0});
      }
    };
    make_heat();
    std::vector<Term> output;  // quantity bounded by capacity and part load

    switch (t.kind) {
      case TechKind::Solar: {
        const int g = m_.add_variable(var("g", t.id, site, tau), VarKind::Continuous, 0.0, kInf);
        m_.add_constraint(var("pv_cap", t.id, site, tau), {{g, 1.0}, {x, -t.eff_el * td_.irr[tau] / 1000.0}},
                          Sense::LessEqual, 0.0);
        el(s, tau).push_back({g, 1.0});
        exp_lim(s, tau).push_back({g, -1.0});
        break;
      }
      case TechKind::HeatPump: {
        std::vector<Term> cap;
        auto link = [&](int qcol, const char* dsym, const char* row, double c, double pmax) {
          const int d = m_.add_variable(var(dsym, t.id, site, tau), VarKind::Continuous, 0.0, kInf);
          m_.add_constraint(var(row, t.id, site, tau), {{d, 1.0}, {qcol, -1.0 / c}}, Sense::Equal, 0.0);
          el(s, tau).push_back({d, -1.0});
          cap.push_back({d, 1.0 / pmax});
        };
        if (q >= 0) link(q, "d", "cop", cop.cop_sh[tau], cop.pmax_sh);
        if (q_sh >= 0) link(q_sh, "d_sh", "cop_sh", cop.cop_sh[tau], cop.pmax_sh);
        if (q_dhw >= 0) link(q_dhw, "d_dhw", "cop_dhw", cop.cop_dhw[tau], cop.pmax_dhw);
        cap.push_back({x, -1.0});
        m_.add_constraint(var("hp_cap", t.id, site, tau), std::move(cap), Sense::LessEqual, 0.0);
        output = heat;
        break;
      }
      case TechKind::ElectricBoiler: {
        for (const auto& h : heat) el(s, tau).push_back({h.col, -1.0 / t.eff_heat});
        output = heat;
        break;
      }
      case TechKind::Boiler: {
        const int f = m_.add_variable(var("f", t.id, site, tau), VarKind::Continuous, 0.0, kInf);
        std::vector<Term> row = heat;
        row.push_back({f, -t.eff_heat});
        m_.add_constraint(var("fuel", t.id, site, tau), std::move(row), Sense::Equal, 0.0);
        m_.add_objective(f, op(tau) * fuel->price);
        zeb_.push_back({f, td_.weight[tau] * fuel->co2});
        output = heat;
        break;
      }
      case TechKind::Chp: {
        const int f = m_.add_variable(var("f", t.id, site, tau), VarKind::Continuous, 0.0, kInf);
        const int e = m_.add_variable(var("e", t.id, site, tau), VarKind::Continuous, 0.0, kInf);
        m_.add_constraint(var("fuel_el", t.id, site, tau), {{e, 1.0}, {f, -t.eff_el}}, Sense::Equal, 0.0);
        if (!heat.empty()) {
          std::vector<Term> row = heat;
          row.push_back({f, -t.eff_heat});
          m_.add_constraint(var("fuel_heat", t.id, site, tau), std::move(row), Sense::LessEqual, 0.0);
        }
        m_.add_objective(f, op(tau) * fuel->price);
        zeb_.push_back({f, td_.weight[tau] * fuel->co2});
        el(s, tau).push_back({e, 1.0});
        exp_lim(s, tau).push_back({e, -1.0});
        output = {{e, 1.0}};
        break;
      }
      case TechKind::Storage: break;
    }

    if (t.kind != TechKind::Solar && t.kind != TechKind::HeatPump) {
      std::vector<Term> cap = output;
      cap.push_back({x, -1.0});
      m_.add_constraint(var("cap", t.id, site, tau), std::move(cap), Sense::LessEqual, 0.0);
    }
    if (t.part_load_min > 0.0 && t.kind != TechKind::Solar) add_partload(t, s, tau, output, x);
  }
}

void Builder::add_partload(const TechnologySpec& t, const Site& s, std::size_t tau, const std::vector<Term>& output,
                           int x) {
  const int u = m_.add_variable(var("u", t.id, s.name, tau), VarKind::Binary, 0.0, 1.0);
  std::vector<Term> on = output;
  on.push_back({u, -t.x_max});
  m_.add_constraint(var("pl_on", t.id, s.name, tau), std::move(on), Sense::LessEqual, 0.0);
  std::vector<Term> lo = output;
  lo.push_back({x, -t.part_load_min});
  lo.push_back({u, -t.x_max});
  m_.add_constraint(var("pl_min", t.id, s.name, tau), std::move(lo), Sense::GreaterEqual, -t.x_max);
}

void Builder::add_storage(const TechnologySpec& t, const Site& s, int x) {
  if (s.plant) throw std::invalid_argument("storage '" + t.id + "': plant-level storages are not supported");
  const std::string site = s.name;
  const auto& ec = cat_.econ;
  if (t.stores == "el") {
    std::vector<std::vector<Term>> ch_g(steps_), dch_g(steps_), ch_p(steps_), dch_p(steps_);
    for (std::size_t tau = 0; tau < steps_; ++tau) {
      auto mk = [&](const char* sym) { return m_.add_variable(var(sym, t.id, site, tau), VarKind::Continuous, 0.0, kInf); };
      const int gimp = mk("gimp"), gdl = mk("gdl"), gexp = mk("gexp");
      const int pch = mk("pch"), pdl = mk("pdl"), pexp = mk("pexp");
      const double w = td_.weight[tau];
      m_.add_objective(gimp, op(tau) * (td_.spot[tau] + ec.p_grid + ec.p_ret));
      m_.add_objective(gexp, -op(tau) * td_.spot[tau]);
      m_.add_objective(pexp, -op(tau) * td_.spot[tau]);
      zeb_.push_back({gimp, w * td_.co2[tau]});
      zeb_.push_back({gexp, -w * td_.co2[tau] * t.eta_storage * ec.alpha_zen});
      zeb_.push_back({pexp, -w * td_.co2[tau] * t.eta_storage});
      auto& bal = bal_el_[s.index][tau];
      bal.push_back({gdl, 1.0});
      bal.push_back({pdl, 1.0});
      bal.push_back({pch, -1.0});
      exp_lim(s, tau).push_back({pch, 1.0});
      m_.add_constraint(var("st_ch_g", t.id, site, tau), {{gimp, 1.0}, {x, -t.rate}}, Sense::LessEqual, 0.0);
      m_.add_constraint(var("st_dch_g", t.id, site, tau), {{gdl, 1.0}, {gexp, 1.0}, {x, -t.rate}}, Sense::LessEqual, 0.0);
      m_.add_constraint(var("st_ch_p", t.id, site, tau), {{pch, 1.0}, {x, -t.rate}}, Sense::LessEqual, 0.0);
      m_.add_constraint(var("st_dch_p", t.id, site, tau), {{pdl, 1.0}, {pexp, 1.0}, {x, -t.rate}}, Sense::LessEqual, 0.0);
      ch_g[tau] = {{gimp, 1.0}};
      dch_g[tau] = {{gdl, 1.0}, {gexp, 1.0}};
      ch_p[tau] = {{pch, 1.0}};
      dch_p[tau] = {{pdl, 1.0}, {pexp, 1.0}};
    }
    const auto vg = add_chain("vg", t, s, ch_g, dch_g);
    const auto vp = add_chain("vp", t, s, ch_p, dch_p);
    for (std::size_t k = 0; k < vg.size(); ++k)
      m_.add_constraint(var("st_cap", t.id, site, k), {{vg[k], 1.0}, {vp[k], 1.0}, {x, -1.0}}, Sense::LessEqual, 0.0);
    return;
  }
  if (t.stores != "sh" && t.stores != "dhw")
    throw std::invalid_argument("storage '" + t.id + "': stores must be el, sh or dhw");
  auto& bal = t.stores == "sh" ? bal_sh_ : bal_dhw_;
  std::vector<std::vector<Term>> ch(steps_), dch(steps_);
  for (std::size_t tau = 0; tau < steps_; ++tau) {
    const int c = m_.add_variable(var("ch", t.id, site, tau), VarKind::Continuous, 0.0, kInf);
    const int d = m_.add_variable(var("dch", t.id, site, tau), VarKind::Continuous, 0.0, kInf);
    bal[s.index][tau].push_back({d, 1.0});
    bal[s.index][tau].push_back({c, -1.0});
    m_.add_constraint(var("st_ch", t.id, site, tau), {{c, 1.0}, {x, -t.rate}}, Sense::LessEqual, 0.0);
    m_.add_constraint(var("st_dch", t.id, site, tau), {{d, 1.0}, {x, -t.rate}}, Sense::LessEqual, 0.0);
    ch[tau] = {{c, 1.0}};
    dch[tau] = {{d, 1.0}};
  }
  const auto v = add_chain("v", t, s, ch, dch);
  for (std::size_t k = 0; k < v.size(); ++k)
    m_.add_constraint(var("st_cap", t.id, site, k), {{v[k], 1.0}, {x, -1.0}}, Sense::LessEqual, 0.0);
}

// Level index k: M0/Full use k = cluster * (block + 1) + position (position 0..block);
// M1 uses k = hour 0..H.
std::vector<int> Builder::add_chain(const std::string& sym, const TechnologySpec& t, const Site& s,
                                    const std::vector<std::vector<Term>>& charge,
                                    const std::vector<std::vector<Term>>& discharge) {
  std::vector<int> lv;
  auto step_row = [&](std::size_t k, int prev, int cur, std::size_t tau) {
    std::vector<Term> row{{cur, 1.0}, {prev, -1.0}};
    for (const auto& c : charge[tau]) row.push_back({c.col, -t.eta_storage * c.coef});
    for (const auto& d : discharge[tau]) row.push_back({d.col, d.coef});
    m_.add_constraint(var("st_lvl_" + sym, t.id, s.name, k), std::move(row), Sense::Equal, 0.0);
  };
  if (opt_.variant == Variant::M1) {
    const std::size_t h = td_.horizon();
    for (std::size_t k = 0; k <= h; ++k)
      lv.push_back(m_.add_variable(var(sym, t.id, s.name, k), VarKind::Continuous, 0.0, kInf));
    for (std::size_t k = 1; k <= h; ++k) step_row(k, lv[k - 1], lv[k], td_.horizon_map[k - 1]);
    m_.add_constraint(var("st_close_" + sym, t.id, s.name), {{lv[0], 1.0}, {lv[h], -1.0}}, Sense::Equal, 0.0);
    return lv;
  }
  const std::size_t n = td_.block + 1;
  for (std::size_t c = 0; c < td_.clusters; ++c) {
    for (std::size_t p = 0; p < n; ++p)
      lv.push_back(m_.add_variable(var(sym, t.id, s.name, c * n + p), VarKind::Continuous, 0.0, kInf));
    for (std::size_t p = 1; p < n; ++p)
      step_row(c * n + p, lv[c * n + p - 1], lv[c * n + p], c * td_.block + p - 1);
    m_.add_constraint(var("st_close_" + sym, t.id, s.name, c), {{lv[c * n], 1.0}, {lv[c * n + td_.block], -1.0}},
                      Sense::Equal, 0.0);
  }
  return lv;
}

void Builder::add_heating_grid() {
  for (std::size_t b = 0; b < td_.buildings.size(); ++b) {
    sh_served_[b] = true;
    dhw_served_[b] = true;
    for (std::size_t tau = 0; tau < steps_; ++tau) {
      const int hs = m_.add_variable(var("hg_sh", td_.buildings[b], tau), VarKind::Continuous, 0.0, kInf);
      const int hd = m_.add_variable(var("hg_dhw", td_.buildings[b], tau), VarKind::Continuous, 0.0, kInf);
      bal_sh_[b][tau].push_back({hs, 1.0});
      bal_dhw_[b][tau].push_back({hd, 1.0});
      plant_heat_[tau].push_back({hs, -1.0});
      plant_heat_[tau].push_back({hd, -1.0});
    }
  }
  for (std::size_t tau = 0; tau < steps_; ++tau) {
    m_.add_constraint(var("bal_heat", names::kPlant, tau), std::move(plant_heat_[tau]), Sense::Equal, 0.0);
    m_.add_constraint(var("bal_el", names::kPlant, tau), std::move(plant_el_[tau]), Sense::Equal, 0.0);
  }
}

void Builder::add_balances() {
  for (std::size_t k = 0; k < exp_lim_.size(); ++k) {
    const bool plant = k == td_.buildings.size();
    if (plant && !has_plant_) continue;
    const std::string site = plant ? std::string(names::kPlant) : td_.buildings[k];
    for (std::size_t tau = 0; tau < steps_; ++tau)
      m_.add_constraint(var("exp_lim", site, tau), std::move(exp_lim_[k][tau]), Sense::LessEqual, 0.0);
  }
  for (std::size_t b = 0; b < td_.buildings.size(); ++b) {
    const auto& id = td_.buildings[b];
    auto positive = [](const std::vector<double>& v) { return std::any_of(v.begin(), v.end(), [](double x) { return x > 0.0; }); };
    if (!sh_served_[b] && positive(td_.sh[b]))
      throw std::domain_error("building '" + id + "': space-heating load but no technology supplies it");
    if (!dhw_served_[b] && positive(td_.dhw[b]))
      throw std::domain_error("building '" + id + "': hot-water load but no technology supplies it");
    for (std::size_t tau = 0; tau < steps_; ++tau) {
      m_.add_constraint(var("bal_el", id, tau), std::move(bal_el_[b][tau]), Sense::Equal, td_.el[b][tau]);
      m_.add_constraint(var("bal_sh", id, tau), std::move(bal_sh_[b][tau]), Sense::Equal, td_.sh[b][tau]);
      m_.add_constraint(var("bal_dhw", id, tau), std::move(bal_dhw_[b][tau]), Sense::Equal, td_.dhw[b][tau]);
    }
  }
}

}  // namespace

MilpModel build(const TimeData& td, const Catalog& catalog, const BuildOptions& options) {
  catalog.validate();
  const Catalog c = options.simplified ? simplify(catalog) : catalog;
  Builder b(td, c, options);
  return b.run();
}

MilpModel build(const ClusterModel& clusters, const Catalog& catalog, const BuildOptions& options) {
  if (options.variant == Variant::M0 && clusters.granularity == Granularity::Hour)
    throw std::invalid_argument("variant M0 requires day clusters: cyclic storage over single-hour clusters is meaningless");
  if (options.variant == Variant::Full) throw std::invalid_argument("variant Full is built from the bundle, not from clusters");
  return build(time_data(clusters), catalog, options);
}

MilpModel build_full(const TimeSeriesBundle& bundle, const Catalog& catalog, bool simplified) {
  return build(full_time_data(bundle), catalog, BuildOptions{Variant::Full, simplified});
}

}  // namespace zen
