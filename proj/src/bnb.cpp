#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <queue>

#include "zen/solve.hpp"

namespace zen {

namespace {

using Clock = std::chrono::steady_clock;

struct BoundChange {
  int col;
  double lower;
  double upper;
};

struct Node {
  double bound;
  std::size_t id;
  std::vector<BoundChange> changes;
  std::shared_ptr<const Basis> basis;  // parent's optimal basis
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

double relative_gap(double incumbent, double bound) {
  if (!std::isfinite(incumbent)) return kInf;
  return std::max(0.0, incumbent - bound) / std::max(1.0, std::abs(incumbent));
}

// Column to branch on: most fractional binary (ties to the lowest index), then
// semi-continuous values strictly inside (0, sc_lower).
struct Branch {
  int col = -1;
  bool semicontinuous = false;
};

Branch pick_branch(const MilpModel& model, const std::vector<double>& x, double tol) {
  Branch br;
  double best = tol;
  for (std::size_t j = 0; j < model.num_vars(); ++j) {
    const auto& v = model.variables()[j];
    if (v.kind != VarKind::Binary) continue;
    const double frac = std::min(x[j] - std::floor(x[j]), std::ceil(x[j]) - x[j]);
    if (frac > best) {
      best = frac;
      br.col = static_cast<int>(j);
    }
  }
  if (br.col >= 0) return br;
  for (std::size_t j = 0; j < model.num_vars(); ++j) {
    const auto& v = model.variables()[j];
    if (v.kind != VarKind::SemiContinuous) continue;
    if (x[j] > tol && x[j] < v.sc_lower - tol) {
      br.col = static_cast<int>(j);
      br.semicontinuous = true;
      return br;
    }
  }
  return br;
}

}  // namespace

SolveReport solve_milp(const MilpModel& model, const MilpOptions& options) {
  const auto t0 = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - t0).count(); };

  const LpProblem root = relaxation(model);
  SolveReport rep;
  double incumbent = kInf;
  std::vector<double> best_x;
  double fathomed = kInf;  // least bound among closed nodes

  auto try_incumbent = [&](std::vector<double> x) {
    // Snap integers, then accept only if the original model is satisfied.
    for (std::size_t j = 0; j < model.num_vars(); ++j)
      if (model.variables()[j].kind == VarKind::Binary) x[j] = std::round(x[j]);
    const auto fc = check_feasibility(model, x);
    if (!fc.ok(options.feasibility_tol, options.integrality_tol)) return false;
    const double obj = model.evaluate_objective(x);
    if (obj < incumbent) {
      incumbent = obj;
      best_x = std::move(x);
      return true;
    }
    return false;
  };

  auto apply = [&](const Node& node) {
    LpProblem lp = root;
    for (const auto& c : node.changes) {
      lp.col_lower[static_cast<std::size_t>(c.col)] = c.lower;
      lp.col_upper[static_cast<std::size_t>(c.col)] = c.upper;
    }
    return lp;
  };
  auto lp_options = [&] {
    SimplexOptions so = options.lp;
    so.time_limit = std::max(0.0, options.time_limit - elapsed());
    return so;
  };
  auto solve_node = [&](const Node& node) {
    return node.basis ? solve_lp(apply(node), lp_options(), *node.basis) : solve_lp(apply(node), lp_options());
  };

  // Rounding: binaries with any positive value go to 1, else nearest.
  auto round_heuristic = [&](const SolveReport& lp) {
    std::vector<double> up = lp.values;
    for (std::size_t j = 0; j < model.num_vars(); ++j)
      if (model.variables()[j].kind == VarKind::Binary) up[j] = lp.values[j] > options.integrality_tol ? 1.0 : 0.0;
    try_incumbent(up);
  };

  // Fractional dive: fix the near-integral fractional columns (at least the
  // closest one) to their rounded values and re-solve, flipping the single
  // fixing once when that makes the LP infeasible.
  auto dive = [&](const Node& start, const SolveReport& start_lp) {
    Node cur{start.bound, 0, start.changes, nullptr};
    std::vector<double> x = start_lp.values;
    Basis basis = start_lp.basis;
    for (std::size_t round = 0; round < options.dive_rounds; ++round) {
      if (elapsed() > options.time_limit) return;
      struct Frac {
        double dist;
        int col;
        double value;
      };
      std::vector<Frac> fr;
      for (std::size_t j = 0; j < model.num_vars(); ++j) {
        const auto& v = model.variables()[j];
        if (v.kind == VarKind::Binary) {
          const double f = x[j] - std::floor(x[j]);
          if (f > options.integrality_tol && f < 1.0 - options.integrality_tol)
            fr.push_back({std::min(f, 1.0 - f), static_cast<int>(j), x[j] >= 0.5 ? 1.0 : 0.0});
        } else if (v.kind == VarKind::SemiContinuous && x[j] > options.integrality_tol &&
                   x[j] < v.sc_lower - options.integrality_tol) {
          fr.push_back({std::min(x[j], v.sc_lower - x[j]) / v.sc_lower, static_cast<int>(j), x[j] >= 0.5 * v.sc_lower ? 1.0 : 0.0});
        }
      }
      if (fr.empty()) {
        try_incumbent(x);
        return;
      }
      std::sort(fr.begin(), fr.end(), [](const Frac& a, const Frac& b) {
        return a.dist != b.dist ? a.dist < b.dist : a.col < b.col;
      });
      std::size_t count = 1;
      while (count < fr.size() && fr[count].dist < 0.1) ++count;
      auto fix = [&](Node& n, const Frac& f, double up) {
        const auto& v = model.variables()[static_cast<std::size_t>(f.col)];
        BoundChange c{f.col, 0.0, 0.0};
        if (v.kind == VarKind::Binary) c = {f.col, up, up};
        else if (up > 0.5) c = {f.col, v.sc_lower, v.upper};
        auto it = std::find_if(n.changes.begin(), n.changes.end(), [&](const BoundChange& b) { return b.col == f.col; });
        if (it != n.changes.end()) *it = c;
        else n.changes.push_back(c);
      };
      Node next = cur;
      for (std::size_t k = 0; k < count; ++k) fix(next, fr[k], fr[k].value);
      SolveReport r = solve_lp(apply(next), lp_options(), basis);
      if (r.status != SolveStatus::Optimal && count == 1) {
        next = cur;
        fix(next, fr[0], 1.0 - fr[0].value);
        r = solve_lp(apply(next), lp_options(), basis);
      }
      if (r.status != SolveStatus::Optimal) return;
      if (std::isfinite(incumbent) && r.objective >= incumbent) return;
      round_heuristic(r);
      cur = std::move(next);
      x = std::move(r.values);
      basis = std::move(r.basis);
    }
  };

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  auto within_gap = [&](double bound) {
    return std::isfinite(incumbent) && bound >= incumbent - options.gap_tol * std::max(1.0, std::abs(incumbent));
  };
  // Valid lower bound: the least of the open bounds, the closed bounds and the incumbent.
  auto lower_bound = [&] {
    double lb = std::min(fathomed, incumbent);
    if (!open.empty()) lb = std::min(lb, open.top().bound);
    return lb;
  };
  auto record = [&] { rep.trace.push_back({incumbent, lower_bound()}); };
  std::size_t next_id = 0;
  open.push(Node{-kInf, next_id++, {}, nullptr});
  SolveStatus stop = SolveStatus::Optimal;
  bool limit_hit = false;
  std::size_t lp_iterations = 0;

  while (!open.empty()) {
    if (elapsed() > options.time_limit) {
      stop = SolveStatus::TimeLimit;
      limit_hit = true;
      break;
    }
    if (rep.nodes >= options.node_limit) {
      stop = SolveStatus::GapLimit;
      limit_hit = true;
      break;
    }
    Node node = open.top();
    open.pop();
    if (within_gap(node.bound)) {
      // Everything left is within tolerance of the incumbent.
      fathomed = std::min(fathomed, node.bound);
      open = {};
      break;
    }
    ++rep.nodes;
    SolveReport lp = solve_node(node);
    lp_iterations += lp.iterations;
    if (lp.status == SolveStatus::Unbounded && node.changes.empty()) {
      rep.status = SolveStatus::Unbounded;
      rep.runtime = elapsed();
      rep.iterations = lp_iterations;
      return rep;
    }
    if (lp.status == SolveStatus::TimeLimit) {
      open.push(node);
      stop = SolveStatus::TimeLimit;
      limit_hit = true;
      break;
    }
    if (lp.status != SolveStatus::Optimal) {
      if (lp.status != SolveStatus::Infeasible) {
        // Numerical trouble on this node: drop it but do not claim optimality.
        stop = SolveStatus::NumericalFailure;
        fathomed = std::min(fathomed, node.bound);
      }
      record();
      continue;
    }
    const double bound = std::max(lp.objective, node.bound);
    if (within_gap(bound)) {
      fathomed = std::min(fathomed, bound);
      record();
      continue;
    }
    const Branch br = pick_branch(model, lp.values, options.integrality_tol);
    if (br.col < 0) {
      try_incumbent(lp.values);
      fathomed = std::min(fathomed, bound);
      record();
      continue;
    }
    round_heuristic(lp);
    if (!within_gap(bound) && options.dive_rounds > 0 &&
        (rep.nodes == 1 || (!std::isfinite(incumbent) && rep.nodes % 100 == 0)))
      dive(node, lp);
    if (within_gap(bound)) {
      fathomed = std::min(fathomed, bound);
      record();
      continue;
    }

    const auto j = static_cast<std::size_t>(br.col);
    const auto& v = model.variables()[j];
    double lo = v.lower, hi = v.upper;
    for (const auto& c : node.changes)
      if (c.col == br.col) {
        lo = c.lower;
        hi = c.upper;
      }
    auto basis = std::make_shared<const Basis>(std::move(lp.basis));
    auto child = [&](double l, double u) {
      Node n{bound, next_id++, node.changes, basis};
      auto it = std::find_if(n.changes.begin(), n.changes.end(), [&](const BoundChange& c) { return c.col == br.col; });
      if (it != n.changes.end()) *it = {br.col, l, u};
      else n.changes.push_back({br.col, l, u});
      open.push(std::move(n));
    };
    if (br.semicontinuous) {
      child(lo, 0.0);
      child(std::max(lo, v.sc_lower), hi);
    } else {
      child(0.0, 0.0);
      child(1.0, 1.0);
    }
    record();
  }

  rep.iterations = lp_iterations;
  rep.runtime = elapsed();
  if (!std::isfinite(incumbent)) {
    rep.status = limit_hit ? stop : (stop == SolveStatus::NumericalFailure ? stop : SolveStatus::Infeasible);
    rep.gap = kInf;
    return rep;
  }
  rep.values = best_x;
  rep.objective = incumbent;
  rep.gap = relative_gap(incumbent, lower_bound());
  if (limit_hit) {
    rep.status = stop;
  } else if (stop == SolveStatus::NumericalFailure) {
    rep.status = SolveStatus::NumericalFailure;
  } else {
    rep.status = SolveStatus::Optimal;
  }
  const auto fc = check_feasibility(model, rep.values);
  rep.max_violation = std::max(fc.max_row_violation, fc.max_bound_violation);
  record();
  return rep;
}

}  // namespace zen
