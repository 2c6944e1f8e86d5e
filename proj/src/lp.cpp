#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <random>
#include <stdexcept>

#include <Eigen/Core>
#include <klu.h>

#include "zen/solve.hpp"

namespace zen {

std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::GapLimit: return "gap_limit";
    case SolveStatus::TimeLimit: return "time_limit";
    case SolveStatus::IterationLimit: return "iteration_limit";
    case SolveStatus::NumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

void LpProblem::add_column(const std::vector<std::pair<int, double>>& entries, double c, double lo, double hi) {
  if (col_start.empty()) col_start.push_back(0);
  for (const auto& [r, v] : entries) {
    if (r < 0 || static_cast<std::size_t>(r) >= rows) throw std::invalid_argument("add_column: row out of range");
    row_index.push_back(r);
    value.push_back(v);
  }
  col_start.push_back(static_cast<int>(row_index.size()));
  cost.push_back(c);
  col_lower.push_back(lo);
  col_upper.push_back(hi);
  ++cols;
}

LpProblem relaxation(const MilpModel& model) {
  LpProblem lp;
  lp.rows = model.num_rows();
  lp.cols = model.num_vars();
  lp.row_lower.resize(lp.rows);
  lp.row_upper.resize(lp.rows);
  std::vector<int> count(lp.cols, 0);
  for (std::size_t i = 0; i < lp.rows; ++i) {
    const auto& r = model.constraints()[i];
    lp.row_lower[i] = r.sense == Sense::LessEqual ? -kInf : r.rhs;
    lp.row_upper[i] = r.sense == Sense::GreaterEqual ? kInf : r.rhs;
    for (const auto& t : r.terms) ++count[static_cast<std::size_t>(t.col)];
  }
  lp.col_start.assign(lp.cols + 1, 0);
  for (std::size_t j = 0; j < lp.cols; ++j) lp.col_start[j + 1] = lp.col_start[j] + count[j];
  lp.row_index.resize(static_cast<std::size_t>(lp.col_start.back()));
  lp.value.resize(lp.row_index.size());
  std::vector<int> fill(lp.col_start.begin(), lp.col_start.end() - 1);
  for (std::size_t i = 0; i < lp.rows; ++i)
    for (const auto& t : model.constraints()[i].terms) {
      const auto k = static_cast<std::size_t>(fill[static_cast<std::size_t>(t.col)]++);
      lp.row_index[k] = static_cast<int>(i);
      lp.value[k] = t.coef;
    }
  lp.cost = model.objective();
  lp.cost_constant = model.objective_constant();
  for (const auto& v : model.variables()) {
    lp.col_lower.push_back(v.lower);
    lp.col_upper.push_back(v.upper);
  }
  return lp;
}

namespace {

using Clock = std::chrono::steady_clock;

enum class State : std::uint8_t { Basic, AtLower, AtUpper, AtZero };

double pow2_round(double v) { return std::exp2(std::round(std::log2(v))); }

class Simplex {
public:
  Simplex(const LpProblem& lp, const SimplexOptions& opt, const Basis* start = nullptr)
      : lp_(lp), opt_(opt), warm_(start) {
    m_ = lp.rows;
    n_ = lp.cols;
    total_ = n_ + m_;
    if (lp.col_start.size() != n_ + 1 && !(n_ == 0 && lp.col_start.empty()))
      throw std::invalid_argument("LpProblem: malformed column starts");
    start_ = lp.col_start.empty() ? std::vector<int>{0} : lp.col_start;
    rind_ = lp.row_index;
    val_ = lp.value;
    for (double v : val_)
      if (!std::isfinite(v)) throw std::invalid_argument("LpProblem: non-finite coefficient");
    scale_problem();
    klu_defaults(&common_);
  }
  ~Simplex() { free_factors(); }
  Simplex(const Simplex&) = delete;
  Simplex& operator=(const Simplex&) = delete;

  SolveReport run();

private:
  // --- setup -------------------------------------------------------------
  void scale_problem() {
    row_scale_.assign(m_, 1.0);
    col_scale_.assign(n_, 1.0);
    if (opt_.scale && !val_.empty()) {
      for (int pass = 0; pass < 6; ++pass) {
        std::vector<double> rmin(m_, kInf), rmax(m_, 0.0);
        for (std::size_t j = 0; j < n_; ++j)
          for (int k = start_[j]; k < start_[j + 1]; ++k) {
            const auto i = static_cast<std::size_t>(rind_[k]);
            const double a = std::abs(val_[k]) * row_scale_[i] * col_scale_[j];
            if (a == 0.0) continue;
            rmin[i] = std::min(rmin[i], a);
            rmax[i] = std::max(rmax[i], a);
          }
        for (std::size_t i = 0; i < m_; ++i)
          if (rmax[i] > 0.0) row_scale_[i] /= std::sqrt(rmin[i] * rmax[i]);
        for (std::size_t j = 0; j < n_; ++j) {
          double cmin = kInf, cmax = 0.0;
          for (int k = start_[j]; k < start_[j + 1]; ++k) {
            const double a = std::abs(val_[k]) * row_scale_[static_cast<std::size_t>(rind_[k])] * col_scale_[j];
            if (a == 0.0) continue;
            cmin = std::min(cmin, a);
            cmax = std::max(cmax, a);
          }
          if (cmax > 0.0) col_scale_[j] /= std::sqrt(cmin * cmax);
        }
      }
      for (auto& s : row_scale_) s = pow2_round(s);
      for (auto& s : col_scale_) s = pow2_round(s);
    }
    for (std::size_t j = 0; j < n_; ++j)
      for (int k = start_[j]; k < start_[j + 1]; ++k)
        val_[k] *= row_scale_[static_cast<std::size_t>(rind_[k])] * col_scale_[j];

    rstart_.assign(m_ + 1, 0);
    for (int r : rind_) ++rstart_[static_cast<std::size_t>(r) + 1];
    for (std::size_t i = 0; i < m_; ++i) rstart_[i + 1] += rstart_[i];
    rcol_.resize(rind_.size());
    rval_.resize(rind_.size());
    {
      std::vector<int> fill(rstart_.begin(), rstart_.end() - 1);
      for (std::size_t j = 0; j < n_; ++j)
        for (int k = start_[j]; k < start_[j + 1]; ++k) {
          const int at = fill[static_cast<std::size_t>(rind_[k])]++;
          rcol_[at] = static_cast<int>(j);
          rval_[at] = val_[k];
        }
    }
    cost_.assign(total_, 0.0);
    lo_.assign(total_, 0.0);
    hi_.assign(total_, 0.0);
    double cmax = 0.0;
    for (std::size_t j = 0; j < n_; ++j) {
      cost_[j] = lp_.cost.at(j) * col_scale_[j];
      cmax = std::max(cmax, std::abs(cost_[j]));
      lo_[j] = lp_.col_lower.at(j) / col_scale_[j];
      hi_[j] = lp_.col_upper.at(j) / col_scale_[j];
    }
    cost_scale_ = cmax > 0.0 && opt_.scale ? pow2_round(1.0 / cmax) : 1.0;
    for (std::size_t j = 0; j < n_; ++j) cost_[j] *= cost_scale_;
    for (std::size_t i = 0; i < m_; ++i) {
      lo_[n_ + i] = lp_.row_lower.at(i) * row_scale_[i];
      hi_[n_ + i] = lp_.row_upper.at(i) * row_scale_[i];
    }
  }

  void initial_basis() {
    x_.assign(total_, 0.0);
    state_.assign(total_, State::AtZero);
    pos_.assign(total_, -1);
    head_.resize(m_);
    for (std::size_t j = 0; j < n_; ++j) set_nonbasic_near_bound(j, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      head_[i] = static_cast<int>(n_ + i);
      pos_[n_ + i] = static_cast<int>(i);
      state_[n_ + i] = State::Basic;
    }
  }

  // Triangular crash: equality rows trade their fixed logical for a structural
  // column, keeping the basis triangular so it always factors.
  void crash() {
    std::vector<char> active(n_, 0);
    std::vector<int> count(m_, 0);
    for (std::size_t j = 0; j < n_; ++j) {
      if (lo_[j] == hi_[j] || start_[j] == start_[j + 1]) continue;
      active[j] = 1;
      for (int k = start_[j]; k < start_[j + 1]; ++k) ++count[static_cast<std::size_t>(rind_[k])];
    }
    using Item = std::pair<int, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    for (std::size_t i = 0; i < m_; ++i)
      if (lo_[n_ + i] == hi_[n_ + i] && count[i] > 0) heap.push({count[i], i});
    std::vector<char> done(m_, 0);
    while (!heap.empty()) {
      const auto [c, r] = heap.top();
      heap.pop();
      if (done[r] || c != count[r]) {
        if (!done[r] && count[r] > 0) heap.push({count[r], r});
        continue;
      }
      double amax = 0.0;
      for (int k = rstart_[r]; k < rstart_[r + 1]; ++k)
        if (active[static_cast<std::size_t>(rcol_[k])]) amax = std::max(amax, std::abs(rval_[k]));
      std::size_t pick = n_;
      int pick_nnz = 0;
      for (int k = rstart_[r]; k < rstart_[r + 1]; ++k) {
        const auto j = static_cast<std::size_t>(rcol_[k]);
        if (!active[j] || std::abs(rval_[k]) < 0.1 * amax) continue;
        const int nnz = start_[j + 1] - start_[j];
        if (pick == n_ || nnz < pick_nnz) {
          pick = j;
          pick_nnz = nnz;
        }
      }
      done[r] = 1;
      if (pick == n_) continue;
      const std::size_t logical = n_ + r;
      state_[logical] = State::AtLower;
      x_[logical] = lo_[logical];
      pos_[logical] = -1;
      head_[r] = static_cast<int>(pick);
      pos_[pick] = static_cast<int>(r);
      state_[pick] = State::Basic;
      for (int k = rstart_[r]; k < rstart_[r + 1]; ++k) {
        const auto j = static_cast<std::size_t>(rcol_[k]);
        if (!active[j]) continue;
        active[j] = 0;
        for (int kk = start_[j]; kk < start_[j + 1]; ++kk) --count[static_cast<std::size_t>(rind_[kk])];
      }
    }
  }

  // Installs the caller's basis; false if it does not fit this problem.
  bool warm_basis() {
    if (!warm_ || warm_->head.size() != m_ || warm_->at_upper.size() != total_) return false;
    x_.assign(total_, 0.0);
    state_.assign(total_, State::AtZero);
    pos_.assign(total_, -1);
    head_.resize(m_);
    for (std::size_t p = 0; p < m_; ++p) {
      const int j = warm_->head[p];
      if (j < 0 || static_cast<std::size_t>(j) >= total_ || pos_[static_cast<std::size_t>(j)] >= 0) return false;
      head_[p] = j;
      pos_[static_cast<std::size_t>(j)] = static_cast<int>(p);
      state_[static_cast<std::size_t>(j)] = State::Basic;
    }
    for (std::size_t j = 0; j < total_; ++j) {
      if (state_[j] == State::Basic) continue;
      if (warm_->at_upper[j] && std::isfinite(hi_[j])) {
        state_[j] = State::AtUpper;
        x_[j] = hi_[j];
      } else {
        set_nonbasic_near_bound(j, std::isfinite(lo_[j]) ? lo_[j] : 0.0);
      }
    }
    return refactor();
  }

  void set_nonbasic_near_bound(std::size_t j, double v) {
    const bool has_lo = std::isfinite(lo_[j]), has_hi = std::isfinite(hi_[j]);
    if (has_lo && (!has_hi || std::abs(v - lo_[j]) <= std::abs(hi_[j] - v))) {
      state_[j] = State::AtLower;
      x_[j] = lo_[j];
    } else if (has_hi) {
      state_[j] = State::AtUpper;
      x_[j] = hi_[j];
    } else {
      state_[j] = State::AtZero;
      x_[j] = 0.0;
    }
  }

  // --- linear algebra ----------------------------------------------------
  bool refactor() {
    etas_.clear();
    eta_nnz_ = 0;
    free_factors();
    bp_.assign(m_ + 1, 0);
    bi_.clear();
    bx_.clear();
    for (std::size_t p = 0; p < m_; ++p) {
      const auto j = static_cast<std::size_t>(head_[p]);
      if (j >= n_) {
        bi_.push_back(static_cast<int>(j - n_));
        bx_.push_back(-1.0);
      } else {
        for (int k = start_[j]; k < start_[j + 1]; ++k) {
          bi_.push_back(rind_[k]);
          bx_.push_back(val_[k]);
        }
      }
      bp_[p + 1] = static_cast<int>(bi_.size());
    }
    ++factorizations_;
    if (m_ == 0) return true;
    const int n = static_cast<int>(m_);
    symbolic_ = klu_analyze(n, bp_.data(), bi_.data(), &common_);
    if (!symbolic_) return false;
    numeric_ = klu_factor(bp_.data(), bi_.data(), bx_.data(), symbolic_, &common_);
    if (!numeric_ || common_.status != KLU_OK) return false;
    lu_nnz_ = static_cast<std::size_t>(numeric_->lnz + numeric_->unz);
    // Reject bases that factor but are numerically singular.
    if (klu_rcond(symbolic_, numeric_, &common_) && common_.rcond < 1e-13) return false;
    return true;
  }

  void free_factors() {
    if (numeric_) klu_free_numeric(&numeric_, &common_);
    if (symbolic_) klu_free_symbolic(&symbolic_, &common_);
    numeric_ = nullptr;
    symbolic_ = nullptr;
  }

  void ftran(Eigen::VectorXd& v) {
    if (m_ == 0) return;
    klu_solve(symbolic_, numeric_, static_cast<int>(m_), 1, v.data(), &common_);
    for (const auto& e : etas_) {
      const double xp = v[e.p] / e.pivot;
      if (xp != 0.0)
        for (std::size_t k = 0; k < e.idx.size(); ++k) v[e.idx[k]] -= e.val[k] * xp;
      v[e.p] = xp;
    }
  }

  void btran(Eigen::VectorXd& v) {
    if (m_ == 0) return;
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double s = v[it->p];
      for (std::size_t k = 0; k < it->idx.size(); ++k) s -= it->val[k] * v[it->idx[k]];
      v[it->p] = s / it->pivot;
    }
    klu_tsolve(symbolic_, numeric_, static_cast<int>(m_), 1, v.data(), &common_);
  }

  void column(std::size_t j, Eigen::VectorXd& out) const {
    out.setZero(static_cast<Eigen::Index>(m_));
    if (j >= n_) {
      out[static_cast<Eigen::Index>(j - n_)] = -1.0;
    } else {
      for (int k = start_[j]; k < start_[j + 1]; ++k) out[rind_[k]] = val_[k];
    }
  }

  double dot_column(std::size_t j, const Eigen::VectorXd& y) const {
    if (j >= n_) return -y[static_cast<Eigen::Index>(j - n_)];
    double s = 0.0;
    for (int k = start_[j]; k < start_[j + 1]; ++k) s += val_[k] * y[rind_[k]];
    return s;
  }

  void recompute_basics() {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m_));
    for (std::size_t j = 0; j < total_; ++j) {
      if (state_[j] == State::Basic || x_[j] == 0.0) continue;
      if (j >= n_) {
        rhs[static_cast<Eigen::Index>(j - n_)] += x_[j];
      } else {
        for (int k = start_[j]; k < start_[j + 1]; ++k) rhs[rind_[k]] -= val_[k] * x_[j];
      }
    }
    ftran(rhs);
    for (std::size_t p = 0; p < m_; ++p) x_[static_cast<std::size_t>(head_[p])] = rhs[static_cast<Eigen::Index>(p)];
  }

  double infeasibility(std::size_t j) const {
    if (x_[j] < lo_[j] - opt_.feasibility_tol) return lo_[j] - x_[j];
    if (x_[j] > hi_[j] + opt_.feasibility_tol) return x_[j] - hi_[j];
    return 0.0;
  }

  // Replaces a singular basis with the slack basis.
  void reset_to_slack_basis() {
    for (std::size_t p = 0; p < m_; ++p) {
      const auto j = static_cast<std::size_t>(head_[p]);
      pos_[j] = -1;
      if (j < n_) set_nonbasic_near_bound(j, x_[j]);
    }
    for (std::size_t j = n_; j < total_; ++j)
      if (state_[j] != State::Basic) state_[j] = State::Basic;
    for (std::size_t i = 0; i < m_; ++i) {
      head_[i] = static_cast<int>(n_ + i);
      pos_[n_ + i] = static_cast<int>(i);
    }
  }

  // Widens every finite bound by a small random amount so that degenerate
  // vertices become non-degenerate; undone before optimality is declared.
  void perturb_bounds() {
    orig_lo_ = lo_;
    orig_hi_ = hi_;
    fixed_.assign(total_, 0);
    for (std::size_t j = 0; j < total_; ++j) fixed_[j] = lo_[j] == hi_[j];
    std::mt19937_64 gen(0x5eed);
    std::uniform_real_distribution<double> u(1.0, 2.0);
    for (std::size_t j = 0; j < total_; ++j) {
      const double base = 10.0 * opt_.feasibility_tol;
      if (std::isfinite(lo_[j])) lo_[j] -= base * u(gen) * (1.0 + std::min(std::abs(lo_[j]), 1e3));
      if (std::isfinite(hi_[j])) hi_[j] += base * u(gen) * (1.0 + std::min(std::abs(hi_[j]), 1e3));
      if (state_[j] == State::AtLower) x_[j] = lo_[j];
      if (state_[j] == State::AtUpper) x_[j] = hi_[j];
    }
    perturbed_ = true;
  }

  void restore_bounds() {
    lo_ = orig_lo_;
    hi_ = orig_hi_;
    for (std::size_t j = 0; j < total_; ++j) {
      if (state_[j] == State::AtLower) x_[j] = lo_[j];
      if (state_[j] == State::AtUpper) x_[j] = hi_[j];
    }
    perturbed_ = false;
  }

  struct Eta {
    int p;
    double pivot;
    std::vector<int> idx;
    std::vector<double> val;
  };

  const LpProblem& lp_;
  SimplexOptions opt_;
  const Basis* warm_;
  std::size_t m_ = 0, n_ = 0, total_ = 0;
  std::vector<int> start_, rind_;
  std::vector<double> val_;
  std::vector<int> rstart_, rcol_;  // row-wise copy
  std::vector<double> rval_;
  std::vector<double> row_scale_, col_scale_;
  double cost_scale_ = 1.0;
  std::vector<double> cost_, lo_, hi_, x_;
  std::vector<double> orig_lo_, orig_hi_;
  bool perturbed_ = false;
  std::vector<char> fixed_;
  std::vector<State> state_;
  std::vector<int> head_, pos_;
  klu_common common_{};
  klu_symbolic* symbolic_ = nullptr;
  klu_numeric* numeric_ = nullptr;
  std::vector<int> bp_, bi_;
  std::vector<double> bx_;
  std::vector<Eta> etas_;
  std::size_t factorizations_ = 0;
  std::size_t eta_nnz_ = 0, lu_nnz_ = 0;
};

SolveReport Simplex::run() {
  const auto t0 = Clock::now();
  SolveReport rep;
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - t0).count(); };

  for (std::size_t j = 0; j < total_; ++j)
    if (lo_[j] > hi_[j] + opt_.feasibility_tol) {
      rep.status = SolveStatus::Infeasible;
      rep.runtime = elapsed();
      return rep;
    }

  const bool warm = warm_basis();
  if (!warm) initial_basis();
  if (!warm && opt_.crash) {
    crash();
    if (!refactor()) initial_basis();
  }
  if (!warm && (factorizations_ == 0 || !numeric_) && !refactor()) {
    rep.status = SolveStatus::NumericalFailure;
    return rep;
  }
  const double ftol = opt_.feasibility_tol;
  const double dtol = opt_.optimality_tol;
  perturb_bounds();
  recompute_basics();
  constexpr double kPivotTol = 1e-9;

  Eigen::VectorXd y(static_cast<Eigen::Index>(m_)), alpha(static_cast<Eigen::Index>(m_)), rho(static_cast<Eigen::Index>(m_));
  std::vector<double> d(total_, 0.0), weight(total_, 1.0), row(total_, 0.0);
  std::vector<char> mark(total_, 0);
  std::vector<std::size_t> touched, nz;

  // -1 below lower, 0 within, +1 above upper (with tolerance).
  auto category = [&](std::size_t j) {
    if (x_[j] < lo_[j] - ftol) return -1;
    if (x_[j] > hi_[j] + ftol) return 1;
    return 0;
  };

  std::size_t iter = 0;
  std::size_t since_progress = 0;
  bool bland = false;
  int verify_rounds = 0;
  int breakdowns = 0;
  bool need_price = true;
  bool fresh = false;
  bool phase1 = true;
  SolveStatus status = SolveStatus::NumericalFailure;

  auto refresh = [&]() {
    if (!refactor()) {
      reset_to_slack_basis();
      if (!refactor()) return false;
    }
    recompute_basics();
    need_price = true;
    return true;
  };

  for (;;) {
    if (iter >= opt_.iteration_limit) {
      status = SolveStatus::IterationLimit;
      break;
    }
    if ((iter & 63) == 0 && elapsed() > opt_.time_limit) {
      status = SolveStatus::TimeLimit;
      break;
    }
    if ((etas_.size() >= opt_.refactor_interval || eta_nnz_ > 2 * (lu_nnz_ + m_)) && !refresh()) break;

    if (need_price) {
      bool infeasible = false;
      for (std::size_t p = 0; p < m_ && !infeasible; ++p) infeasible = category(static_cast<std::size_t>(head_[p])) != 0;
      phase1 = infeasible;
      for (std::size_t p = 0; p < m_; ++p) {
        const auto j = static_cast<std::size_t>(head_[p]);
        y[static_cast<Eigen::Index>(p)] = phase1 ? static_cast<double>(category(j)) : cost_[j];
      }
      btran(y);
      for (std::size_t j = 0; j < total_; ++j)
        d[j] = state_[j] == State::Basic ? 0.0 : (phase1 ? 0.0 : cost_[j]) - dot_column(j, y);
      need_price = false;
      fresh = true;
    }
    if (since_progress > 2000 + m_ / 2) bland = true;

    // Devex pricing: largest d_j^2 / w_j among improving candidates.
    std::size_t q = total_;
    double best = 0.0;
    for (std::size_t j = 0; j < total_; ++j) {
      const State s = state_[j];
      if (s == State::Basic || fixed_[j]) continue;
      const double dj = d[j];
      double score = 0.0;
      if (s == State::AtLower) {
        if (dj < -dtol) score = dj * dj;
      } else if (s == State::AtUpper) {
        if (dj > dtol) score = dj * dj;
      } else if (std::abs(dj) > dtol) {
        score = dj * dj;
      }
      if (score <= 0.0) continue;
      if (bland) {
        q = j;
        break;
      }
      score /= weight[j];
      if (score > best) {
        best = score;
        q = j;
      }
    }

    if (q == total_) {
      if (!fresh) {
        need_price = true;
        continue;
      }
      if (phase1) {
        // Confirm on fresh factors and unperturbed bounds before giving up.
        if (!etas_.empty() && verify_rounds < 5) {
          ++verify_rounds;
          if (!refresh()) break;
          continue;
        }
        if (perturbed_) {
          restore_bounds();
          if (!refresh()) break;
          continue;
        }
        status = SolveStatus::Infeasible;
        break;
      }
      if (perturbed_) {
        restore_bounds();
        if (!refresh()) break;
        since_progress = 0;
        continue;
      }
      // Candidate optimum: refresh the factorization and confirm.
      if (!etas_.empty() && verify_rounds < 5) {
        ++verify_rounds;
        if (!refresh()) break;
        continue;
      }
      status = SolveStatus::Optimal;
      break;
    }
    fresh = false;

    const double dq = d[q];
    const double dir = dq < 0.0 ? 1.0 : -1.0;
    column(q, alpha);
    ftran(alpha);
    nz.clear();
    for (std::size_t p = 0; p < m_; ++p)
      if (alpha[static_cast<Eigen::Index>(p)] != 0.0) nz.push_back(p);

    // Ratio test. x_B(theta) = x_B - theta * dir * alpha.
    double theta_max = kInf;
    auto block = [&](std::size_t p, double a, bool relaxed, double& target) -> double {
      const auto j = static_cast<std::size_t>(head_[p]);
      const double xb = x_[j];
      const double tol = relaxed ? ftol : 0.0;
      if (a > 0.0) {  // decreasing
        if (xb > hi_[j] + ftol) {
          target = hi_[j];
          return (xb - hi_[j]) / a;
        }
        if (xb >= lo_[j] - ftol && std::isfinite(lo_[j])) {
          target = lo_[j];
          return (xb - lo_[j] + tol) / a;
        }
        return kInf;
      }
      if (xb < lo_[j] - ftol) {
        target = lo_[j];
        return (lo_[j] - xb) / -a;
      }
      if (xb <= hi_[j] + ftol && std::isfinite(hi_[j])) {
        target = hi_[j];
        return (hi_[j] + tol - xb) / -a;
      }
      return kInf;
    };

    std::size_t leave = m_;
    double theta = kInf;
    double target_value = 0.0;
    if (!bland) {
      for (std::size_t p : nz) {
        const double a = dir * alpha[static_cast<Eigen::Index>(p)];
        if (std::abs(a) < kPivotTol) continue;
        double tgt = 0.0;
        theta_max = std::min(theta_max, block(p, a, true, tgt));
      }
      double best_pivot = 0.0;
      for (std::size_t p : nz) {
        const double a = dir * alpha[static_cast<Eigen::Index>(p)];
        if (std::abs(a) < kPivotTol) continue;
        double tgt = 0.0;
        const double r = block(p, a, false, tgt);
        if (std::isfinite(r) && r <= theta_max && std::abs(a) > best_pivot) {
          best_pivot = std::abs(a);
          leave = p;
          theta = std::max(r, 0.0);
          target_value = tgt;
        }
      }
    } else {
      for (std::size_t p : nz) {
        const double a = dir * alpha[static_cast<Eigen::Index>(p)];
        if (std::abs(a) < kPivotTol) continue;
        double tgt = 0.0;
        const double r = std::max(block(p, a, false, tgt), 0.0);
        if (r < theta - 1e-12 || (r <= theta + 1e-12 && leave < m_ && head_[p] < head_[leave])) {
          theta = r;
          leave = p;
          target_value = tgt;
        }
      }
      theta_max = theta;
    }

    // Moves the basics by step * dir * alpha; flags phase-1 cost changes.
    auto move_basics = [&](double step) {
      if (step * std::abs(dq) > 1e-12) {
        since_progress = 0;
        bland = false;
      } else {
        ++since_progress;
      }
      for (std::size_t p : nz) {
        const double a = alpha[static_cast<Eigen::Index>(p)];
        const auto j = static_cast<std::size_t>(head_[p]);
        const int before = category(j);
        x_[j] -= step * dir * a;
        if (phase1 && category(j) != before) need_price = true;
      }
    };

    const double flip = hi_[q] - lo_[q];  // inf unless boxed
    if (std::isfinite(flip) && flip <= theta_max && (leave == m_ || flip <= theta)) {
      move_basics(flip);
      if (state_[q] == State::AtLower) {
        state_[q] = State::AtUpper;
        x_[q] = hi_[q];
      } else {
        state_[q] = State::AtLower;
        x_[q] = lo_[q];
      }
      ++iter;
      continue;
    }
    if (leave == m_) {
      if (phase1) {
        // Cannot happen in exact arithmetic; treat as a numerical breakdown.
        if (++breakdowns > 20 || !refresh()) break;
        continue;
      }
      status = SolveStatus::Unbounded;
      break;
    }
    const double pivot = alpha[static_cast<Eigen::Index>(leave)];
    if (std::abs(pivot) < kPivotTol) break;

    // Pivot row over the nonbasic columns, from the row-wise matrix.
    rho.setZero();
    rho[static_cast<Eigen::Index>(leave)] = 1.0;
    btran(rho);
    touched.clear();
    auto add = [&](std::size_t j, double v) {
      if (state_[j] == State::Basic) return;
      if (!mark[j]) {
        mark[j] = 1;
        touched.push_back(j);
      }
      row[j] += v;
    };
    for (std::size_t i = 0; i < m_; ++i) {
      const double r = rho[static_cast<Eigen::Index>(i)];
      if (std::abs(r) < 1e-14) continue;
      add(n_ + i, -r);
      for (int k = rstart_[i]; k < rstart_[i + 1]; ++k) add(static_cast<std::size_t>(rcol_[k]), r * rval_[k]);
    }
    const double row_q = row[q];
    const bool consistent = std::abs(row_q - pivot) <= 1e-7 * (1.0 + std::abs(pivot));
    const double theta_d = dq / pivot;
    const double wq = weight[q];
    bool reset_weights = false;
    for (std::size_t j : touched) {
      const double a = row[j];
      row[j] = 0.0;
      mark[j] = 0;
      if (j == q) continue;
      d[j] -= theta_d * a;
      const double r = a / pivot;
      weight[j] = std::max(weight[j], r * r * wq);
      if (weight[j] > 1e8) reset_weights = true;
    }
    if (!consistent) {
      // Factorization has drifted; rebuild and price from scratch.
      if (++breakdowns > 50 || !refresh()) break;
      continue;
    }

    const auto out = static_cast<std::size_t>(head_[leave]);
    if (phase1 && category(out) != 0) need_price = true;
    move_basics(theta);
    x_[q] += theta * dir;
    x_[out] = target_value;
    state_[out] = (target_value == lo_[out]) ? State::AtLower : State::AtUpper;
    pos_[out] = -1;
    state_[q] = State::Basic;
    pos_[q] = static_cast<int>(leave);
    head_[leave] = static_cast<int>(q);
    d[out] = -theta_d;
    d[q] = 0.0;
    weight[out] = std::max(wq / (pivot * pivot), 1.0);
    if (reset_weights) std::fill(weight.begin(), weight.end(), 1.0);

    Eta e;
    e.p = static_cast<int>(leave);
    e.pivot = pivot;
    for (std::size_t p : nz) {
      const double a = alpha[static_cast<Eigen::Index>(p)];
      if (p != leave && std::abs(a) > 1e-14) {
        e.idx.push_back(static_cast<int>(p));
        e.val.push_back(a);
      }
    }
    eta_nnz_ += e.idx.size() + 1;
    etas_.push_back(std::move(e));
    ++iter;
  }

  rep.iterations = iter;
  rep.runtime = elapsed();
  rep.status = status;
  if (status == SolveStatus::Optimal || status == SolveStatus::TimeLimit || status == SolveStatus::IterationLimit) {
    rep.values.resize(n_);
    for (std::size_t j = 0; j < n_; ++j) {
      double v = x_[j];
      // Snap onto bounds the scaled solution sits on within tolerance.
      if (std::isfinite(lo_[j]) && std::abs(v - lo_[j]) <= ftol) v = lo_[j];
      if (std::isfinite(hi_[j]) && std::abs(v - hi_[j]) <= ftol) v = hi_[j];
      rep.values[j] = v * col_scale_[j];
      if (std::isfinite(lp_.col_lower[j])) rep.values[j] = std::max(rep.values[j], lp_.col_lower[j]);
      if (std::isfinite(lp_.col_upper[j])) rep.values[j] = std::min(rep.values[j], lp_.col_upper[j]);
    }
    rep.objective = lp_.cost_constant;
    for (std::size_t j = 0; j < n_; ++j) rep.objective += lp_.cost[j] * rep.values[j];
    // Violation on the unscaled rows.
    std::vector<double> act(m_, 0.0), mag(m_, 1.0);
    for (std::size_t j = 0; j < n_; ++j)
      for (int k = lp_.col_start[j]; k < lp_.col_start[j + 1]; ++k) {
        const auto i = static_cast<std::size_t>(lp_.row_index[k]);
        const double t = lp_.value[k] * rep.values[j];
        act[i] += t;
        mag[i] = std::max(mag[i], std::abs(t));
      }
    double worst = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      double v = 0.0;
      if (act[i] < lp_.row_lower[i]) v = lp_.row_lower[i] - act[i];
      if (act[i] > lp_.row_upper[i]) v = act[i] - lp_.row_upper[i];
      worst = std::max(worst, v / mag[i]);
    }
    rep.max_violation = worst;
    if (status == SolveStatus::Optimal && worst > 1e-6) rep.status = SolveStatus::NumericalFailure;
    if (rep.status == SolveStatus::Optimal) {
      rep.basis.head = head_;
      rep.basis.at_upper.resize(total_);
      for (std::size_t j = 0; j < total_; ++j) rep.basis.at_upper[j] = state_[j] == State::AtUpper;
    }
  }
  return rep;
}

}  // namespace

SolveReport solve_lp(const LpProblem& lp, const SimplexOptions& options) {
  Simplex s(lp, options);
  return s.run();
}

SolveReport solve_lp(const LpProblem& lp, const SimplexOptions& options, const Basis& start) {
  Simplex s(lp, options, &start);
  return s.run();
}

FeasibilityCheck check_feasibility(const MilpModel& model, const std::vector<double>& x) {
  FeasibilityCheck fc;
  if (x.size() != model.num_vars()) throw std::invalid_argument("check_feasibility: wrong solution size");
  for (const auto& r : model.constraints()) {
    double act = 0.0, mag = std::max(1.0, std::abs(r.rhs));
    for (const auto& t : r.terms) {
      const double v = t.coef * x[static_cast<std::size_t>(t.col)];
      act += v;
      mag = std::max(mag, std::abs(v));
    }
    double viol = 0.0;
    if (r.sense != Sense::GreaterEqual) viol = std::max(viol, act - r.rhs);
    if (r.sense != Sense::LessEqual) viol = std::max(viol, r.rhs - act);
    viol /= mag;
    if (viol > fc.max_row_violation) {
      fc.max_row_violation = viol;
      fc.worst = r.name;
    }
  }
  for (std::size_t j = 0; j < model.num_vars(); ++j) {
    const auto& v = model.variables()[j];
    const double xv = x[j];
    const double scale = std::max(1.0, std::abs(xv));
    const double bviol = std::max({0.0, v.lower - xv, xv - v.upper}) / scale;
    if (bviol > fc.max_bound_violation) {
      fc.max_bound_violation = bviol;
      if (bviol > fc.max_row_violation) fc.worst = v.name;
    }
    double iviol = 0.0;
    if (v.kind == VarKind::Binary) iviol = std::min(std::abs(xv), std::abs(xv - 1.0));
    if (v.kind == VarKind::SemiContinuous && xv > 0.0 && xv < v.sc_lower)
      iviol = std::min(xv, v.sc_lower - xv) / std::max(1.0, v.sc_lower);
    if (iviol > fc.max_integrality_violation) {
      fc.max_integrality_violation = iviol;
      if (fc.worst.empty()) fc.worst = v.name;
    }
  }
  return fc;
}

}  // namespace zen
