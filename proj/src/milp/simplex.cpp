#include "simplex.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace vppflex::milp::detail {

namespace {
constexpr double kPivotTol = 1e-9;
constexpr double kDualTol = 1e-9;
constexpr double kDrop = 1e-14;
constexpr std::size_t kRefreshEvery = 100;
// half-width of the temporary box around an unbounded nonbasic in a cold start
constexpr double kArtificialBox = 1e6;
// optimality is confirmed on recomputed values once this many pivots have
// accumulated since the last recompute
constexpr std::size_t kVerifyAfter = 24;
}  // namespace

BoundedSimplex::BoundedSimplex(const MilpProblem& problem, double feas_tol)
    : problem_(&problem),
      m_(problem.constraint_count()),
      n_(problem.variable_count()),
      cols_(m_ + n_),
      tol_(feas_tol),
      alpha_(m_ * cols_, 0.0),
      cost_(cols_, 0.0),
      lb_(cols_),
      ub_(cols_),
      x_(cols_, 0.0),
      at_(cols_, At::basic),
      head_(m_),
      d_(cols_, 0.0) {
  const double sign = problem.objective_sense() == ObjectiveSense::maximize ? -1.0 : 1.0;
  for (std::size_t j = 0; j < n_; ++j) {
    const auto& v = problem.variable(j);
    lb_[j] = v.lb;
    ub_[j] = v.ub;
    cost_[j] = sign * problem.objective()[j];
    place_nonbasic(j);
  }
  for (std::size_t i = 0; i < m_; ++i) {
    const auto& c = problem.constraint(i);
    for (const auto& t : c.terms) tab(i, t.var) -= t.coef;
    tab(i, n_ + i) = 1.0;
    const std::size_t s = n_ + i;
    lb_[s] = c.sense == Sense::le ? -kInf : c.rhs;
    ub_[s] = c.sense == Sense::ge ? kInf : c.rhs;
    at_[s] = At::basic;
    head_[i] = s;
  }
  recompute_basics();
}

void BoundedSimplex::place_nonbasic(std::size_t j) {
  if (std::isfinite(lb_[j])) {
    at_[j] = At::lower;
    x_[j] = lb_[j];
  } else if (std::isfinite(ub_[j])) {
    at_[j] = At::upper;
    x_[j] = ub_[j];
  } else {
    at_[j] = At::zero;
    x_[j] = 0.0;
  }
}

void BoundedSimplex::set_bounds(std::size_t j, double lb, double ub) {
  lb_[j] = lb;
  ub_[j] = ub;
  if (at_[j] == At::basic) return;
  const double old = x_[j];
  const bool keep_upper = at_[j] == At::upper && std::isfinite(ub);
  if (keep_upper) {
    x_[j] = ub;
  } else {
    place_nonbasic(j);
  }
  const double delta = x_[j] - old;
  if (delta != 0.0)
    for (std::size_t i = 0; i < m_; ++i) x_[head_[i]] -= tab(i, j) * delta;
}

void BoundedSimplex::recompute_basics() {
  // only nonbasic columns away from zero contribute
  std::vector<std::size_t> active;
  for (std::size_t j = 0; j < cols_; ++j)
    if (at_[j] != At::basic && x_[j] != 0.0) active.push_back(j);
  for (std::size_t i = 0; i < m_; ++i) {
    const double* row = &alpha_[i * cols_];
    double acc = 0.0;
    for (std::size_t j : active) acc -= row[j] * x_[j];
    x_[head_[i]] = acc;
  }
  drift_ = 0;
}

void BoundedSimplex::recompute_phase2_costs() {
  d_ = cost_;
  for (std::size_t i = 0; i < m_; ++i) {
    const double cb = cost_[head_[i]];
    if (cb == 0.0) continue;
    const double* row = &alpha_[i * cols_];
    for (std::size_t j = 0; j < cols_; ++j) d_[j] -= cb * row[j];
  }
  for (std::size_t i = 0; i < m_; ++i) d_[head_[i]] = 0.0;
  d_valid_ = true;
}

void BoundedSimplex::pivot(std::size_t r, std::size_t e) {
  double* prow = &alpha_[r * cols_];
  const double inv = 1.0 / prow[e];
  std::vector<std::size_t> nz;
  nz.reserve(64);
  for (std::size_t j = 0; j < cols_; ++j) {
    if (prow[j] == 0.0) continue;
    prow[j] *= inv;
    nz.push_back(j);
  }
  prow[e] = 1.0;
  for (std::size_t i = 0; i < m_; ++i) {
    if (i == r) continue;
    double* row = &alpha_[i * cols_];
    const double f = row[e];
    if (f == 0.0) continue;
    for (std::size_t j : nz) {
      const double v = row[j] - f * prow[j];
      row[j] = std::abs(v) < kDrop ? 0.0 : v;
    }
    row[e] = 0.0;
  }
  if (d_valid_) {
    const double f = d_[e];
    if (f != 0.0)
      for (std::size_t j : nz) d_[j] -= f * prow[j];
    d_[e] = 0.0;
  }
  head_[r] = e;
  ++drift_;
}

bool BoundedSimplex::infeasible_basic(std::size_t i, double& weight) const {
  const std::size_t v = head_[i];
  if (x_[v] < lb_[v] - tol_) {
    weight = -1.0;
    return true;
  }
  if (x_[v] > ub_[v] + tol_) {
    weight = 1.0;
    return true;
  }
  weight = 0.0;
  return false;
}

bool BoundedSimplex::dual_feasible() const {
  for (std::size_t j = 0; j < cols_; ++j) {
    if (at_[j] == At::basic || lb_[j] == ub_[j]) continue;
    const double d = d_[j];
    if (at_[j] == At::lower && d < -kDualTol) return false;
    if (at_[j] == At::upper && d > kDualTol) return false;
    if (at_[j] == At::zero && std::abs(d) > kDualTol) return false;
  }
  return true;
}

BoundedSimplex::DualOutcome BoundedSimplex::dual_phase(std::size_t budget, double cutoff) {
  if (!d_valid_) recompute_phase2_costs();
  if (!dual_feasible()) return DualOutcome::fallback;
  std::size_t since_refresh = 0;
  bool fresh = false;
  for (std::size_t it = 0;; ++it) {
    if (it >= budget) return DualOutcome::limit;

    // leaving row: largest bound violation
    std::size_t r = m_;
    double worst = tol_;
    for (std::size_t i = 0; i < m_; ++i) {
      const std::size_t v = head_[i];
      const double viol = std::max(lb_[v] - x_[v], x_[v] - ub_[v]);
      if (viol > worst) {
        worst = viol;
        r = i;
      }
    }
    if (r == m_) return DualOutcome::feasible;
    const std::size_t leave = head_[r];
    const bool raise = x_[leave] < lb_[leave];
    const double target = raise ? lb_[leave] : ub_[leave];

    // entering column: two-pass ratio test on |d_j / a_rj|
    const double* row = &alpha_[r * cols_];
    auto eligible = [&](std::size_t j) {
      if (at_[j] == At::basic || lb_[j] == ub_[j]) return false;
      const double a = row[j];
      if (std::abs(a) <= kPivotTol) return false;
      // x_leave moves by -a dx_j; pick the direction of dx_j this needs
      const bool increase = raise ? a < 0.0 : a > 0.0;
      if (at_[j] == At::zero) return true;
      return increase ? at_[j] == At::lower : at_[j] == At::upper;
    };
    double bound = kInf;
    for (std::size_t j = 0; j < cols_; ++j)
      if (eligible(j)) bound = std::min(bound, (std::abs(d_[j]) + kDualTol) / std::abs(row[j]));
    if (!std::isfinite(bound)) {
      if (fresh) return DualOutcome::infeasible;
      // confirm on recomputed values before giving up
      recompute_basics();
      recompute_phase2_costs();
      since_refresh = 0;
      fresh = true;
      if (!dual_feasible()) return DualOutcome::fallback;
      continue;
    }
    fresh = false;
    std::size_t enter = cols_;
    double best = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) {
      if (!eligible(j) || std::abs(d_[j]) / std::abs(row[j]) > bound) continue;
      if (std::abs(row[j]) > best) {
        best = std::abs(row[j]);
        enter = j;
      }
    }

    const double dx = -(target - x_[leave]) / row[enter];
    for (std::size_t i = 0; i < m_; ++i) {
      const double a = tab(i, enter);
      if (a != 0.0) x_[head_[i]] -= a * dx;
    }
    x_[enter] += dx;
    x_[leave] = target;
    at_[leave] = raise || lb_[leave] == ub_[leave] ? At::lower : At::upper;
    pivot(r, enter);
    at_[enter] = At::basic;
    ++iterations_;

    if (++since_refresh >= kRefreshEvery) {
      since_refresh = 0;
      recompute_basics();
      recompute_phase2_costs();
      if (!dual_feasible()) return DualOutcome::fallback;
    }
    if (objective() >= cutoff) {
      // check on clean values before giving up on the node
      if (drift_ >= kVerifyAfter) recompute_basics();
      since_refresh = 0;
      if (objective() >= cutoff) return DualOutcome::cutoff;
    }
  }
}

void BoundedSimplex::shift_nonbasic(std::size_t j, double value) {
  const double delta = value - x_[j];
  x_[j] = value;
  if (delta != 0.0)
    for (std::size_t i = 0; i < m_; ++i) x_[head_[i]] -= tab(i, j) * delta;
}

std::vector<BoundedSimplex::Artificial> BoundedSimplex::make_dual_feasible() {
  if (!d_valid_) recompute_phase2_costs();
  std::vector<Artificial> boxed;
  for (std::size_t j = 0; j < cols_; ++j) {
    if (at_[j] == At::basic || lb_[j] == ub_[j]) continue;
    const double d = d_[j];
    const bool wants_up = d < -kDualTol && at_[j] != At::upper;
    const bool wants_down = d > kDualTol && at_[j] != At::lower;
    if (!wants_up && !wants_down) continue;
    if (wants_up && !std::isfinite(ub_[j])) {
      boxed.push_back({j, lb_[j], ub_[j]});
      ub_[j] = (std::isfinite(lb_[j]) ? lb_[j] : x_[j]) + kArtificialBox;
    } else if (wants_down && !std::isfinite(lb_[j])) {
      boxed.push_back({j, lb_[j], ub_[j]});
      lb_[j] = (std::isfinite(ub_[j]) ? ub_[j] : x_[j]) - kArtificialBox;
    }
    at_[j] = wants_up ? At::upper : At::lower;
    shift_nonbasic(j, wants_up ? ub_[j] : lb_[j]);
  }
  return boxed;
}

LpStatus BoundedSimplex::run(std::size_t iteration_limit, double cutoff) {
  if (iteration_limit == 0) iteration_limit = 50 * (m_ + cols_) + 10000;

  // Infeasible basics are repaired by the dual method when the basis is (or
  // can be made) dual feasible: a warm start after bound changes usually is,
  // and a cold start gets there by moving nonbasics to their other bound,
  // boxing unbounded ones temporarily.
  std::size_t start = 0;
  {
    double w = 0.0;
    bool infeasible = false;
    for (std::size_t i = 0; i < m_ && !infeasible; ++i) infeasible = infeasible_basic(i, w);
    if (infeasible) {
      const std::size_t before = iterations_;
      const auto boxed = make_dual_feasible();
      // verdicts on the boxed problem say nothing about the original one
      const bool trusted = boxed.empty();
      const auto outcome = dual_phase(std::min(iteration_limit, 10 * (m_ + n_) + 100), trusted ? cutoff : kInf);
      for (const auto& a : boxed) {
        lb_[a.var] = a.lb;
        ub_[a.var] = a.ub;
        if (at_[a.var] == At::basic) continue;
        const double old = x_[a.var];
        place_nonbasic(a.var);
        const double now = x_[a.var];
        x_[a.var] = old;
        shift_nonbasic(a.var, now);
      }
      if (trusted && outcome == DualOutcome::infeasible) return LpStatus::infeasible;
      if (trusted && outcome == DualOutcome::cutoff) return LpStatus::cutoff;
      start = iterations_ - before;  // otherwise the primal method takes over
    }
  }
  const std::size_t bland_after = 2 * (m_ + n_);
  std::size_t degenerate_run = 0;
  bool bland = false;
  bool verified = false;
  std::size_t since_refresh = 0;
  std::vector<double> phase1_d(cols_);
  std::vector<double> weight(m_);

  struct Candidate {
    std::size_t row;
    double actual;
    double target;
  };
  std::vector<Candidate> cands;

  for (std::size_t local = start;; ++local) {
    if (local >= iteration_limit) return LpStatus::iteration_limit;

    bool phase1 = false;
    for (std::size_t i = 0; i < m_; ++i) phase1 |= infeasible_basic(i, weight[i]);
    const double* dj;
    if (phase1) {
      std::fill(phase1_d.begin(), phase1_d.end(), 0.0);
      for (std::size_t i = 0; i < m_; ++i) {
        if (weight[i] == 0.0) continue;
        const double* row = &alpha_[i * cols_];
        const double w = weight[i];
        for (std::size_t j = 0; j < cols_; ++j) phase1_d[j] -= w * row[j];
      }
      dj = phase1_d.data();
    } else {
      if (!d_valid_) recompute_phase2_costs();
      dj = d_.data();
    }

    // pricing
    std::size_t enter = cols_;
    double dir = 0.0, best = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) {
      if (at_[j] == At::basic || lb_[j] == ub_[j]) continue;
      const double d = dj[j];
      double dd = 0.0;
      if (at_[j] == At::lower && d < -kDualTol) dd = 1.0;
      else if (at_[j] == At::upper && d > kDualTol) dd = -1.0;
      else if (at_[j] == At::zero && std::abs(d) > kDualTol) dd = d > 0.0 ? -1.0 : 1.0;
      if (dd == 0.0) continue;
      if (bland) {
        enter = j;
        dir = dd;
        break;
      }
      if (std::abs(d) > best) {
        best = std::abs(d);
        enter = j;
        dir = dd;
      }
    }

    if (enter == cols_) {
      if (phase1) return LpStatus::infeasible;
      if (!verified && drift_ >= kVerifyAfter) {
        // clean accumulated drift once before declaring optimality
        recompute_basics();
        recompute_phase2_costs();
        verified = true;
        continue;
      }
      return LpStatus::optimal;
    }
    verified = false;

    // ratio test
    const double flip = (std::isfinite(lb_[enter]) && std::isfinite(ub_[enter])) ? ub_[enter] - lb_[enter] : kInf;
    cands.clear();
    double relaxed_min = kInf;
    double actual_min = kInf;
    for (std::size_t i = 0; i < m_; ++i) {
      const double a = tab(i, enter);
      if (std::abs(a) <= kPivotTol) continue;
      const double rate = -a * dir;
      const std::size_t v = head_[i];
      const double xv = x_[v];
      double target, slack_tol;
      if (phase1 && xv < lb_[v] - tol_) {
        if (rate <= 0.0) continue;
        target = lb_[v];
        slack_tol = tol_;
      } else if (phase1 && xv > ub_[v] + tol_) {
        if (rate >= 0.0) continue;
        target = ub_[v];
        slack_tol = -tol_;
      } else if (rate > 0.0) {
        if (!std::isfinite(ub_[v])) continue;
        target = ub_[v];
        slack_tol = tol_;
      } else {
        if (!std::isfinite(lb_[v])) continue;
        target = lb_[v];
        slack_tol = -tol_;
      }
      const double actual = (target - xv) / rate;
      const double relaxed = (target + slack_tol - xv) / rate;
      cands.push_back({i, actual, target});
      relaxed_min = std::min(relaxed_min, relaxed);
      actual_min = std::min(actual_min, actual);
    }

    std::size_t leave_row = m_;
    double theta;
    double leave_target = 0.0;
    if (bland) {
      const double tmin = std::max(actual_min, 0.0);
      if (flip <= tmin) {
        theta = flip;
      } else {
        theta = tmin;
        std::size_t best_var = cols_;
        for (const auto& c : cands) {
          if (std::max(c.actual, 0.0) <= tmin + 1e-12 && head_[c.row] < best_var) {
            best_var = head_[c.row];
            leave_row = c.row;
            leave_target = c.target;
          }
        }
      }
    } else if (flip <= relaxed_min) {
      theta = flip;
    } else {
      double best_abs = 0.0;
      theta = 0.0;
      for (const auto& c : cands) {
        if (c.actual > relaxed_min) continue;
        const double a = std::abs(tab(c.row, enter));
        if (a > best_abs) {
          best_abs = a;
          leave_row = c.row;
          leave_target = c.target;
          theta = std::max(c.actual, 0.0);
        }
      }
    }

    if (!std::isfinite(theta)) return phase1 ? LpStatus::infeasible : LpStatus::unbounded;

    // update values along the edge
    if (theta != 0.0) {
      for (std::size_t i = 0; i < m_; ++i) {
        const double a = tab(i, enter);
        if (a != 0.0) x_[head_[i]] -= a * dir * theta;
      }
      x_[enter] += dir * theta;
    }
    if (leave_row == m_) {
      at_[enter] = dir > 0.0 ? At::upper : At::lower;
      x_[enter] = dir > 0.0 ? ub_[enter] : lb_[enter];
    } else {
      const std::size_t v = head_[leave_row];
      x_[v] = leave_target;
      at_[v] = (leave_target == ub_[v] && leave_target != lb_[v]) ? At::upper : At::lower;
      pivot(leave_row, enter);
      at_[enter] = At::basic;
    }
    ++iterations_;

    if (theta <= 1e-12) {
      if (++degenerate_run > bland_after) bland = true;
    } else {
      degenerate_run = 0;
      bland = false;
    }
    if (++since_refresh >= kRefreshEvery) {
      since_refresh = 0;
      recompute_basics();
      d_valid_ = false;
    }
  }
}

double BoundedSimplex::objective() const {
  double acc = 0.0;
  for (std::size_t j = 0; j < n_; ++j) acc += cost_[j] * x_[j];
  return acc;
}

std::vector<double> BoundedSimplex::primal() const { return {x_.begin(), x_.begin() + static_cast<std::ptrdiff_t>(n_)}; }

BoundedSimplex::Refined BoundedSimplex::refine() const {
  // dense columns of [A | -I]
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(cols_));
  for (std::size_t i = 0; i < m_; ++i) {
    for (const auto& t : problem_->constraint(i).terms) full(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t.var)) += t.coef;
    full(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n_ + i)) = -1.0;
  }
  const auto m = static_cast<Eigen::Index>(m_);
  Eigen::MatrixXd basis(m, m);
  Eigen::VectorXd cb(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    basis.col(i) = full.col(static_cast<Eigen::Index>(head_[static_cast<std::size_t>(i)]));
    cb(i) = cost_[head_[static_cast<std::size_t>(i)]];
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  for (std::size_t j = 0; j < cols_; ++j)
    if (at_[j] != At::basic && x_[j] != 0.0) rhs -= full.col(static_cast<Eigen::Index>(j)) * x_[j];

  Refined out;
  std::vector<double> all(x_);
  if (m > 0) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis);
    const Eigen::VectorXd xb = lu.solve(rhs);
    const Eigen::VectorXd y = lu.transpose().solve(cb);
    for (Eigen::Index i = 0; i < m; ++i) all[head_[static_cast<std::size_t>(i)]] = xb(i);
    out.y.assign(y.data(), y.data() + m);
  }
  out.x.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n_));
  out.d.resize(n_);
  for (std::size_t j = 0; j < n_; ++j) {
    double acc = cost_[j];
    if (at_[j] != At::basic)
      for (Eigen::Index i = 0; i < m; ++i) acc -= full(i, static_cast<Eigen::Index>(j)) * out.y[static_cast<std::size_t>(i)];
    out.d[j] = at_[j] == At::basic ? 0.0 : acc;
  }
  // a basic activity variable has zero reduced cost, so its row dual is 0
  for (std::size_t i = 0; i < m_; ++i)
    if (at_[n_ + i] == At::basic) out.y[i] = 0.0;
  return out;
}

std::size_t BoundedSimplex::memory_bytes() const {
  return alpha_.size() * sizeof(double) + (cost_.size() + lb_.size() + ub_.size() + x_.size() + d_.size()) * sizeof(double) +
         at_.size() + head_.size() * sizeof(std::size_t);
}

}  // namespace vppflex::milp::detail
