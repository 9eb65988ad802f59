#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "vppflex/milp/problem.hpp"

namespace vppflex::milp::detail {

/// `cutoff`: the dual bound reached the caller's cutoff before optimality.
enum class LpStatus { optimal, infeasible, unbounded, iteration_limit, cutoff };

/// Bounded-variable primal simplex on a dense tableau.
///
/// Every row i gets an activity variable s_i = a_i x whose bounds encode the
/// sense and rhs, so the system reads [A | -I] (x, s) = 0 and only bounds
/// change between branch-and-bound nodes. The problem is always minimized
/// internally; a maximization objective is negated on entry.
class BoundedSimplex {
 public:
  BoundedSimplex(const MilpProblem& problem, double feas_tol);

  /// Changes the bounds of structural variable j. A nonbasic variable is moved
  /// onto its new bound; a basic one may become infeasible, which the next
  /// run() repairs in phase 1.
  void set_bounds(std::size_t j, double lb, double ub);

  /// Solves from the current basis. With a finite `cutoff` a warm start that
  /// goes through the dual method stops as soon as its objective, a lower
  /// bound on the optimum, reaches the cutoff.
  LpStatus run(std::size_t iteration_limit, double cutoff = kInf);

  std::size_t rows() const { return m_; }
  std::size_t structurals() const { return n_; }
  std::size_t iterations() const { return iterations_; }
  /// Internal (minimized) objective at the current point.
  double objective() const;
  std::vector<double> primal() const;

  /// Values, row duals and reduced costs recomputed from an LU factorization
  /// of the current basis. Signs are for the internal minimization.
  struct Refined {
    std::vector<double> x;       // structurals
    std::vector<double> y;       // per row, d(objective)/d(rhs)
    std::vector<double> d;       // structural reduced costs
  };
  Refined refine() const;

  std::size_t memory_bytes() const;

 private:
  enum class At : std::uint8_t { basic, lower, upper, zero };

  double& tab(std::size_t i, std::size_t j) { return alpha_[i * cols_ + j]; }
  double tab(std::size_t i, std::size_t j) const { return alpha_[i * cols_ + j]; }

  enum class DualOutcome { feasible, infeasible, fallback, limit, cutoff };
  /// Dual simplex from a dual feasible basis until the basics are within
  /// bounds. Falls back to the primal method if dual feasibility is lost.
  DualOutcome dual_phase(std::size_t budget, double cutoff);
  bool dual_feasible() const;

  struct Artificial {
    std::size_t var;
    double lb, ub;  // original bounds
  };
  /// Moves every dual infeasible nonbasic to its other bound; one without
  /// that bound gets a temporary box, returned for later removal.
  std::vector<Artificial> make_dual_feasible();
  void shift_nonbasic(std::size_t j, double value);

  void place_nonbasic(std::size_t j);
  void recompute_basics();
  void recompute_phase2_costs();
  void pivot(std::size_t r, std::size_t j);
  bool infeasible_basic(std::size_t i, double& weight) const;

  const MilpProblem* problem_;
  std::size_t m_, n_, cols_;
  double tol_;
  std::vector<double> alpha_;  // m x cols, B^-1 [A | -I]
  std::vector<double> cost_;   // cols
  std::vector<double> lb_, ub_, x_;
  std::vector<At> at_;
  std::vector<std::size_t> head_;  // basic variable of each row
  std::vector<double> d_;          // phase 2 reduced costs
  bool d_valid_ = false;
  std::size_t iterations_ = 0;
  std::size_t drift_ = 0;  // pivots since basics were last recomputed
};

}  // namespace vppflex::milp::detail
