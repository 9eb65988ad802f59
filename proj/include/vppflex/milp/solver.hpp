#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "vppflex/milp/problem.hpp"

namespace vppflex::milp {

enum class SolveStatus { optimal, infeasible, unbounded, limit };

std::string_view to_string(SolveStatus s);

struct SolveOptions {
  double feas_tol = 1e-9;
  double int_tol = 1e-6;
  double gap_tol = 1e-9;  // relative
  std::size_t node_limit = 100000;
  std::size_t iteration_limit = 0;  // 0: automatic
};

struct MilpSolution {
  SolveStatus status = SolveStatus::infeasible;
  std::vector<double> values;
  double objective = 0.0;
  /// Per constraint: derivative of the optimal objective w.r.t. the rhs, in
  /// the problem's own objective sense. Filled for LP solves only.
  std::vector<double> duals;
  /// Per variable: objective rate of the variable moving off its bound.
  std::vector<double> reduced_costs;
  std::size_t nodes = 0;
  std::size_t iterations = 0;

  bool optimal() const { return status == SolveStatus::optimal; }
};

/// Solves the problem exactly: primal simplex for LPs, best-first branch and
/// bound on the LP relaxation otherwise.
MilpSolution solve(const MilpProblem& problem, const SolveOptions& opts = {});

/// LP solve ignoring integrality; duals and reduced costs are computed from a
/// refactorized optimal basis.
MilpSolution solve_lp_with_duals(const MilpProblem& problem, const SolveOptions& opts = {});

/// Copy of the problem with every integer variable pinned to the rounded
/// value and its integrality dropped.
MilpProblem fix_integers(const MilpProblem& problem, std::span<const double> values);

/// Objective of the LP dual implied by the duals and reduced costs of an
/// optimal solution (rhs terms plus active bound terms).
double dual_objective(const MilpProblem& problem, const MilpSolution& solution);

/// Solver seam, so an external solver can replace the built-in one.
class SolverBackend {
 public:
  virtual ~SolverBackend() = default;
  virtual std::string_view name() const = 0;
  virtual MilpSolution solve(const MilpProblem& problem, const SolveOptions& opts) const = 0;
  virtual MilpSolution solve_lp_with_duals(const MilpProblem& problem, const SolveOptions& opts) const = 0;
};

class ReferenceSolver final : public SolverBackend {
 public:
  std::string_view name() const override { return "reference"; }
  MilpSolution solve(const MilpProblem& problem, const SolveOptions& opts) const override {
    return milp::solve(problem, opts);
  }
  MilpSolution solve_lp_with_duals(const MilpProblem& problem, const SolveOptions& opts) const override {
    return milp::solve_lp_with_duals(problem, opts);
  }
};

const SolverBackend& default_backend();

}  // namespace vppflex::milp
