#include "vppflex/milp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <queue>

#include "simplex.hpp"

namespace vppflex::milp {

using detail::BoundedSimplex;
using detail::LpStatus;

std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::limit: return "limit";
  }
  return "?";
}

namespace {

SolveStatus from_lp(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return SolveStatus::optimal;
    case LpStatus::infeasible: return SolveStatus::infeasible;
    case LpStatus::unbounded: return SolveStatus::unbounded;
    case LpStatus::iteration_limit:
    case LpStatus::cutoff: return SolveStatus::limit;
  }
  return SolveStatus::limit;
}

MilpSolution solve_relaxation(const MilpProblem& problem, const SolveOptions& opts) {
  BoundedSimplex lp(problem, opts.feas_tol);
  MilpSolution sol;
  sol.status = from_lp(lp.run(opts.iteration_limit));
  sol.iterations = lp.iterations();
  if (sol.status == SolveStatus::optimal) {
    sol.values = lp.primal();
    sol.objective = problem.objective_value(sol.values);
  }
  return sol;
}

// Snapshots of solved node LPs let children restart from their parent's basis.
// Their total size is capped; beyond the cap a child restarts from the root.
constexpr std::size_t kSnapshotBudget = std::size_t{256} << 20;

struct BoundChange {
  std::size_t var;
  double lb, ub;
};

struct Node {
  double bound;
  std::size_t id;
  std::shared_ptr<BoundedSimplex> start;
  std::size_t applied;  // number of changes already reflected in `start`
  std::vector<BoundChange> changes;
  int dir = 0;          // -1 or +1 when the last change is a branching step
  double moved = 0.0;   // distance the branched variable was pushed
};

/// Average objective change per unit move of each integer variable, learned
/// from the children solved so far.
class Pseudocosts {
 public:
  explicit Pseudocosts(std::size_t n) : sum_{std::vector<double>(n), std::vector<double>(n)}, count_{std::vector<int>(n), std::vector<int>(n)} {}

  void record(std::size_t j, int dir, double moved, double gain) {
    if (moved <= 0.0) return;
    const int s = dir > 0;
    sum_[s][j] += std::max(gain, 0.0) / moved;
    ++count_[s][j];
    total_[s] += std::max(gain, 0.0) / moved;
    ++seen_[s];
  }

  /// Product score of the two children; unseen directions use the mean.
  double score(std::size_t j, double frac) const {
    auto unit = [&](int s) {
      if (count_[s][j] > 0) return sum_[s][j] / count_[s][j];
      return seen_[s] > 0 ? total_[s] / seen_[s] : 1.0;
    };
    constexpr double kFloor = 1e-6;
    return std::max(frac * unit(0), kFloor) * std::max((1.0 - frac) * unit(1), kFloor);
  }

 private:
  std::vector<double> sum_[2];
  std::vector<int> count_[2];
  double total_[2] = {0.0, 0.0};
  int seen_[2] = {0, 0};
};

struct WorseNode {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

MilpSolution branch_and_bound(const MilpProblem& problem, const SolveOptions& opts) {
  const std::size_t n = problem.variable_count();

  std::vector<double> lb(n), ub(n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto& v = problem.variable(j);
    lb[j] = v.integer ? std::ceil(v.lb - opts.int_tol) : v.lb;
    ub[j] = v.integer ? std::floor(v.ub + opts.int_tol) : v.ub;
  }
  MilpSolution result;
  for (std::size_t j = 0; j < n; ++j)
    if (lb[j] > ub[j]) return result;

  auto root = std::make_shared<BoundedSimplex>(problem, opts.feas_tol);
  for (std::size_t j = 0; j < n; ++j)
    if (problem.variable(j).integer) root->set_bounds(j, lb[j], ub[j]);
  std::shared_ptr<const BoundedSimplex> root_start = root;

  std::size_t live_bytes = 0;
  auto keep = [&live_bytes](BoundedSimplex&& s) -> std::shared_ptr<BoundedSimplex> {
    const std::size_t bytes = s.memory_bytes();
    if (live_bytes + bytes > kSnapshotBudget) return nullptr;
    live_bytes += bytes;
    return std::shared_ptr<BoundedSimplex>(new BoundedSimplex(std::move(s)), [&live_bytes, bytes](BoundedSimplex* p) {
      live_bytes -= bytes;
      delete p;
    });
  };

  std::priority_queue<Node, std::vector<Node>, WorseNode> open;
  std::size_t next_id = 0;
  open.push({-kInf, next_id++, nullptr, 0, {}});

  double incumbent = kInf;
  std::vector<double> best;
  bool limited = false;
  bool unbounded = false;

  // best-first search with plunging: after branching, the preferred child is
  // solved at once on the parent's tableau and only the sibling is queued
  std::optional<BoundedSimplex> lp;
  std::optional<Node> plunge;
  Pseudocosts pseudo(n);
  for (;;) {
    Node node;
    const bool in_place = plunge.has_value();
    if (in_place) {
      node = std::move(*plunge);
      plunge.reset();
    } else {
      if (open.empty()) break;
      node = open.top();
      open.pop();
    }
    const double gap = opts.gap_tol * std::max(1.0, std::abs(incumbent));
    if (std::isfinite(incumbent) && node.bound >= incumbent - gap) continue;
    if (result.nodes >= opts.node_limit) {
      limited = true;
      break;
    }

    if (!in_place) {
      // the last owner of a snapshot hands its tableau over instead of copying
      if (node.start && node.start.use_count() == 1) {
        lp.emplace(std::move(*node.start));
      } else {
        lp.emplace(node.start ? *node.start : *root_start);
      }
      node.start.reset();
    }
    for (std::size_t k = node.applied; k < node.changes.size(); ++k)
      lp->set_bounds(node.changes[k].var, node.changes[k].lb, node.changes[k].ub);
    const std::size_t before = lp->iterations();
    const LpStatus st = lp->run(opts.iteration_limit, std::isfinite(incumbent) ? incumbent - gap : kInf);
    ++result.nodes;
    result.iterations += lp->iterations() - before;
    if (st == LpStatus::infeasible || st == LpStatus::cutoff) continue;
    if (st == LpStatus::unbounded) {
      unbounded = true;
      break;
    }
    if (st == LpStatus::iteration_limit) {
      limited = true;
      continue;
    }
    const double obj = lp->objective();
    if (node.dir != 0) pseudo.record(node.changes.back().var, node.dir, node.moved, obj - node.bound);
    if (std::isfinite(incumbent) && obj >= incumbent - gap) continue;

    const auto x = lp->primal();
    std::size_t branch = n;
    double best_score = -1.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (!problem.variable(j).integer) continue;
      const double frac = x[j] - std::floor(x[j]);
      if (std::min(frac, 1.0 - frac) <= opts.int_tol) continue;
      const double sc = pseudo.score(j, frac);
      if (sc > best_score) {
        best_score = sc;
        branch = j;
      }
    }
    if (branch == n) {
      incumbent = obj;
      best = x;
      continue;
    }

    double cur_lb = lb[branch], cur_ub = ub[branch];
    for (const auto& c : node.changes)
      if (c.var == branch) {
        cur_lb = c.lb;
        cur_ub = c.ub;
      }
    const BoundChange down{branch, cur_lb, std::floor(x[branch])};
    const BoundChange up{branch, std::ceil(x[branch]), cur_ub};
    const double frac = x[branch] - std::floor(x[branch]);
    const bool round_up = frac >= 0.5;
    auto sibling = node.changes;
    sibling.push_back(round_up ? down : up);
    auto start = keep(BoundedSimplex(*lp));
    const std::size_t applied = start ? node.changes.size() : 0;
    open.push({obj, next_id++, std::move(start), applied, std::move(sibling), round_up ? -1 : 1,
               round_up ? frac : 1.0 - frac});
    // lp already reflects node.changes, so only the new bound is pending
    node.changes.push_back(round_up ? up : down);
    plunge = Node{obj, next_id++, nullptr, node.changes.size() - 1, std::move(node.changes), round_up ? 1 : -1,
                  round_up ? 1.0 - frac : frac};
  }

  if (unbounded) {
    result.status = SolveStatus::unbounded;
    return result;
  }
  if (best.empty()) {
    result.status = limited ? SolveStatus::limit : SolveStatus::infeasible;
    return result;
  }
  // polish: re-solve the LP with the integers pinned, warm from the root
  BoundedSimplex polish(*root_start);
  for (std::size_t j = 0; j < n; ++j)
    if (problem.variable(j).integer) polish.set_bounds(j, std::round(best[j]), std::round(best[j]));
  const std::size_t before = polish.iterations();
  const LpStatus ps = polish.run(opts.iteration_limit);
  result.iterations += polish.iterations() - before;
  if (ps == LpStatus::optimal && polish.objective() <= incumbent + 1e-7 * std::max(1.0, std::abs(incumbent))) {
    result.values = polish.primal();
  } else {
    result.values = std::move(best);
  }
  for (std::size_t j = 0; j < n; ++j)
    if (problem.variable(j).integer) result.values[j] = std::round(result.values[j]);
  result.objective = problem.objective_value(result.values);
  result.status = limited ? SolveStatus::limit : SolveStatus::optimal;
  return result;
}

}  // namespace

MilpSolution solve(const MilpProblem& problem, const SolveOptions& opts) {
  if (!problem.has_integers()) return solve_relaxation(problem, opts);
  return branch_and_bound(problem, opts);
}

MilpSolution solve_lp_with_duals(const MilpProblem& problem, const SolveOptions& opts) {
  BoundedSimplex lp(problem, opts.feas_tol);
  MilpSolution sol;
  sol.status = from_lp(lp.run(opts.iteration_limit));
  sol.iterations = lp.iterations();
  if (!sol.optimal()) return sol;
  auto refined = lp.refine();
  // keep the tableau point if the refactorization did not improve it
  auto tableau_x = lp.primal();
  if (problem.max_violation(refined.x) <= std::max(problem.max_violation(tableau_x), opts.feas_tol))
    sol.values = std::move(refined.x);
  else
    sol.values = std::move(tableau_x);
  sol.objective = problem.objective_value(sol.values);
  const double sign = problem.objective_sense() == ObjectiveSense::maximize ? -1.0 : 1.0;
  sol.duals = std::move(refined.y);
  sol.reduced_costs = std::move(refined.d);
  for (auto& y : sol.duals) y *= sign;
  for (auto& d : sol.reduced_costs) d *= sign;
  return sol;
}

MilpProblem fix_integers(const MilpProblem& problem, std::span<const double> values) {
  MilpProblem fixed = problem;
  for (std::size_t j = 0; j < fixed.variable_count(); ++j) {
    auto& v = fixed.variable(j);
    if (!v.integer) continue;
    v.lb = v.ub = std::round(values[j]);
    v.integer = false;
  }
  return fixed;
}

double dual_objective(const MilpProblem& problem, const MilpSolution& sol) {
  const double sign = problem.objective_sense() == ObjectiveSense::maximize ? -1.0 : 1.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < problem.constraint_count(); ++i) acc += sign * sol.duals[i] * problem.constraint(i).rhs;
  for (std::size_t j = 0; j < problem.variable_count(); ++j) {
    const double d = sign * sol.reduced_costs[j];
    const auto& v = problem.variable(j);
    const double bound = d > 0.0 ? v.lb : v.ub;
    if (std::isfinite(bound)) {
      acc += d * bound;
    } else if (std::abs(d) > 1e-9) {
      return sign * -kInf;
    }
  }
  return sign * acc;
}

const SolverBackend& default_backend() {
  static const ReferenceSolver solver;
  return solver;
}

}  // namespace vppflex::milp
