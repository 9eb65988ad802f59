#include "vppflex/milp/problem.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace vppflex::milp {

std::size_t MilpProblem::add_variable(std::string name, double lb, double ub, bool integer) {
  variables_.push_back({std::move(name), lb, ub, integer});
  objective_.push_back(0.0);
  return variables_.size() - 1;
}

std::size_t MilpProblem::add_constraint(std::string name, std::vector<Term> terms, Sense sense, double rhs) {
  constraints_.push_back({std::move(name), std::move(terms), sense, rhs});
  return constraints_.size() - 1;
}

void MilpProblem::add_term(std::size_t row, std::size_t var, double coef) {
  constraints_[row].terms.push_back({var, coef});
}

void MilpProblem::set_objective(std::size_t var, double coef) { objective_[var] = coef; }
void MilpProblem::add_objective(std::size_t var, double coef) { objective_[var] += coef; }

bool MilpProblem::has_integers() const {
  return std::any_of(variables_.begin(), variables_.end(), [](const Variable& v) { return v.integer; });
}

double MilpProblem::objective_value(std::span<const double> x) const {
  double acc = 0.0;
  for (std::size_t j = 0; j < objective_.size(); ++j) acc += objective_[j] * x[j];
  return acc;
}

double MilpProblem::row_activity(std::size_t row, std::span<const double> x) const {
  double acc = 0.0;
  for (const auto& t : constraints_[row].terms) acc += t.coef * x[t.var];
  return acc;
}

double MilpProblem::max_violation(std::span<const double> x) const {
  double worst = 0.0;
  for (std::size_t j = 0; j < variables_.size(); ++j) {
    worst = std::max(worst, variables_[j].lb - x[j]);
    worst = std::max(worst, x[j] - variables_[j].ub);
  }
  for (std::size_t i = 0; i < constraints_.size(); ++i) {
    const double a = row_activity(i, x);
    const auto& c = constraints_[i];
    if (c.sense != Sense::ge) worst = std::max(worst, a - c.rhs);
    if (c.sense != Sense::le) worst = std::max(worst, c.rhs - a);
  }
  return worst;
}

std::vector<std::string> MilpProblem::check() const {
  std::vector<std::string> issues;
  std::unordered_set<std::string_view> names;
  for (const auto& v : variables_) {
    if (std::isnan(v.lb) || std::isnan(v.ub)) issues.push_back("variable " + v.name + " has NaN bound");
    if (v.lb > v.ub) issues.push_back("variable " + v.name + " has lb > ub");
    if (v.lb == kInf || v.ub == -kInf) issues.push_back("variable " + v.name + " has an unattainable bound");
    if (!names.insert(v.name).second) issues.push_back("duplicate name " + v.name);
  }
  for (double c : objective_)
    if (!std::isfinite(c)) issues.emplace_back("objective has a non-finite coefficient");
  names.clear();
  for (const auto& c : constraints_) {
    if (!std::isfinite(c.rhs)) issues.push_back("constraint " + c.name + " has non-finite rhs");
    if (!names.insert(c.name).second) issues.push_back("duplicate name " + c.name);
    for (const auto& t : c.terms) {
      if (t.var >= variables_.size()) issues.push_back("constraint " + c.name + " references an unknown variable");
      if (!std::isfinite(t.coef)) issues.push_back("constraint " + c.name + " has a non-finite coefficient");
    }
  }
  return issues;
}

}  // namespace vppflex::milp
