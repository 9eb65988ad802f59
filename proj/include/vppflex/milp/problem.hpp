#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace vppflex::milp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { le, eq, ge };
enum class ObjectiveSense { minimize, maximize };

struct Variable {
  std::string name;
  double lb = 0.0;
  double ub = kInf;
  bool integer = false;
};

struct Term {
  std::size_t var;
  double coef;
};

struct Constraint {
  std::string name;
  std::vector<Term> terms;
  Sense sense = Sense::le;
  double rhs = 0.0;
};

/// Linear program with optional integrality, stored row-wise.
class MilpProblem {
 public:
  std::size_t add_variable(std::string name, double lb, double ub, bool integer = false);
  std::size_t add_binary(std::string name) { return add_variable(std::move(name), 0.0, 1.0, true); }
  std::size_t add_constraint(std::string name, std::vector<Term> terms, Sense sense, double rhs);
  /// Appends a coefficient to an existing row (builders assemble rows piecewise).
  void add_term(std::size_t row, std::size_t var, double coef);

  void set_objective_sense(ObjectiveSense s) { sense_ = s; }
  void set_objective(std::size_t var, double coef);
  void add_objective(std::size_t var, double coef);

  ObjectiveSense objective_sense() const { return sense_; }
  const std::vector<double>& objective() const { return objective_; }
  const std::vector<Variable>& variables() const { return variables_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  Variable& variable(std::size_t i) { return variables_[i]; }
  const Variable& variable(std::size_t i) const { return variables_[i]; }
  Constraint& constraint(std::size_t i) { return constraints_[i]; }
  const Constraint& constraint(std::size_t i) const { return constraints_[i]; }

  std::size_t variable_count() const { return variables_.size(); }
  std::size_t constraint_count() const { return constraints_.size(); }
  bool has_integers() const;

  double objective_value(std::span<const double> x) const;
  double row_activity(std::size_t row, std::span<const double> x) const;
  /// Largest bound or row violation of x (0 if feasible).
  double max_violation(std::span<const double> x) const;

  /// Problems with the model itself: unknown variables, NaN data, crossed
  /// bounds, duplicate names. Empty if well formed.
  std::vector<std::string> check() const;

 private:
  std::vector<Variable> variables_;
  std::vector<double> objective_;
  std::vector<Constraint> constraints_;
  ObjectiveSense sense_ = ObjectiveSense::minimize;
};

}  // namespace vppflex::milp
