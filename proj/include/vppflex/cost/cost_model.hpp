#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "vppflex/flex/flex_model.hpp"

namespace vppflex::cost {

/// Nonnegative parts of a signed quantity: value = pos - neg.
struct Split {
  std::size_t pos = flex::kNone, neg = flex::kNone;
};

/// The flexibility model turned into a cost minimization. Every block below
/// covers the dispatch state only, indexed [i][k].
struct CostModelHandles {
  flex::FlexModelHandles flex;
  std::vector<std::vector<Split>> generator_q, heat_pump_q, heat_pump_dt, ev_q, battery_q;
  std::vector<std::vector<std::size_t>> area_injection, area_withdrawal;  // [area][k]
  std::size_t min_quantity_row = flex::kNone;                             // q >= q_eps
};

/// Adds the splits, the metering-area balance and the five cost terms of the
/// dispatch state, and switches the objective to minimization.
void build_cost_objective(CostModelHandles& h, const model::VppInstance& instance,
                          const scenario::ScenarioRealization& scenario);

/// Flexibility constraints, the minimum-quantity row and the cost objective.
CostModelHandles build_cost_model(const model::VppInstance& instance, const model::ProductSpec& spec,
                                  const scenario::ScenarioRealization& scenario, double q_eps);

struct ProductCost {
  bool feasible = false;
  double price = std::numeric_limits<double>::infinity();  // CHF per kW of product
  double total_cost = std::numeric_limits<double>::infinity();  // CHF over the delivery period
  std::vector<double> schedule;  // optimal values of the cost model's variables
};

/// Marginal cost of the product at quantity q_eps: the dual of q >= q_eps in
/// the LP obtained by fixing the binaries at the MILP optimum. Evaluated a
/// hair below q_eps so a kink at q_eps yields its left derivative.
/// Infeasible when q_eps exceeds what the scenario allows.
ProductCost product_cost(const model::VppInstance& instance, const model::ProductSpec& spec,
                         const scenario::ScenarioRealization& scenario, double q_eps,
                         const flex::FlexOptions& opts = {});

/// Shift below q_eps used for the left derivative, kW.
inline constexpr double kLeftShift = 1e-7;

}  // namespace vppflex::cost
