#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "vppflex/milp/problem.hpp"
#include "vppflex/milp/solver.hpp"
#include "vppflex/model/types.hpp"
#include "vppflex/scenario/uncertainty.hpp"

namespace vppflex::flex {

inline constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

/// Returned by evaluate_g when even the dispatch state is infeasible. Ranks
/// below every attainable quantity.
inline constexpr double kInfeasibleG = -std::numeric_limits<double>::infinity();

struct GeneratorVars {
  std::size_t p, q;
};
struct HeatPumpVars {
  std::size_t p, q, on, temp;  // on == kNone when P_min == 0 (no binary needed)
};
struct StorageVars {
  std::size_t ch, dis, q, soc, mode;  // mode == kNone when the device cannot switch direction
};

/// The flexibility MILP with the indices needed to read or extend it. Blocks
/// indexed [s][k] cover the simulated states and the delivery steps k.
struct FlexModelHandles {
  milp::MilpProblem problem;
  std::vector<model::VppState> states;
  std::vector<std::size_t> steps;  // horizon index of each delivery step
  double step_h = 1.0;
  double s_base_kva = 1.0;

  std::size_t q = kNone;                            // product quantity, kW
  std::vector<std::size_t> q_t;                     // per delivery step
  std::vector<std::size_t> availability_rows;  // q <= q_t
  std::vector<std::size_t> up_rows;            // q_t = P_up - P_disp, empty without an up state
  std::vector<std::size_t> down_rows;          // q_t = P_disp - P_down, empty without a down state

  // network, [s][k][bus or branch]
  std::vector<std::vector<std::vector<std::size_t>>> v, p_branch, q_branch;
  std::vector<std::vector<std::size_t>> p_grid, q_grid;  // import through the slack bus, pu
  std::vector<std::vector<std::vector<std::size_t>>> balance_p, balance_q;  // rows, [s][k][bus]

  // resources, [i][s][k]
  std::vector<std::vector<std::vector<GeneratorVars>>> generators;
  std::vector<std::vector<std::vector<HeatPumpVars>>> heat_pumps;
  std::vector<std::vector<std::vector<StorageVars>>> ev_events;  // empty blocks for absent events
  std::vector<std::vector<std::vector<StorageVars>>> batteries;

  std::size_t state_index(model::VppState s) const;
  /// Coefficient c such that P^PCC (kW, export positive) = c * p_grid.
  double pcc_coefficient() const { return -s_base_kva; }
};

/// Creates the state/step skeleton (no variables yet).
FlexModelHandles make_handles(const model::VppInstance& instance, const model::ProductSpec& spec);

/// Linear DistFlow: per-bus balances, voltage drops, voltage box and the
/// polygonal branch capacity limit. Balance rows are created here with the
/// network terms; the DER builder adds resource and load terms.
void build_network_constraints(FlexModelHandles& h, const model::RadialNetwork& network);

/// Resource models (generators, heat pumps, EV charging events, batteries),
/// their coupling to the nodal balances, and the fixed loads.
void build_der_constraints(FlexModelHandles& h, const model::VppInstance& instance,
                           const scenario::ScenarioRealization& scenario, const model::ProductSpec& spec);

/// Product quantity and its per-step availability in the activated states.
void build_product_constraints(FlexModelHandles& h, const model::ProductSpec& spec);

/// Complete flexibility-maximization model (objective: maximize q).
FlexModelHandles build_flex_model(const model::VppInstance& instance, const model::ProductSpec& spec,
                                  const scenario::ScenarioRealization& scenario);

/// Raised when the solver stops without a verdict (limits, unboundedness).
class SolverFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FlexOptions {
  milp::SolveOptions solve;
  const milp::SolverBackend* backend = nullptr;  // default backend if null
};

struct FlexOutcome {
  double q = kInfeasibleG;
  milp::MilpSolution solution;
};

FlexOutcome solve_flex(const FlexModelHandles& h, const FlexOptions& opts = {});

/// Maximum product quantity g(z) for one scenario (kW), or kInfeasibleG.
double evaluate_g(const model::VppInstance& instance, const model::ProductSpec& spec,
                  const scenario::ScenarioRealization& scenario, const FlexOptions& opts = {});

}  // namespace vppflex::flex
