#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "vppflex/cost/cost_model.hpp"
#include "vppflex/ss/subset_simulation.hpp"

namespace vppflex::curve {

/// g(u): maximum product quantity of the scenario at u. EV removals are drawn
/// from a stream tied to u and `salt`, so repeated calls agree.
ss::PerformanceFunction performance_function(const model::VppInstance& instance, const model::ProductSpec& spec,
                                             const scenario::UncertaintyModel& model, std::uint64_t salt,
                                             const flex::FlexOptions& opts = {});

struct MaxFlexibility {
  double q_max = 0.0;  // kW
  /// The quantile scenario cannot even run the dispatch; q_max is then 0.
  bool infeasible_at_quantile = false;
  ss::SsResult ss;
};

/// Quantity the VPP can offer with probability spec.reliability: the
/// (1 - reliability)-quantile of g by subset simulation. The target
/// probability of `cfg` is taken from the spec and its seed doubles as the
/// salt of performance_function.
MaxFlexibility max_flexibility(const model::VppInstance& instance, const model::ProductSpec& spec,
                               const scenario::UncertaintyModel& model, ss::SsConfig cfg,
                               const support::Executor& executor = support::Executor(1),
                               const flex::FlexOptions& opts = {});

struct SweepConfig {
  std::size_t steps = 30;     // grid intervals; steps + 1 quantities
  std::size_t samples = 1000;  // LHS scenarios per quantity
  double risk_level = 0.5;    // quantile probability of the reported cost
  std::vector<double> bands{0.05, 0.25, 0.5, 0.75, 0.95};

  std::vector<std::string> check() const;
};

struct CurvePoint {
  double quantity = 0.0;            // kW
  double cost = 0.0;                // CHF/kW at the risk level, +inf if too often infeasible
  std::vector<double> bands;        // one per SweepConfig::bands
  double infeasible_fraction = 0.0;
  bool monotone_violation = false;  // cost below the previous point
  bool excess_infeasibility = false;  // more infeasible draws than the reliability allows
};

struct SupplyCurve {
  std::vector<double> band_levels;
  std::vector<CurvePoint> points;
  double q_max = 0.0;
  double risk_level = 0.0;
  std::size_t samples = 0;

  bool monotone() const;
};

/// Marginal cost of the product over an equally spaced quantity grid on
/// [0, q_max]. Every grid point sees the same LHS scenario set; infeasible
/// draws count as +inf in the quantiles.
SupplyCurve build_supply_curve(const model::VppInstance& instance, const model::ProductSpec& spec,
                               const scenario::UncertaintyModel& model, double q_max, const SweepConfig& cfg,
                               std::uint64_t seed, const support::Executor& executor = support::Executor(1),
                               const flex::FlexOptions& opts = {});

/// Worst downward step allowed before a point is flagged, CHF/kW.
inline constexpr double kMonotoneTol = 1e-7;

enum class SweepAxis { reliability, ramp_time, duration, delivery_start };

std::string_view to_string(SweepAxis axis);
/// Parses "reliability", "ramp_time", "duration" or "delivery_start".
bool parse_axis(std::string_view text, SweepAxis& axis);

/// The spec with the swept parameter set to value.
model::ProductSpec with_axis(model::ProductSpec spec, SweepAxis axis, double value);

struct SweepRow {
  double value = 0.0;
  bool ok = false;
  double q_max = 0.0;
  double cov_quantile = 0.0;
  std::size_t evaluations = 0;
  std::string error;  // why the point failed
};

/// Maximum flexibility per value of one product parameter. Every point uses
/// the seed of `cfg`; a failing point is recorded and the sweep goes on.
std::vector<SweepRow> sensitivity_sweep(const model::VppInstance& instance, const model::ProductSpec& spec,
                                        const scenario::UncertaintyModel& model, SweepAxis axis,
                                        const std::vector<double>& values, const ss::SsConfig& cfg,
                                        const support::Executor& executor = support::Executor(1),
                                        const flex::FlexOptions& opts = {});

}  // namespace vppflex::curve
