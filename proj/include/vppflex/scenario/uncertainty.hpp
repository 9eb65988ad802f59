#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vppflex/model/types.hpp"

namespace vppflex::scenario {

/// Lumped forecast-error channels, in the order used by the standard-normal
/// coordinate vector u.
enum Channel : std::size_t { kLoad = 0, kGeneration = 1, kTemperature = 2, kPrice = 3, kEvDisruption = 4 };
inline constexpr std::size_t kChannelCount = 5;

using StandardPoint = std::array<double, kChannelCount>;

/// Five independent forecast errors. Load and generation errors are relative
/// and multiplicative, temperature and price errors additive, EV schedule
/// disruption uniform. Defaults are the day-ahead values of the Swiss case.
struct UncertaintyModel {
  double sigma_load = 0.108;             // relative
  double sigma_generation = 0.0815;      // relative
  double sigma_temperature_k = 1.5;      // K
  double sigma_price_chf_per_mwh = 4.28;  // CHF/MWh
  double ev_disruption_min = 0.0;        // fraction of events removed
  double ev_disruption_max = 0.2;

  /// True when every channel is a point mass.
  bool degenerate() const;
  std::vector<std::string> check() const;
  /// A model with every channel switched off.
  static UncertaintyModel none();
};

/// Values of the five errors for one standard-normal point.
struct LumpedErrors {
  double load = 0.0;
  double generation = 0.0;
  double temperature_k = 0.0;
  double price_chf_per_kwh = 0.0;
  double ev_disruption = 0.0;

  bool operator==(const LumpedErrors&) const = default;
};

LumpedErrors errors_at(const UncertaintyModel& model, const StandardPoint& u);

/// One draw of the uncertain parameters, materialized over the full horizon.
struct ScenarioRealization {
  StandardPoint u{};
  std::uint64_t removal_seed = 0;
  LumpedErrors errors;
  std::vector<std::vector<double>> capacity_factor;  // [generator][t], clamped to [0,1]
  std::vector<std::vector<double>> ambient_c;        // [heat pump][t]
  std::vector<std::vector<std::uint8_t>> presence;   // [ev][t], after disruption
  std::vector<bool> ev_removed;                      // [ev]
  std::vector<std::vector<double>> load_p_kw;        // [load][t], clamped at 0
  std::vector<std::vector<double>> load_q_kvar;      // [load][t]
  std::vector<double> market;                        // CHF/kWh
  std::vector<double> tariff;                        // CHF/kWh (not uncertain)

  bool operator==(const ScenarioRealization&) const = default;
};

/// Number of EV events removed for a disruption fraction (nearest integer,
/// never more than the number of events).
std::size_t removal_count(double disruption, std::size_t events);

/// Applies the errors at u to the reference profiles. The EV events to remove
/// are drawn uniformly without replacement from the stream `removal_seed`.
ScenarioRealization materialize(const model::VppInstance& instance, const UncertaintyModel& model,
                                const StandardPoint& u, std::uint64_t removal_seed);

/// Scenario with every error at zero and no EV disruption.
ScenarioRealization reference_scenario(const model::VppInstance& instance);

/// Deterministic removal seed tied to a point, so a performance function of
/// u alone is well defined.
std::uint64_t removal_seed_for(const StandardPoint& u, std::uint64_t salt);

enum class SamplingMethod { plain, lhs };

/// n points in d-dimensional standard-normal space. For LHS every coordinate
/// is stratified into n equiprobable strata with one point per stratum.
std::vector<std::vector<double>> sample_standard_normal(std::size_t n, std::size_t dims, SamplingMethod method,
                                                        std::uint64_t seed);

/// n realizations of the uncertainty model (deterministic in the seed).
std::vector<ScenarioRealization> sample(const model::VppInstance& instance, const UncertaintyModel& model,
                                        std::size_t n, SamplingMethod method, std::uint64_t seed);

/// Sum of standard-normal log densities of the coordinates.
double log_density_standard(std::span<const double> u);

}  // namespace vppflex::scenario
