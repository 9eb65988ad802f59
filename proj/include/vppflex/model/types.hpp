#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vppflex::model {

enum class Direction { upward, downward, symmetrical };

/// Simulated operating states of the VPP: the market dispatch and the fully
/// activated upward/downward reserve.
enum class VppState { disp, up, down };

std::string_view to_string(Direction d);
std::string_view to_string(VppState s);
std::optional<Direction> parse_direction(std::string_view text);

/// States simulated for a product direction. `disp` is always first.
std::vector<VppState> states_for(Direction d);

/// Reserve capacity product requirements.
struct ProductSpec {
  Direction direction = Direction::symmetrical;
  double delivery_start_h = 8.0;
  double duration_h = 4.0;
  double ramp_time_min = 5.0;
  double reliability = 0.999;
  double lead_time_h = 24.0;  // informational
  double step_h = 1.0;

  /// Quantile probability of the reliability requirement.
  double alpha() const { return 1.0 - reliability; }
  /// Horizon index of the first delivery step.
  std::size_t first_step() const;
  /// Number of delivery steps (duration / step).
  std::size_t step_count() const;
  /// Horizon indices of the delivery steps.
  std::vector<std::size_t> delivery_steps() const;
  /// Violated invariants, empty if the spec is usable.
  std::vector<std::string> check() const;
};

struct Bus {
  std::string id;
  double v_min = 0.95;  // pu
  double v_max = 1.05;  // pu
  bool slack = false;

  bool operator==(const Bus&) const = default;
};

struct Branch {
  std::string id;
  std::string from;
  std::string to;
  double r = 0.0;      // pu
  double x = 0.0;      // pu
  double s_max = 1.0;  // pu

  bool operator==(const Branch&) const = default;
};

struct RadialNetwork {
  std::vector<Bus> buses;
  std::vector<Branch> branches;
  double s_base_kva = 100.0;
  int n_seg = 8;

  std::optional<std::size_t> bus_index(std::string_view id) const;
  /// Index of the slack bus; throws if there is not exactly one.
  std::size_t slack_index() const;

  bool operator==(const RadialNetwork&) const = default;
};

struct Generator {
  std::string id;
  std::string bus;
  double p_nom_kw = 0.0;
  double q_nom_kvar = 0.0;
  double ramp_down_kw_per_min = 0.0;
  double ramp_up_kw_per_min = 0.0;
  double cost_p = 0.0;  // CHF/kWh
  double cost_q = 0.0;  // CHF/kVArh
  std::vector<double> capacity_factor;  // reference, per horizon step

  bool operator==(const Generator&) const = default;
};

struct HeatPump {
  std::string id;
  std::string bus;
  double p_min_kw = 0.0;
  double p_max_kw = 0.0;
  double q_min_kvar = 0.0;
  double q_max_kvar = 0.0;
  double cop = 3.0;
  double c_th_kwh_per_k = 10.0;
  double r_th_k_per_kw = 5.0;
  double t_min_c = 19.0;
  double t_max_c = 23.0;
  double t_target_c = 21.0;
  double ramp_down_kw_per_min = 0.0;
  double ramp_up_kw_per_min = 0.0;
  double cost_q = 0.0;  // CHF/kVArh
  double cost_t = 0.0;  // CHF/K per step
  std::vector<double> ambient_c;  // reference, per horizon step

  bool operator==(const HeatPump&) const = default;
};

/// Storage parameters shared by EV charging events and stationary batteries.
struct StorageParams {
  double soc_ini = 0.5;
  double soc_min = 0.0;
  double soc_max = 1.0;
  double capacity_kwh = 1.0;
  double p_max_ch_kw = 0.0;
  double p_max_dis_kw = 0.0;
  double eta_ch = 1.0;
  double eta_dis = 1.0;
  double q_min_kvar = 0.0;
  double q_max_kvar = 0.0;
  double ramp_down_kw_per_min = 0.0;
  double ramp_up_kw_per_min = 0.0;
  double cost_p = 0.0;  // CHF/kWh throughput
  double cost_q = 0.0;  // CHF/kVArh

  bool operator==(const StorageParams&) const = default;
};

struct EvChargingEvent {
  std::string id;
  std::string bus;
  std::size_t arrival_step = 0;
  std::size_t departure_step = 0;  // exclusive
  double r_ch_min_kw = 0.0;
  StorageParams storage;

  /// 1 iff the vehicle is connected during horizon step t.
  bool present(std::size_t t) const { return t >= arrival_step && t < departure_step; }

  bool operator==(const EvChargingEvent&) const = default;
};

/// Stationary battery: always connected, state of charge returns to its
/// initial value at the end of the delivery window.
struct Battery {
  std::string id;
  std::string bus;
  StorageParams storage;

  bool operator==(const Battery&) const = default;
};

struct FixedLoad {
  std::string id;
  std::string bus;
  double power_factor = 0.95;
  std::vector<double> p_kw;  // reference, per horizon step

  /// Q/P ratio implied by the (lagging) power factor.
  double q_over_p() const;

  bool operator==(const FixedLoad&) const = default;
};

struct MeteringArea {
  std::string id;
  std::string bus;  // informational
  std::vector<std::string> members;

  bool operator==(const MeteringArea&) const = default;
};

struct PriceSet {
  std::vector<double> market;  // CHF/kWh, reference day-ahead
  std::vector<double> tariff;  // CHF/kWh, withdrawals only

  bool operator==(const PriceSet&) const = default;
};

struct VppInstance {
  std::string name;
  double step_h = 1.0;
  std::size_t horizon_steps = 24;
  RadialNetwork network;
  std::vector<Generator> generators;
  std::vector<HeatPump> heat_pumps;
  std::vector<EvChargingEvent> ev_events;
  std::vector<Battery> batteries;
  std::vector<FixedLoad> loads;
  std::vector<MeteringArea> metering_areas;
  PriceSet prices;

  bool operator==(const VppInstance&) const = default;
};

}  // namespace vppflex::model
