#pragma once

// Small hand-built instances for unit and acceptance tests.

#include <cstddef>
#include <string>
#include <vector>

#include "vppflex/model/types.hpp"

namespace vppflex::testing {

/// Slack bus b0 feeding a chain b1..b{buses-1}; ample lines unless stated.
inline model::VppInstance chain_instance(std::size_t buses = 2, std::size_t horizon = 24, double s_max_pu = 10.0) {
  model::VppInstance inst;
  inst.name = "chain";
  inst.step_h = 1.0;
  inst.horizon_steps = horizon;
  inst.network.s_base_kva = 100.0;
  inst.network.n_seg = 8;
  for (std::size_t j = 0; j < buses; ++j)
    inst.network.buses.push_back({"b" + std::to_string(j), 0.9, 1.1, j == 0});
  for (std::size_t j = 1; j < buses; ++j)
    inst.network.branches.push_back(
        {"l" + std::to_string(j - 1) + std::to_string(j), "b" + std::to_string(j - 1), "b" + std::to_string(j), 0.01, 0.01, s_max_pu});
  inst.prices.market.assign(horizon, 0.08);
  inst.prices.tariff.assign(horizon, 0.2065);
  return inst;
}

inline model::Generator& add_generator(model::VppInstance& inst, std::string id, std::string bus, double p_nom, double cf,
                                       double ramp = 100.0) {
  model::Generator g;
  g.id = std::move(id);
  g.bus = std::move(bus);
  g.p_nom_kw = p_nom;
  g.q_nom_kvar = 0.3 * p_nom;
  g.ramp_down_kw_per_min = g.ramp_up_kw_per_min = ramp;
  g.capacity_factor.assign(inst.horizon_steps, cf);
  inst.generators.push_back(std::move(g));
  return inst.generators.back();
}

inline model::StorageParams storage_params(double capacity, double power, double eta = 1.0, double soc_ini = 0.5) {
  model::StorageParams st;
  st.soc_ini = soc_ini;
  st.soc_min = 0.0;
  st.soc_max = 1.0;
  st.capacity_kwh = capacity;
  st.p_max_ch_kw = st.p_max_dis_kw = power;
  st.eta_ch = st.eta_dis = eta;
  st.q_min_kvar = -0.5 * power;
  st.q_max_kvar = 0.5 * power;
  st.ramp_down_kw_per_min = st.ramp_up_kw_per_min = 100.0;
  return st;
}

inline model::Battery& add_battery(model::VppInstance& inst, std::string id, std::string bus, double capacity, double power,
                                   double eta = 1.0) {
  inst.batteries.push_back({std::move(id), std::move(bus), storage_params(capacity, power, eta)});
  return inst.batteries.back();
}

inline model::EvChargingEvent& add_ev(model::VppInstance& inst, std::string id, std::string bus, std::size_t arrival,
                                      std::size_t departure, double capacity = 70.0, double power = 7.0) {
  model::EvChargingEvent ev;
  ev.id = std::move(id);
  ev.bus = std::move(bus);
  ev.arrival_step = arrival;
  ev.departure_step = departure;
  ev.storage = storage_params(capacity, power, 0.9, 0.4);
  inst.ev_events.push_back(std::move(ev));
  return inst.ev_events.back();
}

inline model::HeatPump& add_heat_pump(model::VppInstance& inst, std::string id, std::string bus) {
  model::HeatPump hp;
  hp.id = std::move(id);
  hp.bus = std::move(bus);
  hp.p_min_kw = 1.0;
  hp.p_max_kw = 5.0;
  hp.q_min_kvar = -1.0;
  hp.q_max_kvar = 1.0;
  hp.cop = 3.0;
  hp.c_th_kwh_per_k = 10.0;
  hp.r_th_k_per_kw = 5.0;
  hp.t_min_c = 19.0;
  hp.t_max_c = 23.0;
  hp.t_target_c = 21.0;
  hp.ramp_down_kw_per_min = hp.ramp_up_kw_per_min = 1.0;
  hp.ambient_c.assign(inst.horizon_steps, 10.0);
  inst.heat_pumps.push_back(std::move(hp));
  return inst.heat_pumps.back();
}

inline model::FixedLoad& add_load(model::VppInstance& inst, std::string id, std::string bus, double p_kw, double pf = 0.95) {
  inst.loads.push_back({std::move(id), std::move(bus), pf, std::vector<double>(inst.horizon_steps, p_kw)});
  return inst.loads.back();
}

/// One metering area per bus holding every resource connected there.
inline void area_per_bus(model::VppInstance& inst) {
  inst.metering_areas.clear();
  for (const auto& b : inst.network.buses) {
    model::MeteringArea a{"m_" + b.id, b.id, {}};
    for (const auto& g : inst.generators)
      if (g.bus == b.id) a.members.push_back(g.id);
    for (const auto& h : inst.heat_pumps)
      if (h.bus == b.id) a.members.push_back(h.id);
    for (const auto& e : inst.ev_events)
      if (e.bus == b.id) a.members.push_back(e.id);
    for (const auto& s : inst.batteries)
      if (s.bus == b.id) a.members.push_back(s.id);
    for (const auto& l : inst.loads)
      if (l.bus == b.id) a.members.push_back(l.id);
    if (!a.members.empty()) inst.metering_areas.push_back(std::move(a));
  }
}

inline model::ProductSpec product(model::Direction d, double start_h = 8.0, double duration_h = 4.0, double ramp_min = 5.0,
                                  double reliability = 0.999) {
  model::ProductSpec p;
  p.direction = d;
  p.delivery_start_h = start_h;
  p.duration_h = duration_h;
  p.ramp_time_min = ramp_min;
  p.reliability = reliability;
  return p;
}

}  // namespace vppflex::testing
