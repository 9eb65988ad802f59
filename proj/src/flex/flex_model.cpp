#include "vppflex/flex/flex_model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>

namespace vppflex::flex {

using milp::kInf;
using milp::Sense;
using model::VppState;

namespace {

std::string tag(std::string_view base, std::string_view id, std::size_t t, VppState s) {
  std::string out;
  out.reserve(base.size() + id.size() + 16);
  out.append(base).append("[");
  if (!id.empty()) out.append(id).append(",");
  out.append(std::to_string(t)).append(",").append(model::to_string(s)).append("]");
  return out;
}

template <class T>
using Block = std::vector<std::vector<T>>;  // [s][k]

template <class T>
Block<T> block(std::size_t states, std::size_t steps) {
  return Block<T>(states, std::vector<T>(steps));
}

/// -r RR_down <= P_disp - P_s <= r RR_up for every activated state; `net`
/// lists the (variable, sign) terms that make up P in each state.
void add_ramp_rows(FlexModelHandles& h, std::string_view id, double ramp_min, double rr_down, double rr_up,
                   const std::function<std::vector<milp::Term>(std::size_t s, std::size_t k)>& net) {
  for (std::size_t s = 1; s < h.states.size(); ++s) {
    for (std::size_t k = 0; k < h.steps.size(); ++k) {
      std::vector<milp::Term> terms = net(0, k);
      for (auto t : net(s, k)) terms.push_back({t.var, -t.coef});
      const auto t = h.steps[k];
      h.problem.add_constraint(tag("ramp_up", id, t, h.states[s]), terms, Sense::le, ramp_min * rr_up);
      h.problem.add_constraint(tag("ramp_dn", id, t, h.states[s]), std::move(terms), Sense::ge, -ramp_min * rr_down);
    }
  }
}

Block<StorageVars> build_storage(FlexModelHandles& h, std::string_view kind, std::string_view id, std::size_t bus,
                                 const model::StorageParams& st, const std::vector<std::uint8_t>& presence,
                                 double final_soc_min, bool cyclic, const model::ProductSpec& spec) {
  const auto S = h.states.size(), K = h.steps.size();
  auto& pb = h.problem;
  auto vars = block<StorageVars>(S, K);
  const double dt = h.step_h;
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t k = 0; k < K; ++k) {
      const auto t = h.steps[k];
      const auto st_name = h.states[s];
      const double on = presence[k] ? 1.0 : 0.0;
      StorageVars sv{};
      sv.ch = pb.add_variable(tag(std::string(kind) + "_ch", id, t, st_name), 0.0, st.p_max_ch_kw * on);
      sv.dis = pb.add_variable(tag(std::string(kind) + "_dis", id, t, st_name), 0.0, st.p_max_dis_kw * on);
      sv.q = pb.add_variable(tag(std::string(kind) + "_q", id, t, st_name), st.q_min_kvar * on, st.q_max_kvar * on);
      double soc_lb = st.soc_min, soc_ub = st.soc_max;
      if (k + 1 == K) {
        if (cyclic) {
          soc_lb = soc_ub = st.soc_ini;
        } else {
          soc_lb = std::max(soc_lb, final_soc_min);
        }
      }
      sv.soc = pb.add_variable(tag(std::string(kind) + "_soc", id, t, st_name), soc_lb, soc_ub);
      sv.mode = kNone;
      if (presence[k] && st.p_max_ch_kw > 0.0 && st.p_max_dis_kw > 0.0) {
        // charging and discharging are mutually exclusive
        sv.mode = pb.add_binary(tag(std::string(kind) + "_mode", id, t, st_name));
        pb.add_constraint(tag(std::string(kind) + "_chmax", id, t, st_name), {{sv.ch, 1.0}, {sv.mode, -st.p_max_ch_kw}},
                          Sense::le, 0.0);
        pb.add_constraint(tag(std::string(kind) + "_dismax", id, t, st_name), {{sv.dis, 1.0}, {sv.mode, st.p_max_dis_kw}},
                          Sense::le, st.p_max_dis_kw);
      }
      // state of charge recursion
      std::vector<milp::Term> terms{{sv.soc, 1.0},
                                    {sv.ch, -dt * st.eta_ch / st.capacity_kwh},
                                    {sv.dis, dt / (st.eta_dis * st.capacity_kwh)}};
      double rhs = 0.0;
      if (k == 0)
        rhs = st.soc_ini;
      else
        terms.push_back({vars[s][k - 1].soc, -1.0});
      pb.add_constraint(tag(std::string(kind) + "_soc", id, t, st_name), std::move(terms), Sense::eq, rhs);

      pb.add_term(h.balance_p[s][k][bus], sv.ch, 1.0);
      pb.add_term(h.balance_p[s][k][bus], sv.dis, -1.0);
      pb.add_term(h.balance_q[s][k][bus], sv.q, -1.0);
      vars[s][k] = sv;
    }
  }
  add_ramp_rows(h, std::string(kind) + "_" + std::string(id), spec.ramp_time_min, st.ramp_down_kw_per_min,
                st.ramp_up_kw_per_min, [&vars](std::size_t s, std::size_t k) {
                  return std::vector<milp::Term>{{vars[s][k].dis, 1.0}, {vars[s][k].ch, -1.0}};
                });
  return vars;
}

}  // namespace

std::size_t FlexModelHandles::state_index(VppState s) const {
  for (std::size_t i = 0; i < states.size(); ++i)
    if (states[i] == s) return i;
  return kNone;
}

FlexModelHandles make_handles(const model::VppInstance& instance, const model::ProductSpec& spec) {
  FlexModelHandles h;
  h.states = model::states_for(spec.direction);
  h.steps = spec.delivery_steps();
  h.step_h = instance.step_h;
  h.s_base_kva = instance.network.s_base_kva;
  for (auto t : h.steps)
    if (t >= instance.horizon_steps) throw std::invalid_argument("delivery window exceeds the instance horizon");
  return h;
}

void build_network_constraints(FlexModelHandles& h, const model::RadialNetwork& net) {
  const auto S = h.states.size(), K = h.steps.size();
  const auto nb = net.buses.size(), nl = net.branches.size();
  const auto slack = net.slack_index();
  const double sb = net.s_base_kva;
  auto& pb = h.problem;

  std::vector<std::size_t> from(nl), to(nl);
  for (std::size_t b = 0; b < nl; ++b) {
    from[b] = *net.bus_index(net.branches[b].from);
    to[b] = *net.bus_index(net.branches[b].to);
  }

  // polygon half-planes; axis-aligned ones become variable bounds
  struct HalfPlane {
    double c, s;
  };
  std::vector<HalfPlane> planes;
  for (int l = 0; l < net.n_seg; ++l) {
    const double a = 2.0 * std::numbers::pi * l / net.n_seg;
    double c = std::cos(a), s = std::sin(a);
    if (std::abs(c) < 1e-12) c = 0.0;
    if (std::abs(s) < 1e-12) s = 0.0;
    planes.push_back({c, s});
  }

  h.v = h.p_branch = h.q_branch = h.balance_p = h.balance_q = block<std::vector<std::size_t>>(S, K);
  h.p_grid = h.q_grid = block<std::size_t>(S, K);
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t k = 0; k < K; ++k) {
      const auto t = h.steps[k];
      const auto st = h.states[s];
      auto& v = h.v[s][k];
      for (std::size_t j = 0; j < nb; ++j) {
        const auto& bus = net.buses[j];
        const double lo = j == slack ? 1.0 : bus.v_min * bus.v_min;
        const double hi = j == slack ? 1.0 : bus.v_max * bus.v_max;
        v.push_back(pb.add_variable(tag("v", bus.id, t, st), lo, hi));
      }
      auto& p = h.p_branch[s][k];
      auto& q = h.q_branch[s][k];
      for (std::size_t b = 0; b < nl; ++b) {
        const auto& br = net.branches[b];
        double plo = -kInf, phi = kInf, qlo = -kInf, qhi = kInf;
        for (const auto& hp : planes) {
          if (hp.s == 0.0) {
            if (hp.c > 0.0) phi = std::min(phi, br.s_max / hp.c);
            if (hp.c < 0.0) plo = std::max(plo, br.s_max / hp.c);
          } else if (hp.c == 0.0) {
            if (hp.s > 0.0) qhi = std::min(qhi, br.s_max / hp.s);
            if (hp.s < 0.0) qlo = std::max(qlo, br.s_max / hp.s);
          }
        }
        p.push_back(pb.add_variable(tag("p", br.id, t, st), plo, phi));
        q.push_back(pb.add_variable(tag("q", br.id, t, st), qlo, qhi));
      }
      h.p_grid[s][k] = pb.add_variable(tag("p_grid", "", t, st), -kInf, kInf);
      h.q_grid[s][k] = pb.add_variable(tag("q_grid", "", t, st), -kInf, kInf);

      // nodal balances in kW: S_base (outflow - inflow) - DER injections = -load
      auto& rows_p = h.balance_p[s][k];
      auto& rows_q = h.balance_q[s][k];
      for (std::size_t j = 0; j < nb; ++j) {
        rows_p.push_back(pb.add_constraint(tag("bal_p", net.buses[j].id, t, st), {}, Sense::eq, 0.0));
        rows_q.push_back(pb.add_constraint(tag("bal_q", net.buses[j].id, t, st), {}, Sense::eq, 0.0));
      }
      for (std::size_t b = 0; b < nl; ++b) {
        pb.add_term(rows_p[from[b]], p[b], sb);
        pb.add_term(rows_p[to[b]], p[b], -sb);
        pb.add_term(rows_q[from[b]], q[b], sb);
        pb.add_term(rows_q[to[b]], q[b], -sb);
      }
      pb.add_term(rows_p[slack], h.p_grid[s][k], -sb);
      pb.add_term(rows_q[slack], h.q_grid[s][k], -sb);

      for (std::size_t b = 0; b < nl; ++b) {
        const auto& br = net.branches[b];
        pb.add_constraint(tag("vdrop", br.id, t, st),
                          {{v[from[b]], 1.0}, {v[to[b]], -1.0}, {p[b], -2.0 * br.r}, {q[b], -2.0 * br.x}}, Sense::eq, 0.0);
        for (std::size_t l = 0; l < planes.size(); ++l) {
          const auto& hp = planes[l];
          if (hp.c == 0.0 || hp.s == 0.0) continue;
          pb.add_constraint(tag("smax" + std::to_string(l), br.id, t, st), {{p[b], hp.c}, {q[b], hp.s}}, Sense::le,
                            br.s_max);
        }
      }
    }
  }
}

void build_der_constraints(FlexModelHandles& h, const model::VppInstance& inst,
                           const scenario::ScenarioRealization& sc, const model::ProductSpec& spec) {
  const auto S = h.states.size(), K = h.steps.size();
  const auto& net = inst.network;
  auto& pb = h.problem;
  const double dt = h.step_h;
  auto bus_of = [&net](const std::string& id) { return *net.bus_index(id); };

  h.generators.clear();
  for (std::size_t i = 0; i < inst.generators.size(); ++i) {
    const auto& g = inst.generators[i];
    const auto j = bus_of(g.bus);
    auto vars = block<GeneratorVars>(S, K);
    for (std::size_t s = 0; s < S; ++s)
      for (std::size_t k = 0; k < K; ++k) {
        const auto t = h.steps[k];
        const double cap = g.p_nom_kw * sc.capacity_factor[i][t];
        vars[s][k].p = pb.add_variable(tag("dg_p", g.id, t, h.states[s]), 0.0, cap);
        vars[s][k].q = pb.add_variable(tag("dg_q", g.id, t, h.states[s]), -g.q_nom_kvar, g.q_nom_kvar);
        pb.add_term(h.balance_p[s][k][j], vars[s][k].p, -1.0);
        pb.add_term(h.balance_q[s][k][j], vars[s][k].q, -1.0);
      }
    add_ramp_rows(h, "dg_" + g.id, spec.ramp_time_min, g.ramp_down_kw_per_min, g.ramp_up_kw_per_min,
                  [&vars](std::size_t s, std::size_t k) { return std::vector<milp::Term>{{vars[s][k].p, 1.0}}; });
    h.generators.push_back(std::move(vars));
  }

  h.heat_pumps.clear();
  for (std::size_t i = 0; i < inst.heat_pumps.size(); ++i) {
    const auto& hp = inst.heat_pumps[i];
    const auto j = bus_of(hp.bus);
    const double leak = dt / (hp.r_th_k_per_kw * hp.c_th_kwh_per_k);  // share of the indoor-ambient gap lost per step
    const double gain = dt * hp.cop / hp.c_th_kwh_per_k;              // K per kW per step
    auto vars = block<HeatPumpVars>(S, K);
    for (std::size_t s = 0; s < S; ++s)
      for (std::size_t k = 0; k < K; ++k) {
        const auto t = h.steps[k];
        const auto st = h.states[s];
        auto& hv = vars[s][k];
        hv.p = pb.add_variable(tag("hp_p", hp.id, t, st), 0.0, hp.p_max_kw);
        hv.on = kNone;
        if (hp.p_min_kw > 0.0) {
          // with a zero minimum the on/off binary adds nothing
          hv.on = pb.add_binary(tag("hp_on", hp.id, t, st));
          pb.add_constraint(tag("hp_pmin", hp.id, t, st), {{hv.p, 1.0}, {hv.on, -hp.p_min_kw}}, Sense::ge, 0.0);
          pb.add_constraint(tag("hp_pmax", hp.id, t, st), {{hv.p, 1.0}, {hv.on, -hp.p_max_kw}}, Sense::le, 0.0);
        }
        hv.q = pb.add_variable(tag("hp_q", hp.id, t, st), hp.q_min_kvar, hp.q_max_kvar);
        const bool last = k + 1 == K;
        hv.temp = pb.add_variable(tag("hp_temp", hp.id, t, st), last ? hp.t_target_c : hp.t_min_c,
                                  last ? hp.t_target_c : hp.t_max_c);
        std::vector<milp::Term> terms{{hv.temp, 1.0}, {hv.p, -gain}};
        double rhs = leak * sc.ambient_c[i][t];
        if (k == 0)
          rhs += (1.0 - leak) * hp.t_target_c;
        else
          terms.push_back({vars[s][k - 1].temp, -(1.0 - leak)});
        pb.add_constraint(tag("hp_thermal", hp.id, t, st), std::move(terms), Sense::eq, rhs);
        pb.add_term(h.balance_p[s][k][j], hv.p, 1.0);
        pb.add_term(h.balance_q[s][k][j], hv.q, 1.0);
      }
    add_ramp_rows(h, "hp_" + hp.id, spec.ramp_time_min, hp.ramp_down_kw_per_min, hp.ramp_up_kw_per_min,
                  [&vars](std::size_t s, std::size_t k) { return std::vector<milp::Term>{{vars[s][k].p, 1.0}}; });
    h.heat_pumps.push_back(std::move(vars));
  }

  h.ev_events.clear();
  for (std::size_t i = 0; i < inst.ev_events.size(); ++i) {
    const auto& ev = inst.ev_events[i];
    std::vector<std::uint8_t> present(K);
    std::size_t connected = 0;
    for (std::size_t k = 0; k < K; ++k) {
      present[k] = sc.presence[i][h.steps[k]];
      connected += present[k];
    }
    if (connected == 0) {
      h.ev_events.emplace_back();
      continue;
    }
    const double final_min =
        ev.storage.soc_ini + ev.r_ch_min_kw * dt * static_cast<double>(connected) / ev.storage.capacity_kwh;
    h.ev_events.push_back(
        build_storage(h, "ev", ev.id, bus_of(ev.bus), ev.storage, present, final_min, false, spec));
  }

  h.batteries.clear();
  const std::vector<std::uint8_t> always(K, 1);
  for (const auto& b : inst.batteries)
    h.batteries.push_back(build_storage(h, "bess", b.id, bus_of(b.bus), b.storage, always, 0.0, true, spec));

  for (std::size_t i = 0; i < inst.loads.size(); ++i) {
    const auto j = bus_of(inst.loads[i].bus);
    for (std::size_t s = 0; s < S; ++s)
      for (std::size_t k = 0; k < K; ++k) {
        const auto t = h.steps[k];
        pb.constraint(h.balance_p[s][k][j]).rhs -= sc.load_p_kw[i][t];
        pb.constraint(h.balance_q[s][k][j]).rhs -= sc.load_q_kvar[i][t];
      }
  }
}

void build_product_constraints(FlexModelHandles& h, const model::ProductSpec& spec) {
  (void)spec;
  auto& pb = h.problem;
  const auto K = h.steps.size();
  const double c = h.pcc_coefficient();
  const auto disp = h.state_index(VppState::disp);
  const auto up = h.state_index(VppState::up);
  const auto down = h.state_index(VppState::down);
  h.q = pb.add_variable("q", -kInf, kInf);
  h.q_t.clear();
  h.availability_rows.clear();
  h.up_rows.clear();
  h.down_rows.clear();
  for (std::size_t k = 0; k < K; ++k) {
    const auto t = std::to_string(h.steps[k]);
    const auto qt = pb.add_variable("q_t[" + t + "]", -kInf, kInf);
    h.q_t.push_back(qt);
    h.availability_rows.push_back(pb.add_constraint("avail[" + t + "]", {{h.q, 1.0}, {qt, -1.0}}, Sense::le, 0.0));
    if (up != kNone)
      h.up_rows.push_back(pb.add_constraint(
          "link_up[" + t + "]", {{qt, 1.0}, {h.p_grid[up][k], -c}, {h.p_grid[disp][k], c}}, Sense::eq, 0.0));
    if (down != kNone)
      h.down_rows.push_back(pb.add_constraint(
          "link_down[" + t + "]", {{qt, 1.0}, {h.p_grid[disp][k], -c}, {h.p_grid[down][k], c}}, Sense::eq, 0.0));
  }
}

FlexModelHandles build_flex_model(const model::VppInstance& instance, const model::ProductSpec& spec,
                                  const scenario::ScenarioRealization& scenario) {
  auto h = make_handles(instance, spec);
  build_network_constraints(h, instance.network);
  build_der_constraints(h, instance, scenario, spec);
  build_product_constraints(h, spec);
  h.problem.set_objective_sense(milp::ObjectiveSense::maximize);
  h.problem.set_objective(h.q, 1.0);
  return h;
}

FlexOutcome solve_flex(const FlexModelHandles& h, const FlexOptions& opts) {
  const auto& backend = opts.backend ? *opts.backend : milp::default_backend();
  FlexOutcome out;
  out.solution = backend.solve(h.problem, opts.solve);
  switch (out.solution.status) {
    case milp::SolveStatus::optimal:
      out.q = out.solution.values[h.q];
      break;
    case milp::SolveStatus::infeasible:
      out.q = kInfeasibleG;
      break;
    default:
      throw SolverFailure("flexibility model: solver returned " + std::string(milp::to_string(out.solution.status)) +
                          " after " + std::to_string(out.solution.nodes) + " nodes");
  }
  return out;
}

double evaluate_g(const model::VppInstance& instance, const model::ProductSpec& spec,
                  const scenario::ScenarioRealization& scenario, const FlexOptions& opts) {
  return solve_flex(build_flex_model(instance, spec, scenario), opts).q;
}

}  // namespace vppflex::flex
