#include "vppflex/cost/cost_model.hpp"

#include <string>
#include <unordered_map>

namespace vppflex::cost {

using milp::kInf;
using milp::Sense;

namespace {

std::string name(std::string_view base, std::string_view id, std::size_t t) {
  return std::string(base) + "[" + std::string(id) + "," + std::to_string(t) + "]";
}

/// value_var - pos + neg = offset, both parts priced at `price`.
Split add_split(milp::MilpProblem& pb, std::string_view base, std::string_view id, std::size_t t, std::size_t value_var,
                double offset, double price) {
  Split s;
  s.pos = pb.add_variable(name(std::string(base) + "_pos", id, t), 0.0, kInf);
  s.neg = pb.add_variable(name(std::string(base) + "_neg", id, t), 0.0, kInf);
  pb.add_constraint(name(std::string(base) + "_split", id, t), {{value_var, 1.0}, {s.pos, -1.0}, {s.neg, 1.0}},
                    Sense::eq, offset);
  pb.add_objective(s.pos, price);
  pb.add_objective(s.neg, price);
  return s;
}

}  // namespace

void build_cost_objective(CostModelHandles& h, const model::VppInstance& inst, const scenario::ScenarioRealization& sc) {
  auto& f = h.flex;
  auto& pb = f.problem;
  const auto K = f.steps.size();
  const double dt = f.step_h;
  const std::size_t d = f.state_index(model::VppState::disp);

  pb.set_objective_sense(milp::ObjectiveSense::minimize);
  pb.set_objective(f.q, 0.0);

  // net injection terms of each resource in the dispatch state, kW
  std::unordered_map<std::string, std::vector<std::vector<milp::Term>>> injection;
  std::unordered_map<std::string, std::vector<double>> fixed_withdrawal;

  h.generator_q.assign(inst.generators.size(), {});
  for (std::size_t i = 0; i < inst.generators.size(); ++i) {
    const auto& g = inst.generators[i];
    auto& terms = injection[g.id];
    terms.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
      const auto& v = f.generators[i][d][k];
      pb.add_objective(v.p, dt * g.cost_p);
      h.generator_q[i].push_back(add_split(pb, "dg_qs", g.id, f.steps[k], v.q, 0.0, dt * g.cost_q));
      terms[k].push_back({v.p, 1.0});
    }
  }

  h.heat_pump_q.assign(inst.heat_pumps.size(), {});
  h.heat_pump_dt.assign(inst.heat_pumps.size(), {});
  for (std::size_t i = 0; i < inst.heat_pumps.size(); ++i) {
    const auto& hp = inst.heat_pumps[i];
    auto& terms = injection[hp.id];
    terms.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
      const auto& v = f.heat_pumps[i][d][k];
      h.heat_pump_q[i].push_back(add_split(pb, "hp_qs", hp.id, f.steps[k], v.q, 0.0, dt * hp.cost_q));
      h.heat_pump_dt[i].push_back(add_split(pb, "hp_dt", hp.id, f.steps[k], v.temp, hp.t_target_c, hp.cost_t));
      terms[k].push_back({v.p, -1.0});
    }
  }

  auto storage = [&](std::string_view kind, const std::string& id, const model::StorageParams& st,
                     const std::vector<std::vector<flex::StorageVars>>& block, std::vector<Split>& q_split) {
    auto& terms = injection[id];
    terms.resize(K);
    if (block.empty()) return;  // not connected during delivery
    for (std::size_t k = 0; k < K; ++k) {
      const auto& v = block[d][k];
      pb.add_objective(v.ch, dt * st.cost_p);
      pb.add_objective(v.dis, dt * st.cost_p);
      q_split.push_back(add_split(pb, std::string(kind) + "_qs", id, f.steps[k], v.q, 0.0, dt * st.cost_q));
      terms[k].push_back({v.dis, 1.0});
      terms[k].push_back({v.ch, -1.0});
    }
  };
  h.ev_q.assign(inst.ev_events.size(), {});
  for (std::size_t i = 0; i < inst.ev_events.size(); ++i)
    storage("ev", inst.ev_events[i].id, inst.ev_events[i].storage, f.ev_events[i], h.ev_q[i]);
  h.battery_q.assign(inst.batteries.size(), {});
  for (std::size_t i = 0; i < inst.batteries.size(); ++i)
    storage("bess", inst.batteries[i].id, inst.batteries[i].storage, f.batteries[i], h.battery_q[i]);

  for (std::size_t i = 0; i < inst.loads.size(); ++i) {
    auto& w = fixed_withdrawal[inst.loads[i].id];
    for (std::size_t k = 0; k < K; ++k) w.push_back(sc.load_p_kw[i][f.steps[k]]);
  }

  // metering areas: inj - wit = net injection of the members; energy is
  // bought and sold at the market price, tariffs apply to withdrawals only
  h.area_injection.assign(inst.metering_areas.size(), {});
  h.area_withdrawal.assign(inst.metering_areas.size(), {});
  for (std::size_t m = 0; m < inst.metering_areas.size(); ++m) {
    const auto& area = inst.metering_areas[m];
    for (std::size_t k = 0; k < K; ++k) {
      const auto t = f.steps[k];
      const auto inj = pb.add_variable(name("inj", area.id, t), 0.0, kInf);
      const auto wit = pb.add_variable(name("wit", area.id, t), 0.0, kInf);
      std::vector<milp::Term> row{{inj, 1.0}, {wit, -1.0}};
      double rhs = 0.0;
      for (const auto& member : area.members) {
        if (auto it = injection.find(member); it != injection.end())
          for (const auto& term : it->second[k]) row.push_back({term.var, -term.coef});
        if (auto it = fixed_withdrawal.find(member); it != fixed_withdrawal.end()) rhs -= it->second[k];
      }
      pb.add_constraint(name("area", area.id, t), std::move(row), Sense::eq, rhs);
      pb.add_objective(inj, -dt * sc.market[t]);
      pb.add_objective(wit, dt * (sc.market[t] + sc.tariff[t]));
      h.area_injection[m].push_back(inj);
      h.area_withdrawal[m].push_back(wit);
    }
  }
}

CostModelHandles build_cost_model(const model::VppInstance& instance, const model::ProductSpec& spec,
                                  const scenario::ScenarioRealization& scenario, double q_eps) {
  CostModelHandles h;
  h.flex = flex::build_flex_model(instance, spec, scenario);
  h.min_quantity_row = h.flex.problem.add_constraint("q_min", {{h.flex.q, 1.0}}, Sense::ge, q_eps);
  build_cost_objective(h, instance, scenario);
  return h;
}

ProductCost product_cost(const model::VppInstance& instance, const model::ProductSpec& spec,
                         const scenario::ScenarioRealization& scenario, double q_eps, const flex::FlexOptions& opts) {
  const auto& backend = opts.backend ? *opts.backend : milp::default_backend();
  const auto h = build_cost_model(instance, spec, scenario, q_eps);
  const auto sol = backend.solve(h.flex.problem, opts.solve);
  ProductCost out;
  if (sol.status == milp::SolveStatus::infeasible) return out;
  if (!sol.optimal())
    throw flex::SolverFailure("cost model: solver returned " + std::string(milp::to_string(sol.status)));

  auto fixed = milp::fix_integers(h.flex.problem, sol.values);
  fixed.constraint(h.min_quantity_row).rhs = q_eps - kLeftShift;
  const auto lp = backend.solve_lp_with_duals(fixed, opts.solve);
  if (!lp.optimal())
    throw flex::SolverFailure("cost model: LP with fixed binaries returned " + std::string(milp::to_string(lp.status)));

  out.feasible = true;
  out.price = lp.duals[h.min_quantity_row];
  out.total_cost = sol.objective;
  out.schedule = sol.values;
  return out;
}

}  // namespace vppflex::cost
