#include "vppflex/model/validate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace vppflex::model {

bool ValidationReport::ok() const {
  return std::none_of(issues.begin(), issues.end(), [](const auto& i) { return i.severity == Severity::error; });
}

bool ValidationReport::has(std::string_view code) const {
  return std::any_of(issues.begin(), issues.end(), [&](const auto& i) { return i.code == code; });
}

void ValidationReport::add(Severity severity, std::string code, std::string message) {
  issues.push_back({severity, std::move(code), std::move(message)});
}

namespace {

void error(ValidationReport& r, std::string code, std::string message) {
  r.add(Severity::error, std::move(code), std::move(message));
}

void check_network(const RadialNetwork& net, ValidationReport& r) {
  if (!(net.s_base_kva > 0.0)) error(r, "network-sbase", "S_base must be positive");
  if (net.n_seg < 4) error(r, "network-nseg", "flow polygon needs at least 4 segments");

  std::set<std::string> ids;
  std::size_t slack_count = 0;
  for (const auto& b : net.buses) {
    if (!ids.insert(b.id).second) error(r, "duplicate-id", "bus '" + b.id + "' defined twice");
    if (b.slack) ++slack_count;
    if (!(b.v_min > 0.0 && b.v_min <= b.v_max)) error(r, "voltage-limits", "bus '" + b.id + "' needs 0 < v_min <= v_max");
  }
  if (slack_count != 1) error(r, "slack-count", "network needs exactly one slack bus, found " + std::to_string(slack_count));

  std::set<std::string> branch_ids;
  bool endpoints_ok = true;
  for (const auto& br : net.branches) {
    if (!branch_ids.insert(br.id).second) error(r, "duplicate-id", "branch '" + br.id + "' defined twice");
    if (!net.bus_index(br.from) || !net.bus_index(br.to)) {
      error(r, "unknown-bus", "branch '" + br.id + "' references an unknown bus");
      endpoints_ok = false;
    }
    if (br.from == br.to) error(r, "not-radial", "branch '" + br.id + "' is a self loop");
    if (br.r < 0.0 || br.x < 0.0) error(r, "branch-impedance", "branch '" + br.id + "' needs r, x >= 0");
    if (!(br.s_max > 0.0)) error(r, "branch-rating", "branch '" + br.id + "' needs s_max > 0");
  }
  if (!endpoints_ok || slack_count != 1) return;

  // Tree rooted at the slack: every other bus has exactly one incoming
  // branch, the slack none, and everything is reachable from the slack.
  const std::size_t n = net.buses.size();
  std::vector<std::size_t> in_degree(n, 0);
  std::vector<std::vector<std::size_t>> children(n);
  for (const auto& br : net.branches) {
    const auto f = *net.bus_index(br.from);
    const auto t = *net.bus_index(br.to);
    ++in_degree[t];
    children[f].push_back(t);
  }
  const auto slack = net.slack_index();
  bool radial = net.branches.size() + 1 == n && in_degree[slack] == 0;
  for (std::size_t j = 0; j < n && radial; ++j)
    if (j != slack && in_degree[j] != 1) radial = false;
  if (radial) {
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> stack{slack};
    seen[slack] = true;
    while (!stack.empty()) {
      const auto j = stack.back();
      stack.pop_back();
      for (auto k : children[j]) {
        if (seen[k]) {
          radial = false;
          break;
        }
        seen[k] = true;
        stack.push_back(k);
      }
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) radial = false;
  }
  if (!radial) error(r, "not-radial", "network is not radial: branches must form a tree oriented away from the slack bus");
}

void check_profile(const std::vector<double>& p, std::size_t horizon, const std::string& what, ValidationReport& r) {
  if (p.size() != horizon)
    error(r, "profile-length", what + " has " + std::to_string(p.size()) + " values, expected " + std::to_string(horizon));
  for (double v : p)
    if (!std::isfinite(v)) {
      error(r, "profile-value", what + " contains a non-finite value");
      break;
    }
}

void check_storage(const StorageParams& s, const std::string& id, ValidationReport& r) {
  if (!(s.soc_min <= s.soc_ini && s.soc_ini <= s.soc_max))
    error(r, "soc-ordering", "'" + id + "' needs soc_min <= soc_ini <= soc_max");
  if (s.soc_min < 0.0 || s.soc_max > 1.0) error(r, "soc-range", "'" + id + "' SOC limits must lie in [0,1]");
  if (!(s.capacity_kwh > 0.0)) error(r, "storage-capacity", "'" + id + "' needs a positive capacity");
  if (s.p_max_ch_kw < 0.0 || s.p_max_dis_kw < 0.0) error(r, "storage-power", "'" + id + "' power limits must be >= 0");
  if (!(s.eta_ch > 0.0 && s.eta_ch <= 1.0 && s.eta_dis > 0.0 && s.eta_dis <= 1.0))
    error(r, "storage-efficiency", "'" + id + "' efficiencies must lie in (0,1]");
  if (s.q_min_kvar > s.q_max_kvar) error(r, "reactive-limits", "'" + id + "' needs q_min <= q_max");
  if (s.ramp_down_kw_per_min < 0.0 || s.ramp_up_kw_per_min < 0.0) error(r, "ramp-rate", "'" + id + "' ramp rates must be >= 0");
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

ValidationReport validate_instance(const VppInstance& inst) {
  ValidationReport r;
  check_network(inst.network, r);
  if (!(inst.step_h > 0.0)) error(r, "step", "time step must be positive");
  if (inst.horizon_steps == 0) error(r, "horizon", "horizon must contain at least one step");
  const auto H = inst.horizon_steps;

  std::set<std::string> resource_ids;
  auto register_resource = [&](const std::string& id, const std::string& bus) {
    if (!resource_ids.insert(id).second) error(r, "duplicate-id", "resource '" + id + "' defined twice");
    if (!inst.network.bus_index(bus)) error(r, "unknown-bus", "resource '" + id + "' sits on unknown bus '" + bus + "'");
  };

  for (const auto& g : inst.generators) {
    register_resource(g.id, g.bus);
    if (g.p_nom_kw < 0.0 || g.q_nom_kvar < 0.0) error(r, "generator-rating", "'" + g.id + "' needs P_nom, Q_nom >= 0");
    if (g.ramp_down_kw_per_min < 0.0 || g.ramp_up_kw_per_min < 0.0) error(r, "ramp-rate", "'" + g.id + "' ramp rates must be >= 0");
    check_profile(g.capacity_factor, H, "capacity factor of '" + g.id + "'", r);
    for (double cf : g.capacity_factor)
      if (cf < 0.0 || cf > 1.0) {
        error(r, "capacity-factor", "capacity factor of '" + g.id + "' must lie in [0,1]");
        break;
      }
  }
  for (const auto& hp : inst.heat_pumps) {
    register_resource(hp.id, hp.bus);
    if (!(hp.p_min_kw >= 0.0 && hp.p_min_kw <= hp.p_max_kw)) error(r, "hp-power", "'" + hp.id + "' needs 0 <= P_min <= P_max");
    if (hp.q_min_kvar > hp.q_max_kvar) error(r, "reactive-limits", "'" + hp.id + "' needs Q_min <= Q_max");
    if (!(hp.t_min_c <= hp.t_target_c && hp.t_target_c <= hp.t_max_c))
      error(r, "hp-comfort", "'" + hp.id + "' needs T_min <= T_target <= T_max");
    if (!(hp.c_th_kwh_per_k > 0.0 && hp.r_th_k_per_kw > 0.0 && hp.cop > 0.0))
      error(r, "hp-thermal", "'" + hp.id + "' needs C_th, R_th, COP > 0");
    if (hp.ramp_down_kw_per_min < 0.0 || hp.ramp_up_kw_per_min < 0.0) error(r, "ramp-rate", "'" + hp.id + "' ramp rates must be >= 0");
    check_profile(hp.ambient_c, H, "ambient temperature of '" + hp.id + "'", r);
  }
  for (const auto& ev : inst.ev_events) {
    register_resource(ev.id, ev.bus);
    check_storage(ev.storage, ev.id, r);
    if (ev.arrival_step > ev.departure_step || ev.departure_step > H)
      error(r, "ev-window", "'" + ev.id + "' needs arrival <= departure <= horizon");
    if (ev.r_ch_min_kw < 0.0) error(r, "ev-min-charge", "'" + ev.id + "' minimum charge rate must be >= 0");
    if (ev.storage.capacity_kwh > 0.0) {
      const auto stay = static_cast<double>(ev.departure_step - std::min(ev.arrival_step, ev.departure_step));
      const double final_soc = ev.storage.soc_ini + ev.r_ch_min_kw * inst.step_h * stay / ev.storage.capacity_kwh;
      if (final_soc > ev.storage.soc_max + 1e-12)
        error(r, "ev-final-soc-unreachable",
              "'" + ev.id + "' requires SOC " + fmt(final_soc) + " at departure, above SOC_max " + fmt(ev.storage.soc_max));
    }
  }
  for (const auto& b : inst.batteries) {
    register_resource(b.id, b.bus);
    check_storage(b.storage, b.id, r);
  }
  for (const auto& l : inst.loads) {
    register_resource(l.id, l.bus);
    if (!(l.power_factor > 0.0 && l.power_factor <= 1.0)) error(r, "power-factor", "'" + l.id + "' power factor must lie in (0,1]");
    check_profile(l.p_kw, H, "load profile of '" + l.id + "'", r);
    for (double p : l.p_kw)
      if (p < 0.0) {
        error(r, "load-negative", "load profile of '" + l.id + "' must be >= 0");
        break;
      }
  }

  check_profile(inst.prices.market, H, "market price", r);
  check_profile(inst.prices.tariff, H, "tariff", r);
  bool warned = false;
  for (double c : inst.prices.tariff) {
    if (c < 0.0) {
      error(r, "tariff-negative", "tariffs must be >= 0");
      break;
    }
    if (c == 0.0 && !warned) {
      r.add(Severity::warning, "tariff-nonpositive",
            "a zero tariff leaves the injection/withdrawal split without exclusivity");
      warned = true;
    }
  }

  // metering areas partition the resources
  std::map<std::string, int> membership;
  for (const auto& id : resource_ids) membership[id] = 0;
  std::set<std::string> area_ids;
  for (const auto& area : inst.metering_areas) {
    if (!area_ids.insert(area.id).second) error(r, "duplicate-id", "metering area '" + area.id + "' defined twice");
    for (const auto& m : area.members) {
      auto it = membership.find(m);
      if (it == membership.end()) error(r, "metering-unknown-member", "metering area '" + area.id + "' lists unknown resource '" + m + "'");
      else ++it->second;
    }
  }
  for (const auto& [id, count] : membership) {
    if (count == 0) error(r, "metering-unassigned", "resource '" + id + "' belongs to no metering area");
    if (count > 1) error(r, "metering-duplicate", "resource '" + id + "' belongs to more than one metering area");
  }
  return r;
}

ValidationReport validate_product(const VppInstance& inst, const ProductSpec& spec) {
  ValidationReport r;
  for (auto& msg : spec.check()) error(r, "product", msg);
  if (!r.ok()) return r;
  if (std::abs(spec.step_h - inst.step_h) > 1e-12)
    error(r, "product-step", "product step " + fmt(spec.step_h) + " h differs from the instance step " + fmt(inst.step_h) + " h");
  if (spec.first_step() + spec.step_count() > inst.horizon_steps)
    error(r, "product-window", "delivery window extends past the end of the horizon");
  if (!r.ok()) return r;
  const auto steps = spec.delivery_steps();
  for (const auto& ev : inst.ev_events) {
    double connected = 0.0;
    for (auto t : steps)
      if (ev.present(t)) connected += 1.0;
    const double final_soc = ev.storage.soc_ini + ev.r_ch_min_kw * spec.step_h * connected / ev.storage.capacity_kwh;
    if (final_soc > ev.storage.soc_max + 1e-12)
      error(r, "ev-final-soc-unreachable", "'" + ev.id + "' cannot reach its minimum final SOC within the delivery window");
  }
  return r;
}

}  // namespace vppflex::model
