#include "vppflex/scenario/uncertainty.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "vppflex/support/rng.hpp"
#include "vppflex/support/stats.hpp"

namespace vppflex::scenario {

using support::derive_seed;
using support::RandomStream;

bool UncertaintyModel::degenerate() const {
  return sigma_load == 0.0 && sigma_generation == 0.0 && sigma_temperature_k == 0.0 && sigma_price_chf_per_mwh == 0.0 &&
         ev_disruption_min == ev_disruption_max;
}

std::vector<std::string> UncertaintyModel::check() const {
  std::vector<std::string> out;
  if (sigma_load < 0.0 || sigma_generation < 0.0 || sigma_temperature_k < 0.0 || sigma_price_chf_per_mwh < 0.0)
    out.emplace_back("standard deviations must be >= 0");
  if (!(0.0 <= ev_disruption_min && ev_disruption_min <= ev_disruption_max && ev_disruption_max <= 1.0))
    out.emplace_back("EV disruption support must satisfy 0 <= min <= max <= 1");
  return out;
}

UncertaintyModel UncertaintyModel::none() {
  UncertaintyModel m;
  m.sigma_load = m.sigma_generation = m.sigma_temperature_k = m.sigma_price_chf_per_mwh = 0.0;
  m.ev_disruption_min = m.ev_disruption_max = 0.0;
  return m;
}

LumpedErrors errors_at(const UncertaintyModel& model, const StandardPoint& u) {
  LumpedErrors e;
  e.load = model.sigma_load * u[kLoad];
  e.generation = model.sigma_generation * u[kGeneration];
  e.temperature_k = model.sigma_temperature_k * u[kTemperature];
  e.price_chf_per_kwh = model.sigma_price_chf_per_mwh * u[kPrice] / 1000.0;
  const double width = model.ev_disruption_max - model.ev_disruption_min;
  e.ev_disruption = width > 0.0 ? model.ev_disruption_min + width * support::normal_cdf(u[kEvDisruption])
                                : model.ev_disruption_min;
  return e;
}

std::size_t removal_count(double disruption, std::size_t events) {
  const double f = std::clamp(disruption, 0.0, 1.0);
  // a tiny slack keeps exact products like 0.1 * 40 at their intended value
  const auto k = static_cast<std::size_t>(std::floor(f * static_cast<double>(events) + 0.5 + 1e-9));
  return std::min(k, events);
}

ScenarioRealization materialize(const model::VppInstance& inst, const UncertaintyModel& model, const StandardPoint& u,
                                std::uint64_t removal_seed) {
  ScenarioRealization s;
  s.u = u;
  s.removal_seed = removal_seed;
  s.errors = errors_at(model, u);
  const auto& e = s.errors;
  const auto H = inst.horizon_steps;

  s.capacity_factor.reserve(inst.generators.size());
  for (const auto& g : inst.generators) {
    std::vector<double> cf(g.capacity_factor.size());
    for (std::size_t t = 0; t < cf.size(); ++t) cf[t] = std::clamp(g.capacity_factor[t] * (1.0 + e.generation), 0.0, 1.0);
    s.capacity_factor.push_back(std::move(cf));
  }
  s.ambient_c.reserve(inst.heat_pumps.size());
  for (const auto& hp : inst.heat_pumps) {
    std::vector<double> ta(hp.ambient_c);
    for (auto& v : ta) v += e.temperature_k;
    s.ambient_c.push_back(std::move(ta));
  }
  for (const auto& l : inst.loads) {
    std::vector<double> p(l.p_kw.size()), q(l.p_kw.size());
    const double ratio = l.q_over_p();
    for (std::size_t t = 0; t < p.size(); ++t) {
      p[t] = std::max(0.0, l.p_kw[t] * (1.0 + e.load));
      q[t] = p[t] * ratio;
    }
    s.load_p_kw.push_back(std::move(p));
    s.load_q_kvar.push_back(std::move(q));
  }
  s.market = inst.prices.market;
  for (auto& c : s.market) c += e.price_chf_per_kwh;
  s.tariff = inst.prices.tariff;

  // EV schedule disruption: remove k events uniformly without replacement
  const auto n_ev = inst.ev_events.size();
  s.ev_removed.assign(n_ev, false);
  const auto k = removal_count(e.ev_disruption, n_ev);
  if (k > 0) {
    std::vector<std::size_t> idx(n_ev);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    RandomStream rng(removal_seed);
    for (std::size_t i = 0; i < k; ++i) {
      const auto j = i + rng.below(n_ev - i);
      std::swap(idx[i], idx[j]);
      s.ev_removed[idx[i]] = true;
    }
  }
  s.presence.reserve(n_ev);
  for (std::size_t i = 0; i < n_ev; ++i) {
    std::vector<std::uint8_t> k_t(H, 0);
    if (!s.ev_removed[i])
      for (std::size_t t = 0; t < H; ++t) k_t[t] = inst.ev_events[i].present(t) ? 1 : 0;
    s.presence.push_back(std::move(k_t));
  }
  return s;
}

ScenarioRealization reference_scenario(const model::VppInstance& instance) {
  return materialize(instance, UncertaintyModel::none(), StandardPoint{}, 0);
}

std::uint64_t removal_seed_for(const StandardPoint& u, std::uint64_t salt) {
  std::uint64_t h = support::mix64(salt ^ 0x5851f42d4c957f2dULL);
  for (double v : u) h = support::mix64(h ^ std::bit_cast<std::uint64_t>(v));
  return h;
}

std::vector<std::vector<double>> sample_standard_normal(std::size_t n, std::size_t dims, SamplingMethod method,
                                                        std::uint64_t seed) {
  std::vector<std::vector<double>> pts(n, std::vector<double>(dims));
  if (method == SamplingMethod::plain) {
    for (std::size_t i = 0; i < n; ++i) {
      RandomStream rng(derive_seed(seed, {0x706c61696eULL, i}));
      for (std::size_t k = 0; k < dims; ++k) pts[i][k] = rng.normal();
    }
    return pts;
  }
  for (std::size_t k = 0; k < dims; ++k) {
    RandomStream rng(derive_seed(seed, {0x6c6873ULL, k}));
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    for (std::size_t i = 0; i < n; ++i) {
      const double p = (static_cast<double>(perm[i]) + rng.uniform()) / static_cast<double>(n);
      pts[i][k] = support::normal_quantile(p);
    }
  }
  return pts;
}

std::vector<ScenarioRealization> sample(const model::VppInstance& instance, const UncertaintyModel& model, std::size_t n,
                                        SamplingMethod method, std::uint64_t seed) {
  const auto pts = sample_standard_normal(n, kChannelCount, method, seed);
  std::vector<ScenarioRealization> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    StandardPoint u;
    std::copy(pts[i].begin(), pts[i].end(), u.begin());
    out.push_back(materialize(instance, model, u, derive_seed(seed, {0x72656d6fULL, i})));
  }
  return out;
}

double log_density_standard(std::span<const double> u) {
  const double log_norm = -0.5 * std::log(2.0 * M_PI);
  double acc = 0.0;
  for (double v : u) acc += log_norm - 0.5 * v * v;
  return acc;
}

}  // namespace vppflex::scenario
