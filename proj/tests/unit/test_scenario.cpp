#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "common/instances.hpp"
#include "vppflex/scenario/uncertainty.hpp"
#include "vppflex/support/stats.hpp"

using namespace vppflex;
using namespace vppflex::scenario;
using namespace vppflex::testing;

namespace {

model::VppInstance fleet(std::size_t evs) {
  auto inst = chain_instance(3);
  add_generator(inst, "pv", "b1", 10.0, 0.5);
  add_heat_pump(inst, "hp", "b2");
  add_load(inst, "house", "b2", 4.0);
  for (std::size_t i = 0; i < evs; ++i) add_ev(inst, "ev" + std::to_string(i), "b1", 6, 18);
  for (std::size_t t = 0; t < inst.horizon_steps; ++t) {
    inst.generators[0].capacity_factor[t] = 0.04 * t;
    inst.loads[0].p_kw[t] = 1.0 + t;
    inst.prices.market[t] = 0.05 + 0.001 * t;
  }
  return inst;
}

}  // namespace

TEST_CASE("latin hypercube puts one point in every stratum") {
  const std::size_t n = 1000;
  const auto pts = sample_standard_normal(n, kChannelCount, SamplingMethod::lhs, 11);
  REQUIRE(pts.size() == n);
  for (std::size_t k = 0; k < kChannelCount; ++k) {
    std::vector<int> hit(n, 0);
    for (const auto& p : pts) {
      const double u = support::normal_cdf(p[k]);
      hit[std::min(n - 1, static_cast<std::size_t>(u * n))]++;
    }
    CHECK(std::all_of(hit.begin(), hit.end(), [](int h) { return h == 1; }));
  }
}

TEST_CASE("sampling is deterministic in the seed") {
  const auto inst = fleet(5);
  const UncertaintyModel m;
  for (auto method : {SamplingMethod::plain, SamplingMethod::lhs}) {
    const auto a = sample(inst, m, 50, method, 9);
    const auto b = sample(inst, m, 50, method, 9);
    const auto c = sample(inst, m, 50, method, 10);
    CHECK(a == b);
    CHECK_FALSE(a == c);
  }
}

TEST_CASE("zero errors reproduce the reference profiles") {
  const auto inst = fleet(6);
  const auto none = UncertaintyModel::none();
  CHECK(none.degenerate());
  for (const auto& s : sample(inst, none, 20, SamplingMethod::lhs, 3)) {
    CHECK(s.capacity_factor[0] == inst.generators[0].capacity_factor);
    CHECK(s.ambient_c[0] == inst.heat_pumps[0].ambient_c);
    CHECK(s.load_p_kw[0] == inst.loads[0].p_kw);
    CHECK(s.market == inst.prices.market);
    CHECK(s.tariff == inst.prices.tariff);
    CHECK(std::none_of(s.ev_removed.begin(), s.ev_removed.end(), [](bool r) { return r; }));
    for (std::size_t t = 0; t < inst.horizon_steps; ++t)
      CHECK(s.load_q_kvar[0][t] == doctest::Approx(inst.loads[0].p_kw[t] * inst.loads[0].q_over_p()));
  }
  CHECK(reference_scenario(inst).capacity_factor == materialize(inst, none, StandardPoint{}, 0).capacity_factor);
}

TEST_CASE("load error has the configured spread") {
  const UncertaintyModel m;
  const auto pts = sample_standard_normal(100000, kChannelCount, SamplingMethod::plain, 5);
  std::vector<double> rel(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    StandardPoint u{};
    std::copy(pts[i].begin(), pts[i].end(), u.begin());
    rel[i] = errors_at(m, u).load;
  }
  CHECK(std::abs(support::sample_stddev(rel) - 0.108) < 0.003);
  CHECK(std::abs(support::mean(rel)) < 3 * 0.108 / std::sqrt(1e5));
}

TEST_CASE("channel means match the model within three standard errors") {
  const UncertaintyModel m;
  const std::size_t n = 100000;
  const auto pts = sample_standard_normal(n, kChannelCount, SamplingMethod::plain, 21);
  double g = 0, t = 0, c = 0, ev = 0;
  for (const auto& p : pts) {
    StandardPoint u{};
    std::copy(p.begin(), p.end(), u.begin());
    const auto e = errors_at(m, u);
    g += e.generation;
    t += e.temperature_k;
    c += e.price_chf_per_kwh;
    ev += e.ev_disruption;
  }
  const double rn = std::sqrt(static_cast<double>(n));
  CHECK(std::abs(g / n) < 3 * 0.0815 / rn);
  CHECK(std::abs(t / n) < 3 * 1.5 / rn);
  CHECK(std::abs(c / n) < 3 * 0.00428 / rn);
  CHECK(std::abs(ev / n - 0.1) < 3 * (0.2 / std::sqrt(12.0)) / rn);
}

TEST_CASE("median disruption removes a tenth of the events") {
  const auto inst = fleet(40);
  const auto s = materialize(inst, UncertaintyModel{}, StandardPoint{}, 77);
  CHECK(s.errors.ev_disruption == doctest::Approx(0.1));
  CHECK(std::count(s.ev_removed.begin(), s.ev_removed.end(), true) == 4);
  for (std::size_t i = 0; i < 40; ++i) {
    const bool any = std::any_of(s.presence[i].begin(), s.presence[i].end(), [](auto k) { return k != 0; });
    CHECK(any == !s.ev_removed[i]);
  }
  // different seeds pick different events
  std::set<std::vector<bool>> picks;
  for (std::uint64_t seed = 0; seed < 10; ++seed) picks.insert(materialize(inst, UncertaintyModel{}, StandardPoint{}, seed).ev_removed);
  CHECK(picks.size() > 1);
}

TEST_CASE("removal count is monotone and bounded") {
  std::size_t prev = 0;
  for (int i = 0; i <= 100; ++i) {
    const auto k = removal_count(i / 100.0, 13);
    CHECK(k >= prev);
    CHECK(k <= 13);
    prev = k;
  }
  CHECK(removal_count(1.0, 13) == 13);
  CHECK(removal_count(0.5, 0) == 0);
}

TEST_CASE("additive and multiplicative errors with clamping") {
  auto inst = fleet(0);
  inst.generators[0].capacity_factor.assign(24, 0.98);
  UncertaintyModel m;
  StandardPoint u{};
  u[kGeneration] = 0.05 / m.sigma_generation;
  u[kTemperature] = 1.0;  // +1.5 K
  u[kLoad] = -20.0;       // drives the load below zero
  const auto s = materialize(inst, m, u, 1);
  for (double cf : s.capacity_factor[0]) CHECK(cf == 1.0);
  for (std::size_t t = 0; t < 24; ++t) {
    CHECK(s.ambient_c[0][t] == doctest::Approx(inst.heat_pumps[0].ambient_c[t] + 1.5));
    CHECK(s.load_p_kw[0][t] == 0.0);
  }
}

TEST_CASE("materialization is pure") {
  const auto inst = fleet(12);
  const UncertaintyModel m;
  const StandardPoint u{0.3, -1.2, 0.7, 2.0, 1.5};
  CHECK(materialize(inst, m, u, 5) == materialize(inst, m, u, 5));
  CHECK(removal_seed_for(u, 1) == removal_seed_for(u, 1));
  CHECK(removal_seed_for(u, 1) != removal_seed_for(u, 2));
}

TEST_CASE("standard log density") {
  const double base = 5.0 * std::log(1.0 / std::sqrt(2.0 * std::numbers::pi));
  const std::vector<double> zero(5, 0.0);
  CHECK(log_density_standard(zero) == doctest::Approx(base).epsilon(1e-15));
  const std::vector<double> e1{1, 0, 0, 0, 0};
  CHECK(log_density_standard(e1) == doctest::Approx(base - 0.5).epsilon(1e-15));
  const std::vector<double> u{0.3, -1.1, 2.0, 0.0, -0.4};
  std::vector<double> neg(u.size());
  std::transform(u.begin(), u.end(), neg.begin(), [](double x) { return -x; });
  CHECK(log_density_standard(u) == log_density_standard(neg));
}
