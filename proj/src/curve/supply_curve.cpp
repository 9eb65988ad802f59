#include "vppflex/curve/supply_curve.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>

#include "vppflex/model/validate.hpp"
#include "vppflex/support/stats.hpp"

namespace vppflex::curve {

namespace {
constexpr std::uint64_t kCostScenarios = 0x63757276;
}  // namespace

ss::PerformanceFunction performance_function(const model::VppInstance& instance, const model::ProductSpec& spec,
                                             const scenario::UncertaintyModel& model, std::uint64_t salt,
                                             const flex::FlexOptions& opts) {
  // captured by value: the function outlives the call and runs on workers
  return [instance, spec, model, salt, opts](std::span<const double> u) {
    scenario::StandardPoint p{};
    std::copy_n(u.begin(), std::min(u.size(), p.size()), p.begin());
    const auto sc = scenario::materialize(instance, model, p, scenario::removal_seed_for(p, salt));
    return flex::evaluate_g(instance, spec, sc, opts);
  };
}

MaxFlexibility max_flexibility(const model::VppInstance& instance, const model::ProductSpec& spec,
                               const scenario::UncertaintyModel& model, ss::SsConfig cfg,
                               const support::Executor& executor, const flex::FlexOptions& opts) {
  cfg.target_probability = spec.alpha();
  cfg.dims = scenario::kChannelCount;
  cfg.allow_constant = true;
  const auto g = performance_function(instance, spec, model, cfg.seed, opts);
  MaxFlexibility out;
  out.ss = ss::ss_quantile(g, cfg, executor);
  if (!(out.ss.estimate >= 0.0)) {
    out.infeasible_at_quantile = true;
    out.q_max = 0.0;
  } else {
    out.q_max = out.ss.estimate;
  }
  return out;
}

std::vector<std::string> SweepConfig::check() const {
  std::vector<std::string> out;
  if (steps < 1) out.push_back("steps must be at least 1");
  if (!(risk_level > 0.0 && risk_level < 1.0)) out.push_back("risk_level must lie in (0, 1)");
  if (static_cast<double>(samples) * std::min(risk_level, 1.0 - risk_level) < 5.0)
    out.push_back("samples * min(risk_level, 1 - risk_level) must be at least 5");
  for (double b : bands)
    if (!(b > 0.0 && b < 1.0)) out.push_back("band levels must lie in (0, 1)");
  if (!std::is_sorted(bands.begin(), bands.end())) out.push_back("band levels must be ascending");
  return out;
}

bool SupplyCurve::monotone() const {
  return std::none_of(points.begin(), points.end(), [](const CurvePoint& p) { return p.monotone_violation; });
}

SupplyCurve build_supply_curve(const model::VppInstance& instance, const model::ProductSpec& spec,
                               const scenario::UncertaintyModel& model, double q_max, const SweepConfig& cfg,
                               std::uint64_t seed, const support::Executor& executor, const flex::FlexOptions& opts) {
  if (const auto problems = cfg.check(); !problems.empty()) throw std::invalid_argument(problems.front());
  if (!(q_max >= 0.0) || !std::isfinite(q_max)) throw std::invalid_argument("q_max must be finite and non-negative");

  const auto scenarios = scenario::sample(instance, model, cfg.samples, scenario::SamplingMethod::lhs,
                                          support::derive_seed(seed, {kCostScenarios}));
  const std::size_t points = cfg.steps + 1;
  const std::size_t n = cfg.samples;
  std::vector<double> quantity(points);
  for (std::size_t i = 0; i < points; ++i)
    quantity[i] = i == cfg.steps ? q_max : q_max * static_cast<double>(i) / static_cast<double>(cfg.steps);

  std::vector<double> price(points * n);
  executor.for_each_index(points * n, [&](std::size_t task) {
    const std::size_t i = task / n, s = task % n;
    price[task] = cost::product_cost(instance, spec, scenarios[s], quantity[i], opts).price;
  });

  SupplyCurve curve;
  curve.band_levels = cfg.bands;
  curve.q_max = q_max;
  curve.risk_level = cfg.risk_level;
  curve.samples = n;
  for (std::size_t i = 0; i < points; ++i) {
    const std::span<const double> row(price.data() + i * n, n);
    CurvePoint p;
    p.quantity = quantity[i];
    p.cost = support::empirical_quantile(row, cfg.risk_level);
    for (double b : cfg.bands) p.bands.push_back(support::empirical_quantile(row, b));
    const auto bad = std::count_if(row.begin(), row.end(), [](double v) { return !std::isfinite(v); });
    p.infeasible_fraction = static_cast<double>(bad) / static_cast<double>(n);
    p.excess_infeasibility = p.infeasible_fraction > spec.alpha() + 1e-12;
    if (i > 0) p.monotone_violation = p.cost < curve.points.back().cost - kMonotoneTol;
    curve.points.push_back(std::move(p));
  }
  return curve;
}

std::string_view to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::reliability: return "reliability";
    case SweepAxis::ramp_time: return "ramp_time";
    case SweepAxis::duration: return "duration";
    case SweepAxis::delivery_start: return "delivery_start";
  }
  return "?";
}

bool parse_axis(std::string_view text, SweepAxis& axis) {
  for (auto a : {SweepAxis::reliability, SweepAxis::ramp_time, SweepAxis::duration, SweepAxis::delivery_start})
    if (text == to_string(a)) {
      axis = a;
      return true;
    }
  return false;
}

model::ProductSpec with_axis(model::ProductSpec spec, SweepAxis axis, double value) {
  switch (axis) {
    case SweepAxis::reliability: spec.reliability = value; break;
    case SweepAxis::ramp_time: spec.ramp_time_min = value; break;
    case SweepAxis::duration: spec.duration_h = value; break;
    case SweepAxis::delivery_start: spec.delivery_start_h = value; break;
  }
  return spec;
}

std::vector<SweepRow> sensitivity_sweep(const model::VppInstance& instance, const model::ProductSpec& spec,
                                        const scenario::UncertaintyModel& model, SweepAxis axis,
                                        const std::vector<double>& values, const ss::SsConfig& cfg,
                                        const support::Executor& executor, const flex::FlexOptions& opts) {
  std::vector<SweepRow> rows;
  for (double v : values) {
    SweepRow row;
    row.value = v;
    const auto point = with_axis(spec, axis, v);
    if (const auto report = model::validate_product(instance, point); !report.ok()) {
      row.error = report.issues.front().message;
      rows.push_back(std::move(row));
      continue;
    }
    try {
      const auto mf = max_flexibility(instance, point, model, cfg, executor, opts);
      row.ok = true;
      row.q_max = mf.q_max;
      row.cov_quantile = mf.ss.cov_quantile;
      row.evaluations = mf.ss.evaluations;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace vppflex::curve
