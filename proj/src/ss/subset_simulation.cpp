#include "vppflex/ss/subset_simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vppflex/support/stats.hpp"

namespace vppflex::ss {

namespace {

constexpr std::uint64_t kStream = 0x7373;  // "ss"

std::vector<double> g_values(const Level& level) {
  std::vector<double> out;
  out.reserve(level.samples.size());
  for (const auto& s : level.samples) out.push_back(s.g);
  return out;
}

double finite_spread(std::span<const double> values) {
  std::vector<double> f;
  for (double v : values)
    if (std::isfinite(v)) f.push_back(v);
  return support::sample_stddev(f);
}

/// COV against |estimate|, or against the sample spread when the estimate is 0.
double relative_cov(double abs_error, double estimate, std::span<const double> values, bool& against_spread) {
  against_spread = false;
  if (abs_error == 0.0) return 0.0;
  if (estimate != 0.0 && std::isfinite(estimate)) return abs_error / std::abs(estimate);
  against_spread = true;
  const double spread = finite_spread(values);
  return spread > 0.0 ? abs_error / spread : 0.0;
}

}  // namespace

SsConfig SsConfig::resolved() const {
  SsConfig c = *this;
  if (c.levels == 0 && target_probability > 0.0 && target_probability < 1.0) {
    // smallest level count whose level probability is at least 0.1
    const double ratio = std::log(target_probability) / std::log(0.1);
    c.levels = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(ratio - 1e-9)));
  }
  if (c.level_probability == 0.0 && c.levels > 0)
    c.level_probability = std::pow(target_probability, 1.0 / static_cast<double>(c.levels));
  return c;
}

std::vector<std::string> SsConfig::check() const {
  std::vector<std::string> issues;
  const auto c = resolved();
  if (!(c.target_probability > 0.0 && c.target_probability < 1.0)) issues.push_back("target probability outside (0,1)");
  if (c.levels == 0) issues.push_back("level count must be positive");
  if (!(c.level_probability > 0.0 && c.level_probability < 1.0 + 1e-15))
    issues.push_back("level probability outside (0,1)");
  else if (c.levels > 0 &&
           std::abs(std::pow(c.level_probability, static_cast<double>(c.levels)) - c.target_probability) > 1e-12)
    issues.push_back("level probability to the power of the level count must equal the target probability");
  if (c.samples_per_level == 0) issues.push_back("samples per level must be positive");
  else if (static_cast<double>(c.samples_per_level) * c.level_probability < 1.0 - 1e-9)
    issues.push_back("samples per level times level probability must be at least 1");
  if (!(c.proposal_spread > 0.0) || !std::isfinite(c.proposal_spread)) issues.push_back("proposal spread must be positive");
  if (c.dims == 0) issues.push_back("dimension must be positive");
  return issues;
}

double channel_acceptance(double current, double candidate) {
  return std::min(1.0, std::exp(-0.5 * (candidate * candidate - current * current)));
}

MmStep mm_step(const ChainState& current, const PerformanceFunction& g, double threshold, double spread,
               support::RandomStream& rng) {
  std::vector<double> candidate = current.u;
  bool changed = false;
  for (std::size_t k = 0; k < candidate.size(); ++k) {
    const double xi = current.u[k] + spread * rng.normal();
    if (rng.uniform() < channel_acceptance(current.u[k], xi)) {
      candidate[k] = xi;
      changed = true;
    }
  }
  if (!changed) return {current, false, false};
  const double gc = g(candidate);
  if (gc <= threshold) return {{std::move(candidate), gc}, true, true};
  return {current, true, false};
}

DmcResult dmc_quantile(const PerformanceFunction& g, std::size_t dims, double alpha, std::size_t n,
                       scenario::SamplingMethod method, std::uint64_t seed, const support::Executor& executor) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("dmc_quantile: alpha outside (0,1)");
  if (static_cast<double>(n) * alpha < 1.0 - 1e-9) throw std::invalid_argument("dmc_quantile: n * alpha below 1");
  const auto pts = scenario::sample_standard_normal(n, dims, method, seed);
  DmcResult r;
  r.values.resize(n);
  executor.for_each_index(n, [&](std::size_t i) { r.values[i] = g(pts[i]); });
  r.evaluations = n;
  r.estimate = support::empirical_quantile(r.values, alpha);
  const double f = support::gaussian_kde(r.values, r.estimate);
  if (f > 0.0) {
    const double se = std::sqrt(alpha * (1.0 - alpha) / static_cast<double>(n)) / f;
    bool unused = false;
    r.cov = relative_cov(se, r.estimate, r.values, unused);
  }
  return r;
}

SsResult ss_quantile(const PerformanceFunction& g, const SsConfig& config, const support::Executor& executor) {
  if (const auto issues = config.check(); !issues.empty()) throw std::invalid_argument("ss_quantile: " + issues.front());
  const SsConfig cfg = config.resolved();
  const std::size_t n = cfg.samples_per_level;
  const std::size_t seeds = support::quantile_rank(n, cfg.level_probability);

  SsResult r;
  r.level_probability = cfg.level_probability;
  r.target_probability = cfg.target_probability;

  Level first;
  const auto pts = scenario::sample_standard_normal(n, cfg.dims, cfg.first_level, support::derive_seed(cfg.seed, {kStream, 0}));
  first.samples.resize(n);
  executor.for_each_index(n, [&](std::size_t i) { first.samples[i] = {pts[i], g(pts[i]), i}; });
  first.chain_lengths.assign(n, 1);
  r.evaluations = r.g_calls = n;
  r.levels.push_back(std::move(first));

  for (std::size_t level = 0;; ++level) {
    auto& cur = r.levels[level];
    const auto values = g_values(cur);
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    if (level == 0 && *lo == *hi) {
      if (!cfg.allow_constant) throw DegenerateLevel("subset simulation: every level-1 sample has the same value");
      r.constant = true;
      r.estimate = *lo;
      r.thresholds.assign(1, *lo);
      cur.threshold = *lo;
      return r;
    }
    const auto order = support::stable_order(values);
    cur.threshold = values[order[seeds - 1]];
    r.thresholds.push_back(cur.threshold);
    if (level + 1 == cfg.levels) break;

    // seeds in ascending order of g; chain c has base or base+1 states
    std::vector<std::vector<LevelSample>> chains(seeds);
    std::vector<std::size_t> lengths(seeds, n / seeds);
    for (std::size_t c = 0; c < n % seeds; ++c) ++lengths[c];
    std::vector<std::size_t> calls(seeds, 0);
    const double threshold = cur.threshold;
    executor.for_each_index(seeds, [&](std::size_t c) {
      support::RandomStream rng(support::derive_seed(cfg.seed, {kStream, level + 1, c}));
      const auto& seed = cur.samples[order[c]];
      ChainState state{seed.u, seed.g};
      chains[c].reserve(lengths[c]);
      chains[c].push_back({state.u, state.g, c});
      for (std::size_t step = 1; step < lengths[c]; ++step) {
        auto next = mm_step(state, g, threshold, cfg.proposal_spread, rng);
        calls[c] += next.evaluated ? 1 : 0;
        state = std::move(next.next);
        chains[c].push_back({state.u, state.g, c});
      }
    });

    Level next;
    next.samples.reserve(n);
    for (auto& chain : chains)
      for (auto& s : chain) next.samples.push_back(std::move(s));
    next.chain_lengths = std::move(lengths);
    r.evaluations += n - seeds;
    for (auto k : calls) r.g_calls += k;
    r.levels.push_back(std::move(next));
  }

  r.estimate = r.thresholds.back();
  r.cov_probability = cov_probability(r);
  const auto last = g_values(r.levels.back());
  r.density_at_estimate = std::pow(r.level_probability, static_cast<double>(cfg.levels - 1)) *
                          support::gaussian_kde(last, r.estimate);
  if (r.density_at_estimate > 0.0) {
    const double abs_error = r.cov_probability * r.target_probability / r.density_at_estimate;
    r.cov_quantile = relative_cov(abs_error, r.estimate, last, r.cov_relative_to_spread);
  }
  return r;
}

double cov_probability(const SsResult& result) {
  const double p0 = result.level_probability;
  double total = 0.0;
  for (const auto& level : result.levels) {
    const std::size_t n = level.samples.size();
    if (n == 0) continue;
    std::vector<std::uint8_t> hit(n);
    double p = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      hit[i] = level.samples[i].g <= level.threshold ? 1 : 0;
      p += hit[i];
    }
    p /= static_cast<double>(n);
    const double r0 = p * (1.0 - p);

    // chain correlation factor from the lag-k covariance of the indicator
    double gamma = 0.0;
    const std::size_t longest = *std::max_element(level.chain_lengths.begin(), level.chain_lengths.end());
    if (r0 > 0.0 && longest > 1) {
      for (std::size_t lag = 1; lag < longest; ++lag) {
        double acc = 0.0;
        std::size_t pairs = 0, offset = 0;
        for (auto len : level.chain_lengths) {
          for (std::size_t i = 0; i + lag < len; ++i) {
            acc += hit[offset + i] * hit[offset + i + lag];
            ++pairs;
          }
          offset += len;
        }
        if (pairs == 0) break;
        const double rho = (acc / static_cast<double>(pairs) - p * p) / r0;
        gamma += 2.0 * (static_cast<double>(pairs) / static_cast<double>(n)) * rho;
      }
    }
    total += (1.0 - p0) / (static_cast<double>(n) * p0) * (1.0 + gamma);
  }
  return std::sqrt(total);
}

double cov_quantile(double cov_prob, double target_probability, double density, double estimate) {
  if (density <= 0.0 || estimate == 0.0) return 0.0;
  return cov_prob * target_probability / (density * std::abs(estimate));
}

std::vector<HistogramRow> level_histograms(const SsResult& result, std::size_t bins) {
  if (bins == 0) bins = 1;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& level : result.levels)
    for (const auto& s : level.samples)
      if (std::isfinite(s.g)) {
        lo = std::min(lo, s.g);
        hi = std::max(hi, s.g);
      }
  std::vector<HistogramRow> rows;
  if (!(lo <= hi)) return rows;
  if (hi == lo) bins = 1;
  const double width = hi > lo ? (hi - lo) / static_cast<double>(bins) : 0.0;
  for (std::size_t l = 0; l < result.levels.size(); ++l) {
    std::vector<std::size_t> counts(bins, 0);
    for (const auto& s : result.levels[l].samples) {
      if (!std::isfinite(s.g)) continue;
      auto b = width > 0.0 ? static_cast<std::size_t>((s.g - lo) / width) : 0;
      counts[std::min(b, bins - 1)]++;
    }
    for (std::size_t b = 0; b < bins; ++b)
      rows.push_back({l + 1, lo + width * static_cast<double>(b),
                      b + 1 == bins ? hi : lo + width * static_cast<double>(b + 1), counts[b]});
  }
  return rows;
}

}  // namespace vppflex::ss
