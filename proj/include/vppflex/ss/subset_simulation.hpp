#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vppflex/scenario/uncertainty.hpp"
#include "vppflex/support/parallel.hpp"
#include "vppflex/support/rng.hpp"

namespace vppflex::ss {

/// Performance function on standard-normal coordinates. Called concurrently,
/// so it must not share mutable state between calls.
using PerformanceFunction = std::function<double(std::span<const double>)>;

/// Raised when a level collapses to a single value and no threshold can split it.
class DegenerateLevel : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SsConfig {
  double target_probability = 0.001;  // lower-tail probability of the quantile
  std::size_t levels = 3;             // 0 picks the count giving a level probability near 0.1
  double level_probability = 0.0;     // 0 derives target^(1/levels)
  std::size_t samples_per_level = 1000;
  double proposal_spread = 1.0;  // random-walk standard deviation per coordinate
  std::size_t dims = scenario::kChannelCount;
  scenario::SamplingMethod first_level = scenario::SamplingMethod::lhs;
  std::uint64_t seed = 1;
  /// Return the common value instead of throwing when level 1 is constant.
  bool allow_constant = false;

  /// Level count and probability with the defaults filled in.
  SsConfig resolved() const;
  std::vector<std::string> check() const;
};

struct LevelSample {
  std::vector<double> u;
  double g = 0.0;
  std::size_t chain = 0;  // chain that produced it (sample index on level 1)
};

struct Level {
  std::vector<LevelSample> samples;  // chain-major, each chain in step order
  std::vector<std::size_t> chain_lengths;
  double threshold = 0.0;  // empirical level-probability quantile of g
};

struct SsResult {
  double estimate = 0.0;
  std::vector<double> thresholds;  // one per level, non-increasing
  std::vector<Level> levels;
  std::size_t evaluations = 0;  // samples generated (the sampling budget)
  std::size_t g_calls = 0;      // actual calls; repeats of an unmoved chain are free
  double level_probability = 0.0;
  double target_probability = 0.0;
  double cov_probability = 0.0;
  double cov_quantile = 0.0;
  double density_at_estimate = 0.0;
  bool cov_relative_to_spread = false;  // estimate was 0, COV taken against the sample spread
  bool constant = false;                // level 1 was constant (allow_constant)
};

struct DmcResult {
  double estimate = 0.0;
  double cov = 0.0;
  std::vector<double> values;
  std::size_t evaluations = 0;
};

/// Empirical alpha-quantile of g over n draws and its COV from the
/// order-statistic variance alpha(1-alpha)/(n f^2).
DmcResult dmc_quantile(const PerformanceFunction& g, std::size_t dims, double alpha, std::size_t n,
                       scenario::SamplingMethod method, std::uint64_t seed,
                       const support::Executor& executor = support::Executor(1));

struct ChainState {
  std::vector<double> u;
  double g = 0.0;
};

struct MmStep {
  ChainState next;
  bool evaluated = false;  // g was called on a candidate
  bool moved = false;
};

/// Per-coordinate acceptance ratio phi(candidate)/phi(current), capped at 1.
double channel_acceptance(double current, double candidate);

/// One modified Metropolis transition inside the domain g <= threshold.
MmStep mm_step(const ChainState& current, const PerformanceFunction& g, double threshold, double spread,
               support::RandomStream& rng);

/// Lower-tail quantile at cfg.target_probability by subset simulation.
SsResult ss_quantile(const PerformanceFunction& g, const SsConfig& cfg,
                     const support::Executor& executor = support::Executor(1));

/// Accuracy of the final estimate: COV of the failure probability (Au-Beck,
/// with chain correlation) mapped to the quantile through the density.
double cov_probability(const SsResult& result);
double cov_quantile(double cov_prob, double target_probability, double density, double estimate);

struct HistogramRow {
  std::size_t level = 0;
  double lower = 0.0;
  double upper = 0.0;
  std::size_t count = 0;
};

/// Per-level histograms of the finite g values on a grid shared by all levels.
std::vector<HistogramRow> level_histograms(const SsResult& result, std::size_t bins);

}  // namespace vppflex::ss
