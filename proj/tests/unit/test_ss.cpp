#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "vppflex/ss/subset_simulation.hpp"
#include "vppflex/support/stats.hpp"

using namespace vppflex;
using namespace vppflex::ss;
using scenario::SamplingMethod;

namespace {

double first_coordinate(std::span<const double> u) { return u[0]; }

SsConfig paper_like(std::uint64_t seed) {
  SsConfig c;
  c.target_probability = 0.001;
  c.levels = 3;
  c.samples_per_level = 1000;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("configuration defaults and checks") {
  auto c = paper_like(1).resolved();
  CHECK(c.level_probability == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(c.check().empty());

  SsConfig autolevels;
  autolevels.levels = 0;
  autolevels.target_probability = 0.01;
  CHECK(autolevels.resolved().levels == 2);
  autolevels.target_probability = 0.05;
  CHECK(autolevels.resolved().levels == 2);
  autolevels.target_probability = 0.1;
  CHECK(autolevels.resolved().levels == 1);

  SsConfig bad = paper_like(1);
  bad.level_probability = 0.2;
  CHECK_FALSE(bad.check().empty());
  bad = paper_like(1);
  bad.samples_per_level = 5;
  CHECK_FALSE(bad.check().empty());
}

TEST_CASE("evaluation budget") {
  const auto r = ss_quantile(first_coordinate, paper_like(7));
  CHECK(r.evaluations == 2800);
  CHECK(r.g_calls <= r.evaluations);
  CHECK(r.g_calls > 2700);
  std::size_t stored = 0;
  for (const auto& l : r.levels) stored += l.samples.size();
  CHECK(stored == 3000);  // 200 seeds are carried over, not re-evaluated
}

TEST_CASE("levels are nested") {
  const auto r = ss_quantile(first_coordinate, paper_like(3));
  REQUIRE(r.levels.size() == 3);
  for (std::size_t l = 1; l < r.levels.size(); ++l) {
    CHECK(r.thresholds[l] <= r.thresholds[l - 1]);
    for (const auto& s : r.levels[l].samples) CHECK(s.g <= r.thresholds[l - 1]);
    CHECK(r.levels[l].chain_lengths.size() == 100);
  }
  CHECK(r.estimate == r.thresholds.back());
}

TEST_CASE("estimate near the normal quantile on average") {
  const double truth = support::normal_quantile(0.001);
  std::vector<double> est;
  for (std::uint64_t s = 0; s < 20; ++s) est.push_back(ss_quantile(first_coordinate, paper_like(100 + s)).estimate);
  CHECK(std::abs(support::mean(est) - truth) < 0.08);
  CHECK(support::sample_stddev(est) < 0.2);
}

TEST_CASE("single level equals direct sampling") {
  SsConfig c;
  c.target_probability = 0.1;
  c.levels = 1;
  c.samples_per_level = 500;
  c.seed = 9;
  const auto r = ss_quantile(first_coordinate, c);
  const auto d = dmc_quantile(first_coordinate, c.dims, 0.1, 500, SamplingMethod::lhs,
                              support::derive_seed(9, {0x7373, 0}));
  CHECK(r.estimate == d.estimate);
  CHECK(r.evaluations == 500);
}

TEST_CASE("affine equivariance with the same seed") {
  const auto base = ss_quantile(first_coordinate, paper_like(11));
  const auto scaled = ss_quantile([](std::span<const double> u) { return 2.5 * u[0] + 4.0; }, paper_like(11));
  CHECK(scaled.estimate == doctest::Approx(2.5 * base.estimate + 4.0).epsilon(1e-12));
}

TEST_CASE("worker count does not change the result") {
  const auto a = ss_quantile(first_coordinate, paper_like(5), support::Executor(1));
  const auto b = ss_quantile(first_coordinate, paper_like(5), support::Executor(4));
  CHECK(a.estimate == b.estimate);
  CHECK(a.thresholds == b.thresholds);
  CHECK(a.g_calls == b.g_calls);
  for (std::size_t l = 0; l < a.levels.size(); ++l)
    for (std::size_t i = 0; i < a.levels[l].samples.size(); ++i) CHECK(a.levels[l].samples[i].u == b.levels[l].samples[i].u);
}

TEST_CASE("constant function") {
  auto constant = [](std::span<const double>) { return 3.0; };
  CHECK_THROWS_AS(ss_quantile(constant, paper_like(1)), DegenerateLevel);
  auto c = paper_like(1);
  c.allow_constant = true;
  const auto r = ss_quantile(constant, c);
  CHECK(r.constant);
  CHECK(r.estimate == 3.0);
  CHECK(r.cov_quantile == 0.0);
  const auto d = dmc_quantile(constant, 5, 0.1, 100, SamplingMethod::lhs, 1);
  CHECK(d.estimate == 3.0);
  CHECK(d.cov == 0.0);
}

TEST_CASE("direct sampling quantiles") {
  const auto d = dmc_quantile(first_coordinate, 5, 0.1, 100000, SamplingMethod::lhs, 4);
  CHECK(std::abs(d.estimate - support::normal_quantile(0.1)) < 0.02);
  CHECK(d.evaluations == 100000);
  const auto m = dmc_quantile([](std::span<const double> u) { return u[2] - u[1]; }, 5, 0.5, 2001, SamplingMethod::lhs, 4);
  CHECK(std::abs(m.estimate) < 0.05);
  CHECK_THROWS(dmc_quantile(first_coordinate, 5, 0.001, 100, SamplingMethod::plain, 1));
}

TEST_CASE("modified Metropolis step") {
  CHECK(channel_acceptance(0.0, 1.0) == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
  CHECK(channel_acceptance(1.0, 0.0) == 1.0);

  support::RandomStream rng(1);
  const ChainState start{{-3.0, 0.0, 0.0, 0.0, 0.0}, -3.0};
  // threshold below the current value of every reachable candidate: the chain stays
  int calls = 0;
  auto counted = [&calls](std::span<const double> u) {
    ++calls;
    return u[0];
  };
  for (int i = 0; i < 200; ++i) {
    const auto s = mm_step(start, counted, -1e9, 1.0, rng);
    CHECK(s.next.u == start.u);
    CHECK_FALSE(s.moved);
  }
  CHECK(calls <= 200);

  // an enormous spread rejects every channel, so g is never called
  support::RandomStream far(2);
  const ChainState origin{{0.0, 0.0, 0.0, 0.0, 0.0}, 0.0};
  int skipped = 0;
  for (int i = 0; i < 200; ++i) {
    const auto s = mm_step(origin, counted, 10.0, 1e6, far);
    if (!s.evaluated) {
      ++skipped;
      CHECK(s.next.u == origin.u);
    }
  }
  CHECK(skipped == 200);
}

TEST_CASE("level-2 samples follow the truncated normal") {
  const auto r = ss_quantile(first_coordinate, paper_like(21));
  const double c = r.thresholds[0];
  std::vector<double> x;
  for (const auto& s : r.levels[1].samples) x.push_back(s.u[0]);
  // mean and sd of a standard normal truncated above at c
  const double lambda = support::normal_pdf(c) / support::normal_cdf(c);
  const double truncated_mean = -lambda;
  const double truncated_sd = std::sqrt(1.0 - c * lambda - lambda * lambda);
  // chain correlation inflates the error of the mean; allow for an effective
  // sample size of a fifth
  const double se = truncated_sd / std::sqrt(static_cast<double>(x.size()) / 5.0);
  CHECK(std::abs(support::mean(x) - truncated_mean) < 3.0 * se);
}

TEST_CASE("accuracy diagnostics") {
  CHECK(cov_quantile(0.3, 0.001, 0.01, 30.0) == doctest::Approx(0.001));

  SsConfig one;
  one.target_probability = 0.1;
  one.levels = 1;
  one.samples_per_level = 1000;
  const auto r = ss_quantile(first_coordinate, one);
  CHECK(r.cov_probability == doctest::Approx(std::sqrt(0.9 / 100.0)).epsilon(1e-12));

  const auto full = ss_quantile(first_coordinate, paper_like(8));
  CHECK(full.cov_probability > std::sqrt(3 * 0.9 / 100.0));  // chain correlation only adds
  CHECK(full.density_at_estimate == doctest::Approx(support::normal_pdf(full.estimate)).epsilon(0.35));
  CHECK(full.cov_quantile > 0.005);
  CHECK(full.cov_quantile < 0.05);

  const auto rows = level_histograms(full, 20);
  CHECK(rows.size() == 60);
  std::size_t total = 0;
  for (const auto& row : rows) total += row.count;
  CHECK(total == 3000);
}
