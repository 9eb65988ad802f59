#include "vppflex/support/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

namespace vppflex::support {

namespace {
const boost::math::normal_distribution<double> kStandardNormal{0.0, 1.0};
}

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile: p must lie in (0,1)");
  return boost::math::quantile(kStandardNormal, p);
}

std::size_t quantile_rank(std::size_t n, double p) {
  if (n == 0) throw std::invalid_argument("quantile_rank: empty sample");
  const double scaled = static_cast<double>(n) * p;
  auto k = static_cast<std::size_t>(std::ceil(scaled - 1e-9 * std::max(1.0, scaled)));
  return std::clamp<std::size_t>(k, 1, n);
}

std::vector<std::size_t> stable_order(std::span<const double> values) {
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  return idx;
}

double empirical_quantile(std::span<const double> values, double p) {
  const auto order = stable_order(values);
  return values[order[quantile_rank(values.size(), p) - 1]];
}

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double sample_stddev(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

namespace {
std::vector<double> finite_sorted(std::span<const double> values) {
  std::vector<double> out;
  out.reserve(values.size());
  for (double v : values)
    if (std::isfinite(v)) out.push_back(v);
  std::sort(out.begin(), out.end());
  return out;
}

double sorted_quantile(const std::vector<double>& s, double p) {
  // linear interpolation between order statistics, only used for the IQR
  const double pos = p * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
}
}  // namespace

double silverman_bandwidth(std::span<const double> values) {
  const auto s = finite_sorted(values);
  if (s.size() < 2) return 0.0;
  const double sd = sample_stddev(s);
  const double iqr = sorted_quantile(s, 0.75) - sorted_quantile(s, 0.25);
  double spread = std::min(sd, iqr / 1.34);
  if (spread <= 0.0) spread = sd;
  return 0.9 * spread * std::pow(static_cast<double>(s.size()), -0.2);
}

double gaussian_kde(std::span<const double> values, double x) {
  const double h = silverman_bandwidth(values);
  if (h <= 0.0) return 0.0;
  double acc = 0.0;
  std::size_t n = 0;
  for (double v : values) {
    if (!std::isfinite(v)) continue;
    acc += normal_pdf((x - v) / h);
    ++n;
  }
  return acc / (static_cast<double>(n) * h);
}

}  // namespace vppflex::support
