#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace vppflex::support {

/// Standard normal pdf, cdf and quantile.
double normal_pdf(double x);
double normal_cdf(double x);
double normal_quantile(double p);

/// Rank (1-based) of the empirical p-quantile in a sample of size n: the
/// smallest k with k/n >= p. A small slack absorbs round-off in n*p.
std::size_t quantile_rank(std::size_t n, double p);

/// Empirical p-quantile as the order statistic of rank quantile_rank(n, p).
/// Non-finite values take part in the ordering (-inf sorts first).
double empirical_quantile(std::span<const double> values, double p);

/// Indices that sort `values` ascending, ties broken by index.
std::vector<std::size_t> stable_order(std::span<const double> values);

double mean(std::span<const double> values);
double sample_stddev(std::span<const double> values);

/// Silverman's rule-of-thumb bandwidth. Returns 0 for a degenerate sample.
double silverman_bandwidth(std::span<const double> values);

/// Gaussian kernel density estimate at x over the finite entries of values.
double gaussian_kde(std::span<const double> values, double x);

}  // namespace vppflex::support
