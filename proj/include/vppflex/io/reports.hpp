#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vppflex/curve/supply_curve.hpp"

namespace vppflex::io {

/// One row per grid point: quantity, risk-adjusted cost, the percentile
/// bands, infeasible fraction and the two flags. Non-finite costs print as
/// "inf".
std::string curve_csv(const curve::SupplyCurve& curve);

/// Fan chart: quantity on x, cost on y, outer and inner bands shaded, the
/// risk-adjusted cost as a line. Points with infinite cost are left out.
std::string curve_svg(const curve::SupplyCurve& curve);

std::string sweep_csv(curve::SweepAxis axis, const std::vector<curve::SweepRow>& rows);

std::string histograms_csv(const std::vector<ss::HistogramRow>& rows);

/// Summary of a maximum flexibility run as a JSON object.
std::string max_flex_json(const model::ProductSpec& spec, const curve::MaxFlexibility& result);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace vppflex::io
