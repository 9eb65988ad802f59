#include "vppflex/io/reports.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "vppflex/io/instance_io.hpp"

namespace vppflex::io {

namespace {

std::string band_name(double level) {
  // 0.05 -> p05, 0.5 -> p50, 0.975 -> p97.5
  std::string digits = format_number(std::round(level * 1e8) / 1e6);
  if (level * 100.0 < 10.0) digits = "0" + digits;
  return "p" + digits;
}

}  // namespace

std::string curve_csv(const curve::SupplyCurve& c) {
  std::ostringstream o;
  o << "quantity_kw,cost_chf_per_kw";
  for (double b : c.band_levels) o << "," << band_name(b) << "_chf_per_kw";
  o << ",infeasible_fraction,monotone_violation,excess_infeasibility\n";
  for (const auto& p : c.points) {
    o << format_number(p.quantity) << "," << format_number(p.cost);
    for (double v : p.bands) o << "," << format_number(v);
    o << "," << format_number(p.infeasible_fraction) << "," << (p.monotone_violation ? 1 : 0) << ","
      << (p.excess_infeasibility ? 1 : 0) << "\n";
  }
  return o.str();
}

std::string curve_svg(const curve::SupplyCurve& c) {
  constexpr double W = 640, H = 400, L = 70, R = 20, T = 20, B = 50;
  double y_max = 0.0, y_min = 0.0;
  for (const auto& p : c.points)
    for (double v : p.bands)
      if (std::isfinite(v)) y_max = std::max(y_max, v), y_min = std::min(y_min, v);
  if (y_max == y_min) y_max = y_min + 1.0;
  const double x_max = c.q_max > 0.0 ? c.q_max : 1.0;
  auto sx = [&](double q) { return L + (W - L - R) * q / x_max; };
  auto sy = [&](double v) { return H - B - (H - T - B) * (v - y_min) / (y_max - y_min); };
  auto fmt = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
    << " " << H << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // band k paired with band n-1-k, outermost first
  const std::size_t nb = c.band_levels.size();
  const char* shades[] = {"#c6dbef", "#6baed6", "#2171b5"};
  for (std::size_t k = 0; k < nb / 2; ++k) {
    std::string upper, lower;
    for (const auto& p : c.points) {
      if (!std::isfinite(p.bands[nb - 1 - k]) || !std::isfinite(p.bands[k])) continue;
      upper += fmt(sx(p.quantity)) + "," + fmt(sy(p.bands[nb - 1 - k])) + " ";
    }
    for (auto it = c.points.rbegin(); it != c.points.rend(); ++it) {
      if (!std::isfinite(it->bands[nb - 1 - k]) || !std::isfinite(it->bands[k])) continue;
      lower += fmt(sx(it->quantity)) + "," + fmt(sy(it->bands[k])) + " ";
    }
    o << "<polygon fill=\"" << shades[std::min<std::size_t>(k, 2)] << "\" fill-opacity=\"0.6\" points=\"" << upper
      << lower << "\"/>\n";
  }
  std::string line;
  for (const auto& p : c.points)
    if (std::isfinite(p.cost)) line += fmt(sx(p.quantity)) + "," + fmt(sy(p.cost)) + " ";
  o << "<polyline fill=\"none\" stroke=\"#08306b\" stroke-width=\"2\" points=\"" << line << "\"/>\n";

  // axes with end labels
  o << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
    << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  o << "<text x=\"" << L << "\" y=\"" << H - B + 18 << "\" font-size=\"12\">0</text>\n";
  o << "<text x=\"" << W - R << "\" y=\"" << H - B + 18 << "\" font-size=\"12\" text-anchor=\"end\">"
    << fmt(x_max) << "</text>\n";
  o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10
    << "\" font-size=\"13\" text-anchor=\"middle\">quantity (kW)</text>\n";
  o << "<text x=\"" << L - 6 << "\" y=\"" << sy(y_max) + 4 << "\" font-size=\"12\" text-anchor=\"end\">" << fmt(y_max)
    << "</text>\n";
  o << "<text x=\"" << L - 6 << "\" y=\"" << sy(y_min) + 4 << "\" font-size=\"12\" text-anchor=\"end\">" << fmt(y_min)
    << "</text>\n";
  o << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << (T + H - B) / 2 << ")\">cost (CHF/kW)</text>\n";
  o << "</svg>\n";
  return o.str();
}

std::string sweep_csv(curve::SweepAxis axis, const std::vector<curve::SweepRow>& rows) {
  std::ostringstream o;
  o << to_string(axis) << ",ok,q_max_kw,cov_quantile,evaluations,error\n";
  for (const auto& r : rows) {
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    o << format_number(r.value) << "," << (r.ok ? 1 : 0) << "," << format_number(r.q_max) << ","
      << format_number(r.cov_quantile) << "," << r.evaluations << "," << err << "\n";
  }
  return o.str();
}

std::string histograms_csv(const std::vector<ss::HistogramRow>& rows) {
  std::ostringstream o;
  o << "level,lower_kw,upper_kw,count\n";
  for (const auto& r : rows)
    o << r.level << "," << format_number(r.lower) << "," << format_number(r.upper) << "," << r.count << "\n";
  return o.str();
}

std::string max_flex_json(const model::ProductSpec& spec, const curve::MaxFlexibility& mf) {
  auto finite = [](double v) -> nlohmann::ordered_json {
    if (std::isfinite(v)) return v;
    return nullptr;
  };
  nlohmann::ordered_json j;
  j["direction"] = std::string(model::to_string(spec.direction));
  j["reliability"] = spec.reliability;
  j["q_max_kw"] = mf.q_max;
  j["infeasible_at_quantile"] = mf.infeasible_at_quantile;
  j["estimate_kw"] = finite(mf.ss.estimate);
  auto& t = j["thresholds_kw"] = nlohmann::ordered_json::array();
  for (double v : mf.ss.thresholds) t.push_back(finite(v));
  j["levels"] = mf.ss.levels.size();
  j["level_probability"] = mf.ss.level_probability;
  j["evaluations"] = mf.ss.evaluations;
  j["g_calls"] = mf.ss.g_calls;
  j["cov_probability"] = finite(mf.ss.cov_probability);
  j["cov_quantile"] = finite(mf.ss.cov_quantile);
  j["constant"] = mf.ss.constant;
  return j.dump(2) + "\n";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace vppflex::io
