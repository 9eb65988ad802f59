#include "vppflex/io/run_config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "vppflex/io/instance_io.hpp"

namespace vppflex::io {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_number(std::string_view s, double& v) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && end == s.data() + s.size();
}

/// Drops a trailing # comment that is not inside a string.
std::string_view strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '\\' && quoted) {
      ++i;
    } else if (line[i] == '"') {
      quoted = !quoted;
    } else if (line[i] == '#' && !quoted) {
      return line.substr(0, i);
    }
  }
  return line;
}

ConfigValue parse_value(std::string_view raw, const std::string& where) {
  const auto s = trim(raw);
  if (s.empty()) throw ConfigError(where + ": missing value");
  if (s == "true") return true;
  if (s == "false") return false;
  if (s.front() == '"') {
    std::string out;
    std::size_t i = 1;
    for (; i < s.size() && s[i] != '"'; ++i) {
      if (s[i] == '\\' && i + 1 < s.size()) ++i;
      out += s[i];
    }
    if (i + 1 != s.size()) throw ConfigError(where + ": unterminated or trailing text after string");
    return out;
  }
  if (s.front() == '[') {
    if (s.back() != ']') throw ConfigError(where + ": unterminated array");
    std::vector<double> out;
    auto body = trim(s.substr(1, s.size() - 2));
    while (!body.empty()) {
      const auto comma = body.find(',');
      const auto item = trim(body.substr(0, comma));
      double v = 0.0;
      if (!parse_number(item, v)) throw ConfigError(where + ": array items must be numbers");
      out.push_back(v);
      if (comma == std::string_view::npos) break;
      body = trim(body.substr(comma + 1));
    }
    return out;
  }
  double v = 0.0;
  if (!parse_number(s, v)) throw ConfigError(where + ": cannot read value '" + std::string(s) + "'");
  return v;
}

bool valid_key(std::string_view k) {
  if (k.empty()) return false;
  for (char c : k)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
  return true;
}

/// Typed access to the parsed map; remembers which keys were read.
class Reader {
 public:
  explicit Reader(const std::map<std::string, ConfigValue>& values) : values_(values) {}

  template <class T>
  const T* get(const std::string& key) {
    const auto it = values_.find(key);
    if (it == values_.end()) return nullptr;
    used_.insert(key);
    const T* v = std::get_if<T>(&it->second);
    if (!v) throw ConfigError(key + ": " + expected<T>());
    return v;
  }

  void number(const std::string& key, double& out) {
    if (const auto* v = get<double>(key)) out = *v;
  }

  template <class Int>
  void count(const std::string& key, Int& out) {
    if (const auto* v = get<double>(key)) {
      if (*v < 0.0 || *v != std::floor(*v) || *v > 9007199254740992.0)
        throw ConfigError(key + ": expected a non-negative integer below 2^53");
      out = static_cast<Int>(*v);
    }
  }

  void flag(const std::string& key, bool& out) {
    if (const auto* v = get<bool>(key)) out = *v;
  }

  void unknown_keys() const {
    for (const auto& [k, v] : values_)
      if (!used_.count(k)) throw ConfigError(k + ": unknown key");
  }

 private:
  template <class T>
  static const char* expected() {
    if constexpr (std::is_same_v<T, bool>) return "expected true or false";
    if constexpr (std::is_same_v<T, double>) return "expected a number";
    if constexpr (std::is_same_v<T, std::string>) return "expected a quoted string";
    return "expected an array of numbers";
  }

  const std::map<std::string, ConfigValue>& values_;
  std::set<std::string> used_;
};

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::map<std::string, ConfigValue> parse_config_text(const std::string& text) {
  std::map<std::string, ConfigValue> out;
  std::istringstream in(text);
  std::string line, section;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    const std::string where = "line " + std::to_string(no);
    const auto body = trim(strip_comment(line));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') throw ConfigError(where + ": malformed section header");
      section = std::string(trim(body.substr(1, body.size() - 2)));
      if (!valid_key(section)) throw ConfigError(where + ": malformed section name");
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + ": expected key = value");
    const auto key = trim(body.substr(0, eq));
    if (!valid_key(key)) throw ConfigError(where + ": malformed key");
    const std::string full = section.empty() ? std::string(key) : section + "." + std::string(key);
    if (out.count(full)) throw ConfigError(where + ": duplicate key '" + full + "'");
    out.emplace(full, parse_value(body.substr(eq + 1), where + " (" + full + ")"));
  }
  return out;
}

std::vector<std::string> RunConfig::check() const {
  std::vector<std::string> out;
  if (!seed) out.push_back("seed: required (give it in the config or with --seed)");
  if (workers == 0) out.push_back("workers: must be at least 1");
  for (auto& m : product.check()) out.push_back("product: " + m);
  for (auto& m : uncertainty.check()) out.push_back("uncertainty: " + m);
  auto ss_cfg = ss;
  ss_cfg.target_probability = product.alpha();
  if (product.check().empty())
    for (auto& m : ss_cfg.check()) out.push_back("ss: " + m);
  for (auto& m : sweep.check()) out.push_back("curve: " + m);
  return out;
}

RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base) {
  const auto values = parse_config_text(text);
  Reader r(values);
  RunConfig cfg;

  if (const auto* s = r.get<std::string>("instance")) cfg.instance_dir = base / *s;
  if (const auto* s = r.get<std::string>("out")) cfg.out_dir = base / *s;
  if (values.count("seed")) {
    std::uint64_t seed = 0;
    r.count("seed", seed);
    cfg.seed = seed;
  }
  r.count("workers", cfg.workers);

  auto& p = cfg.product;
  if (const auto* s = r.get<std::string>("product.direction")) {
    const auto d = model::parse_direction(*s);
    if (!d) throw ConfigError("product.direction: expected upward, downward or symmetrical");
    p.direction = *d;
  }
  r.number("product.delivery_start_h", p.delivery_start_h);
  r.number("product.duration_h", p.duration_h);
  r.number("product.ramp_time_min", p.ramp_time_min);
  r.number("product.reliability", p.reliability);
  r.number("product.lead_time_h", p.lead_time_h);
  r.number("product.step_h", p.step_h);

  auto& u = cfg.uncertainty;
  r.number("uncertainty.sigma_load", u.sigma_load);
  r.number("uncertainty.sigma_generation", u.sigma_generation);
  r.number("uncertainty.sigma_temperature_k", u.sigma_temperature_k);
  r.number("uncertainty.sigma_price_chf_per_mwh", u.sigma_price_chf_per_mwh);
  r.number("uncertainty.ev_disruption_min", u.ev_disruption_min);
  r.number("uncertainty.ev_disruption_max", u.ev_disruption_max);

  auto& s = cfg.ss;
  r.count("ss.levels", s.levels);
  r.number("ss.level_probability", s.level_probability);
  r.count("ss.samples_per_level", s.samples_per_level);
  r.number("ss.proposal_spread", s.proposal_spread);
  if (const auto* m = r.get<std::string>("ss.first_level")) {
    if (*m == "lhs") {
      s.first_level = scenario::SamplingMethod::lhs;
    } else if (*m == "plain") {
      s.first_level = scenario::SamplingMethod::plain;
    } else {
      throw ConfigError("ss.first_level: expected \"lhs\" or \"plain\"");
    }
  }

  auto& c = cfg.sweep;
  r.count("curve.steps", c.steps);
  r.count("curve.samples", c.samples);
  r.number("curve.risk_level", c.risk_level);
  if (const auto* b = r.get<std::vector<double>>("curve.bands")) c.bands = *b;

  r.flag("output.histograms", cfg.emit.histograms);
  r.flag("output.svg", cfg.emit.svg);
  r.flag("output.lp_dump", cfg.emit.lp_dump);

  r.unknown_keys();
  if (cfg.seed) cfg.ss.seed = *cfg.seed;
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("cannot open config " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_run_config(ss.str(), file.parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(file.filename().string() + ": " + e.what());
  }
}

std::string to_text(const RunConfig& cfg) {
  std::ostringstream o;
  auto num = [](double v) { return format_number(v); };
  if (!cfg.instance_dir.empty()) o << "instance = " << quoted(cfg.instance_dir.string()) << "\n";
  o << "out = " << quoted(cfg.out_dir.string()) << "\n";
  if (cfg.seed) o << "seed = " << *cfg.seed << "\n";
  o << "workers = " << cfg.workers << "\n";
  const auto& p = cfg.product;
  o << "\n[product]\n"
    << "direction = " << quoted(std::string(model::to_string(p.direction))) << "\n"
    << "delivery_start_h = " << num(p.delivery_start_h) << "\n"
    << "duration_h = " << num(p.duration_h) << "\n"
    << "ramp_time_min = " << num(p.ramp_time_min) << "\n"
    << "reliability = " << num(p.reliability) << "\n"
    << "lead_time_h = " << num(p.lead_time_h) << "\n"
    << "step_h = " << num(p.step_h) << "\n";
  const auto& u = cfg.uncertainty;
  o << "\n[uncertainty]\n"
    << "sigma_load = " << num(u.sigma_load) << "\n"
    << "sigma_generation = " << num(u.sigma_generation) << "\n"
    << "sigma_temperature_k = " << num(u.sigma_temperature_k) << "\n"
    << "sigma_price_chf_per_mwh = " << num(u.sigma_price_chf_per_mwh) << "\n"
    << "ev_disruption_min = " << num(u.ev_disruption_min) << "\n"
    << "ev_disruption_max = " << num(u.ev_disruption_max) << "\n";
  const auto& s = cfg.ss;
  o << "\n[ss]\n"
    << "levels = " << s.levels << "\n"
    << "level_probability = " << num(s.level_probability) << "\n"
    << "samples_per_level = " << s.samples_per_level << "\n"
    << "proposal_spread = " << num(s.proposal_spread) << "\n"
    << "first_level = " << (s.first_level == scenario::SamplingMethod::lhs ? "\"lhs\"" : "\"plain\"") << "\n";
  const auto& c = cfg.sweep;
  o << "\n[curve]\n"
    << "steps = " << c.steps << "\n"
    << "samples = " << c.samples << "\n"
    << "risk_level = " << num(c.risk_level) << "\n"
    << "bands = [";
  for (std::size_t i = 0; i < c.bands.size(); ++i) o << (i ? ", " : "") << num(c.bands[i]);
  o << "]\n";
  o << "\n[output]\n"
    << "histograms = " << (cfg.emit.histograms ? "true" : "false") << "\n"
    << "svg = " << (cfg.emit.svg ? "true" : "false") << "\n"
    << "lp_dump = " << (cfg.emit.lp_dump ? "true" : "false") << "\n";
  return o.str();
}

}  // namespace vppflex::io
