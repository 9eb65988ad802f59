#include "vppflex/io/instance_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <map>
#include <set>
#include <sstream>

namespace vppflex::io {

using Json = nlohmann::ordered_json;

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path.filename().string(), "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(path.filename().string(), "cannot write " + path.string());
  out << text;
}

Json parse_json(const std::string& file, const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    // the library message carries line and column
    throw InputError(file, e.what());
  }
}

/// Reads the keys of one JSON object and rejects any it was not asked for.
class Fields {
 public:
  Fields(const Json& obj, std::string file, std::string path) : obj_(obj), file_(std::move(file)), path_(std::move(path)) {
    if (!obj_.is_object()) fail(path_, "expected an object");
  }

  double number(const char* key) {
    const Json& v = need(key);
    if (!v.is_number()) fail(at(key), "expected a number");
    return v.get<double>();
  }
  double number(const char* key, double fallback) { return has(key) ? number(key) : fallback; }

  std::size_t count(const char* key) {
    const Json& v = need(key);
    if (!v.is_number_unsigned()) fail(at(key), "expected a non-negative integer");
    return v.get<std::size_t>();
  }

  int integer(const char* key, int fallback) {
    if (!has(key)) return fallback;
    const Json& v = need(key);
    if (!v.is_number_integer()) fail(at(key), "expected an integer");
    return v.get<int>();
  }

  bool flag(const char* key, bool fallback) {
    if (!has(key)) return fallback;
    const Json& v = need(key);
    if (!v.is_boolean()) fail(at(key), "expected true or false");
    return v.get<bool>();
  }

  std::string text(const char* key) {
    const Json& v = need(key);
    if (!v.is_string()) fail(at(key), "expected a string");
    return v.get<std::string>();
  }
  std::string text(const char* key, std::string fallback) { return has(key) ? text(key) : std::move(fallback); }

  std::vector<std::string> texts(const char* key) {
    const Json& v = need(key);
    if (!v.is_array()) fail(at(key), "expected an array of strings");
    std::vector<std::string> out;
    for (const auto& e : v) {
      if (!e.is_string()) fail(at(key), "expected an array of strings");
      out.push_back(e.get<std::string>());
    }
    return out;
  }

  /// Members of an object keyed by id, in file order; empty when absent.
  std::vector<std::pair<std::string, const Json*>> keyed(const char* key) {
    std::vector<std::pair<std::string, const Json*>> out;
    if (!has(key)) return out;
    const Json& v = need(key);
    if (!v.is_object()) fail(at(key), "expected an object keyed by id");
    for (auto it = v.begin(); it != v.end(); ++it) out.emplace_back(it.key(), &it.value());
    return out;
  }

  bool has(const char* key) const { return obj_.contains(key); }

  void done() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it)
      if (!used_.count(it.key())) fail(at(it.key()), "unknown key");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  [[noreturn]] void fail(const std::string& where, const std::string& what) const {
    throw InputError(file_, (where.empty() ? std::string("top level") : where) + ": " + what);
  }

 private:
  const Json& need(const char* key) {
    if (!obj_.contains(key)) fail(at(key), "missing");
    used_.insert(key);
    return obj_.at(key);
  }

  const Json& obj_;
  std::string file_, path_;
  std::set<std::string> used_;
};

model::StorageParams read_storage(Fields& f) {
  model::StorageParams st;
  st.soc_ini = f.number("soc_ini");
  st.soc_min = f.number("soc_min", st.soc_min);
  st.soc_max = f.number("soc_max", st.soc_max);
  st.capacity_kwh = f.number("capacity_kwh");
  st.p_max_ch_kw = f.number("p_max_ch_kw");
  st.p_max_dis_kw = f.number("p_max_dis_kw");
  st.eta_ch = f.number("eta_ch", st.eta_ch);
  st.eta_dis = f.number("eta_dis", st.eta_dis);
  st.q_min_kvar = f.number("q_min_kvar", st.q_min_kvar);
  st.q_max_kvar = f.number("q_max_kvar", st.q_max_kvar);
  st.ramp_down_kw_per_min = f.number("ramp_down_kw_per_min");
  st.ramp_up_kw_per_min = f.number("ramp_up_kw_per_min");
  st.cost_p = f.number("cost_p", 0.0);
  st.cost_q = f.number("cost_q", 0.0);
  return st;
}

void write_storage(Json& j, const model::StorageParams& st) {
  j["soc_ini"] = st.soc_ini;
  j["soc_min"] = st.soc_min;
  j["soc_max"] = st.soc_max;
  j["capacity_kwh"] = st.capacity_kwh;
  j["p_max_ch_kw"] = st.p_max_ch_kw;
  j["p_max_dis_kw"] = st.p_max_dis_kw;
  j["eta_ch"] = st.eta_ch;
  j["eta_dis"] = st.eta_dis;
  j["q_min_kvar"] = st.q_min_kvar;
  j["q_max_kvar"] = st.q_max_kvar;
  j["ramp_down_kw_per_min"] = st.ramp_down_kw_per_min;
  j["ramp_up_kw_per_min"] = st.ramp_up_kw_per_min;
  j["cost_p"] = st.cost_p;
  j["cost_q"] = st.cost_q;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

/// Comma-separated table with a header line. Blank lines are skipped; every
/// data row must have as many cells as the header.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> lines;  // source line of each row
};

Table read_table(const std::string& file, const std::string& text) {
  Table t;
  std::istringstream in(text);
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    const auto body = trim(line);
    if (body.empty()) continue;
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    for (;;) {
      const auto comma = body.find(',', start);
      cells.push_back(trim(body.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (t.header.empty()) {
      for (auto c : cells) t.header.emplace_back(c);
      continue;
    }
    const std::string where = "line " + std::to_string(no);
    if (cells.size() != t.header.size())
      throw InputError(file, where + ": expected " + std::to_string(t.header.size()) + " columns, found " +
                                 std::to_string(cells.size()));
    std::vector<double> row;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v = 0.0;
      const auto cell = cells[c];
      const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || end != cell.data() + cell.size() || cell.empty())
        throw InputError(file, where + ", column '" + t.header[c] + "': not a number: '" + std::string(cell) + "'");
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
    t.lines.push_back(no);
  }
  if (t.header.empty()) throw InputError(file, "empty file");
  return t;
}

/// Checks the hour column and the row count against the horizon.
void check_hours(const std::string& file, const Table& t, std::size_t horizon) {
  if (t.header.front() != "hour") throw InputError(file, "line 1: first column must be 'hour'");
  if (t.rows.size() != horizon)
    throw InputError(file, "expected " + std::to_string(horizon) + " data rows, found " + std::to_string(t.rows.size()));
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    if (t.rows[r][0] != static_cast<double>(r))
      throw InputError(file, "line " + std::to_string(t.lines[r]) + ": hour must be " + std::to_string(r));
}

void read_network(model::VppInstance& inst, const std::string& text) {
  const Json j = parse_json(kNetworkFile, text);
  Fields f(j, kNetworkFile, "");
  inst.name = f.text("name", "");
  inst.step_h = f.number("step_h", 1.0);
  inst.horizon_steps = f.count("horizon_steps");
  inst.network.s_base_kva = f.number("s_base_kva");
  inst.network.n_seg = f.integer("n_seg", inst.network.n_seg);
  for (const auto& [id, obj] : f.keyed("buses")) {
    Fields b(*obj, kNetworkFile, "buses." + id);
    model::Bus bus;
    bus.id = id;
    bus.v_min = b.number("v_min", bus.v_min);
    bus.v_max = b.number("v_max", bus.v_max);
    bus.slack = b.flag("slack", false);
    b.done();
    inst.network.buses.push_back(std::move(bus));
  }
  for (const auto& [id, obj] : f.keyed("branches")) {
    Fields b(*obj, kNetworkFile, "branches." + id);
    model::Branch br;
    br.id = id;
    br.from = b.text("from");
    br.to = b.text("to");
    br.r = b.number("r");
    br.x = b.number("x");
    br.s_max = b.number("s_max");
    b.done();
    inst.network.branches.push_back(std::move(br));
  }
  f.done();
}

void read_ders(model::VppInstance& inst, const std::string& text) {
  const Json j = parse_json(kDersFile, text);
  Fields f(j, kDersFile, "");
  for (const auto& [id, obj] : f.keyed("generators")) {
    Fields d(*obj, kDersFile, "generators." + id);
    model::Generator g;
    g.id = id;
    g.bus = d.text("bus");
    g.p_nom_kw = d.number("p_nom_kw");
    g.q_nom_kvar = d.number("q_nom_kvar");
    g.ramp_down_kw_per_min = d.number("ramp_down_kw_per_min");
    g.ramp_up_kw_per_min = d.number("ramp_up_kw_per_min");
    g.cost_p = d.number("cost_p", 0.0);
    g.cost_q = d.number("cost_q", 0.0);
    d.done();
    inst.generators.push_back(std::move(g));
  }
  for (const auto& [id, obj] : f.keyed("heat_pumps")) {
    Fields d(*obj, kDersFile, "heat_pumps." + id);
    model::HeatPump hp;
    hp.id = id;
    hp.bus = d.text("bus");
    hp.p_min_kw = d.number("p_min_kw");
    hp.p_max_kw = d.number("p_max_kw");
    hp.q_min_kvar = d.number("q_min_kvar", 0.0);
    hp.q_max_kvar = d.number("q_max_kvar", 0.0);
    hp.cop = d.number("cop");
    hp.c_th_kwh_per_k = d.number("c_th_kwh_per_k");
    hp.r_th_k_per_kw = d.number("r_th_k_per_kw");
    hp.t_min_c = d.number("t_min_c");
    hp.t_max_c = d.number("t_max_c");
    hp.t_target_c = d.number("t_target_c");
    hp.ramp_down_kw_per_min = d.number("ramp_down_kw_per_min");
    hp.ramp_up_kw_per_min = d.number("ramp_up_kw_per_min");
    hp.cost_q = d.number("cost_q", 0.0);
    hp.cost_t = d.number("cost_t", 0.0);
    d.done();
    inst.heat_pumps.push_back(std::move(hp));
  }
  for (const auto& [id, obj] : f.keyed("ev_events")) {
    Fields d(*obj, kDersFile, "ev_events." + id);
    model::EvChargingEvent ev;
    ev.id = id;
    ev.bus = d.text("bus");
    ev.arrival_step = d.count("arrival_step");
    ev.departure_step = d.count("departure_step");
    ev.r_ch_min_kw = d.number("r_ch_min_kw", 0.0);
    ev.storage = read_storage(d);
    d.done();
    inst.ev_events.push_back(std::move(ev));
  }
  for (const auto& [id, obj] : f.keyed("batteries")) {
    Fields d(*obj, kDersFile, "batteries." + id);
    model::Battery b;
    b.id = id;
    b.bus = d.text("bus");
    b.storage = read_storage(d);
    d.done();
    inst.batteries.push_back(std::move(b));
  }
  for (const auto& [id, obj] : f.keyed("loads")) {
    Fields d(*obj, kDersFile, "loads." + id);
    model::FixedLoad l;
    l.id = id;
    l.bus = d.text("bus");
    l.power_factor = d.number("power_factor", l.power_factor);
    d.done();
    inst.loads.push_back(std::move(l));
  }
  f.done();
}

void read_profiles(model::VppInstance& inst, const std::string& text) {
  const auto t = read_table(kProfilesFile, text);
  check_hours(kProfilesFile, t, inst.horizon_steps);
  std::map<std::string, std::vector<double>*> target;
  auto claim = [&](const std::string& id, std::vector<double>& v) {
    if (!target.emplace(id, &v).second) throw InputError(kDersFile, "duplicate id '" + id + "' among profiled DERs");
  };
  for (auto& g : inst.generators) claim(g.id, g.capacity_factor);
  for (auto& h : inst.heat_pumps) claim(h.id, h.ambient_c);
  for (auto& l : inst.loads) claim(l.id, l.p_kw);
  std::set<std::string> seen;
  for (std::size_t c = 1; c < t.header.size(); ++c) {
    const auto& id = t.header[c];
    const auto it = target.find(id);
    if (it == target.end()) throw InputError(kProfilesFile, "line 1: column '" + id + "' names no generator, heat pump or load");
    if (!seen.insert(id).second) throw InputError(kProfilesFile, "line 1: duplicate column '" + id + "'");
    auto& v = *it->second;
    v.clear();
    for (const auto& row : t.rows) v.push_back(row[c]);
  }
  for (const auto& [id, v] : target)
    if (!seen.count(id)) throw InputError(kProfilesFile, "line 1: no column for '" + id + "'");
}

void read_prices(model::VppInstance& inst, const std::string& text) {
  const auto t = read_table(kPricesFile, text);
  check_hours(kPricesFile, t, inst.horizon_steps);
  if (t.header != std::vector<std::string>{"hour", "market", "tariff"})
    throw InputError(kPricesFile, "line 1: expected columns hour,market,tariff");
  inst.prices.market.clear();
  inst.prices.tariff.clear();
  for (const auto& row : t.rows) {
    inst.prices.market.push_back(row[1]);
    inst.prices.tariff.push_back(row[2]);
  }
}

void read_metering(model::VppInstance& inst, const std::string& text) {
  const Json j = parse_json(kMeteringFile, text);
  if (!j.is_object()) throw InputError(kMeteringFile, "top level: expected an object keyed by area id");
  for (auto it = j.begin(); it != j.end(); ++it) {
    Fields a(it.value(), kMeteringFile, it.key());
    model::MeteringArea area;
    area.id = it.key();
    area.bus = a.text("bus", "");
    area.members = a.texts("members");
    a.done();
    inst.metering_areas.push_back(std::move(area));
  }
}

std::string table_text(const std::vector<std::string>& header, const std::vector<const std::vector<double>*>& cols,
                       std::size_t rows) {
  std::string out;
  for (std::size_t c = 0; c < header.size(); ++c) out += (c ? "," : "") + header[c];
  out += "\n";
  for (std::size_t r = 0; r < rows; ++r) {
    out += std::to_string(r);
    for (const auto* col : cols) out += "," + format_number(r < col->size() ? (*col)[r] : 0.0);
    out += "\n";
  }
  return out;
}

}  // namespace

InvalidInstance::InvalidInstance(model::ValidationReport report)
    : std::runtime_error([&] {
        for (const auto& i : report.issues)
          if (i.severity == model::Severity::error) return "invalid instance: " + i.code + ": " + i.message;
        return std::string("invalid instance");
      }()),
      report_(std::move(report)) {}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, end);
}

model::VppInstance read_instance(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw InputError(dir.string(), "not a directory");
  model::VppInstance inst;
  read_network(inst, read_file(dir / kNetworkFile));
  read_ders(inst, read_file(dir / kDersFile));
  read_profiles(inst, read_file(dir / kProfilesFile));
  read_prices(inst, read_file(dir / kPricesFile));
  read_metering(inst, read_file(dir / kMeteringFile));
  return inst;
}

model::VppInstance load_instance(const std::filesystem::path& dir) {
  auto inst = read_instance(dir);
  auto report = model::validate_instance(inst);
  if (!report.ok()) throw InvalidInstance(std::move(report));
  return inst;
}

std::string network_json(const model::VppInstance& inst) {
  Json j;
  j["name"] = inst.name;
  j["step_h"] = inst.step_h;
  j["horizon_steps"] = inst.horizon_steps;
  j["s_base_kva"] = inst.network.s_base_kva;
  j["n_seg"] = inst.network.n_seg;
  j["buses"] = Json::object();
  for (const auto& b : inst.network.buses) j["buses"][b.id] = {{"v_min", b.v_min}, {"v_max", b.v_max}, {"slack", b.slack}};
  j["branches"] = Json::object();
  for (const auto& br : inst.network.branches)
    j["branches"][br.id] = {{"from", br.from}, {"to", br.to}, {"r", br.r}, {"x", br.x}, {"s_max", br.s_max}};
  return j.dump(2) + "\n";
}

std::string ders_json(const model::VppInstance& inst) {
  Json j = Json::object();
  if (!inst.generators.empty()) j["generators"] = Json::object();
  for (const auto& g : inst.generators)
    j["generators"][g.id] = {{"bus", g.bus},
                             {"p_nom_kw", g.p_nom_kw},
                             {"q_nom_kvar", g.q_nom_kvar},
                             {"ramp_down_kw_per_min", g.ramp_down_kw_per_min},
                             {"ramp_up_kw_per_min", g.ramp_up_kw_per_min},
                             {"cost_p", g.cost_p},
                             {"cost_q", g.cost_q}};
  if (!inst.heat_pumps.empty()) j["heat_pumps"] = Json::object();
  for (const auto& hp : inst.heat_pumps)
    j["heat_pumps"][hp.id] = {{"bus", hp.bus},
                              {"p_min_kw", hp.p_min_kw},
                              {"p_max_kw", hp.p_max_kw},
                              {"q_min_kvar", hp.q_min_kvar},
                              {"q_max_kvar", hp.q_max_kvar},
                              {"cop", hp.cop},
                              {"c_th_kwh_per_k", hp.c_th_kwh_per_k},
                              {"r_th_k_per_kw", hp.r_th_k_per_kw},
                              {"t_min_c", hp.t_min_c},
                              {"t_max_c", hp.t_max_c},
                              {"t_target_c", hp.t_target_c},
                              {"ramp_down_kw_per_min", hp.ramp_down_kw_per_min},
                              {"ramp_up_kw_per_min", hp.ramp_up_kw_per_min},
                              {"cost_q", hp.cost_q},
                              {"cost_t", hp.cost_t}};
  if (!inst.ev_events.empty()) j["ev_events"] = Json::object();
  for (const auto& ev : inst.ev_events) {
    Json e = {{"bus", ev.bus},
              {"arrival_step", ev.arrival_step},
              {"departure_step", ev.departure_step},
              {"r_ch_min_kw", ev.r_ch_min_kw}};
    write_storage(e, ev.storage);
    j["ev_events"][ev.id] = std::move(e);
  }
  if (!inst.batteries.empty()) j["batteries"] = Json::object();
  for (const auto& b : inst.batteries) {
    Json e = {{"bus", b.bus}};
    write_storage(e, b.storage);
    j["batteries"][b.id] = std::move(e);
  }
  if (!inst.loads.empty()) j["loads"] = Json::object();
  for (const auto& l : inst.loads) j["loads"][l.id] = {{"bus", l.bus}, {"power_factor", l.power_factor}};
  return j.dump(2) + "\n";
}

std::string profiles_csv(const model::VppInstance& inst) {
  std::vector<std::string> header{"hour"};
  std::vector<const std::vector<double>*> cols;
  for (const auto& g : inst.generators) header.push_back(g.id), cols.push_back(&g.capacity_factor);
  for (const auto& h : inst.heat_pumps) header.push_back(h.id), cols.push_back(&h.ambient_c);
  for (const auto& l : inst.loads) header.push_back(l.id), cols.push_back(&l.p_kw);
  return table_text(header, cols, inst.horizon_steps);
}

std::string prices_csv(const model::VppInstance& inst) {
  return table_text({"hour", "market", "tariff"}, {&inst.prices.market, &inst.prices.tariff}, inst.horizon_steps);
}

std::string metering_json(const model::VppInstance& inst) {
  Json j = Json::object();
  for (const auto& a : inst.metering_areas) j[a.id] = {{"bus", a.bus}, {"members", a.members}};
  return j.dump(2) + "\n";
}

void save_instance(const model::VppInstance& inst, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir / kNetworkFile, network_json(inst));
  write_file(dir / kDersFile, ders_json(inst));
  write_file(dir / kProfilesFile, profiles_csv(inst));
  write_file(dir / kPricesFile, prices_csv(inst));
  write_file(dir / kMeteringFile, metering_json(inst));
}

}  // namespace vppflex::io
