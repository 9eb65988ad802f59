#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <random>
#include <sstream>

#include "common/random_instances.hpp"
#include "vppflex/io/cli.hpp"
#include "vppflex/io/instance_io.hpp"
#include "vppflex/io/reports.hpp"
#include "vppflex/io/run_config.hpp"

using namespace vppflex;
using namespace vppflex::testing;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = fs::path(VPPFLEX_DATA_DIR) / "fixtures";

/// Fresh scratch directory per test, removed on exit.
struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& tag) : dir(fs::temp_directory_path() / ("vppflex_io_" + tag)) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

std::string all_text(const model::VppInstance& inst) {
  return io::network_json(inst) + io::ders_json(inst) + io::profiles_csv(inst) + io::prices_csv(inst) +
         io::metering_json(inst);
}

struct CliRun {
  int code;
  std::string out, err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "vppflex");
  std::ostringstream out, err;
  const int code = io::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

/// Copy of a fixture that a test may break.
fs::path copy_fixture(const std::string& name, const fs::path& into) {
  const auto dst = into / name;
  fs::copy(kFixtures / name, dst, fs::copy_options::recursive);
  return dst;
}

std::string input_error(const fs::path& dir) {
  try {
    io::read_instance(dir);
  } catch (const io::InputError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("bundled fixtures load and validate") {
  for (const char* name : {"toy3", "desk5", "fourprice"}) {
    CAPTURE(name);
    const auto inst = io::load_instance(kFixtures / name);
    CHECK(inst.name == name);
    CHECK(model::validate_instance(inst).ok());
    const auto cfg = io::load_run_config(kFixtures / name / "run.toml");
    CHECK(cfg.check().empty());
    CHECK(model::validate_product(inst, cfg.product).ok());
  }
  const auto four = io::load_instance(kFixtures / "fourprice");
  REQUIRE(four.generators.size() == 1);
  CHECK(four.generators[0].p_nom_kw == 90.0);
  CHECK(four.loads[0].p_kw[10] == 100.0);
  CHECK(four.prices.market[9] == 0.04);
}

TEST_CASE("save and read give back the same instance") {
  Scratch s("roundtrip");
  for (const char* name : {"toy3", "desk5", "fourprice"}) {
    const auto inst = io::read_instance(kFixtures / name);
    io::save_instance(inst, s.dir / name);
    const auto back = io::read_instance(s.dir / name);
    CHECK(all_text(back) == all_text(inst));
  }
  // random instances exercise every resource type and awkward doubles
  InstanceGenerator gen(99);
  for (int trial = 0; trial < 10; ++trial) {
    const auto inst = gen.priced(trial % 2 == 0);
    const auto dir = s.dir / ("random" + std::to_string(trial));
    io::save_instance(inst, dir);
    const auto back = io::read_instance(dir);
    CHECK(all_text(back) == all_text(inst));
    CHECK(back.prices.market == inst.prices.market);
    CHECK(back.generators[0].capacity_factor == inst.generators[0].capacity_factor);
    CHECK(back.batteries[0].storage.eta_ch == inst.batteries[0].storage.eta_ch);
  }
}

TEST_CASE("numbers print in their shortest exact form") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 2000; ++i) {
    const double v = std::ldexp(static_cast<double>(rng() >> 11), static_cast<int>(rng() % 80) - 90) * (i % 2 ? 1 : -1);
    CHECK(std::stod(io::format_number(v)) == v);
  }
  CHECK(io::format_number(0.1) == "0.1");
  CHECK(io::format_number(90.0) == "90");
  CHECK(io::format_number(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(io::format_number(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("profile rows with the wrong column count name the line") {
  Scratch s("columns");
  const auto dir = copy_fixture("fourprice", s.dir);
  auto text = slurp(dir / io::kProfilesFile);
  // third data row loses its last field
  std::size_t pos = 0;
  for (int line = 0; line < 3; ++line) pos = text.find('\n', pos) + 1;
  const auto end = text.find('\n', pos);
  const auto comma = text.rfind(',', end);
  text.erase(comma, end - comma);
  spit(dir / io::kProfilesFile, text);
  const auto msg = input_error(dir);
  CHECK(msg.find("profiles.csv") != std::string::npos);
  CHECK(msg.find("line 4") != std::string::npos);
  CHECK(msg.find("expected 3 columns, found 2") != std::string::npos);
}

TEST_CASE("schema errors name the key") {
  Scratch s("schema");
  const auto dir = copy_fixture("fourprice", s.dir);
  auto ders = nlohmann::json::parse(slurp(dir / io::kDersFile));

  auto extra = ders;
  extra["generators"]["dg"]["colour"] = "green";
  spit(dir / io::kDersFile, extra.dump());
  CHECK(input_error(dir).find("generators.dg.colour") != std::string::npos);

  auto missing = ders;
  missing["generators"]["dg"].erase("p_nom_kw");
  spit(dir / io::kDersFile, missing.dump());
  const auto msg = input_error(dir);
  CHECK(msg.find("generators.dg.p_nom_kw") != std::string::npos);
  CHECK(msg.find("missing") != std::string::npos);
}

TEST_CASE("JSON syntax errors carry a position") {
  Scratch s("syntax");
  const auto dir = copy_fixture("fourprice", s.dir);
  spit(dir / io::kNetworkFile, "{\n  \"name\": \"x\",\n  oops\n}\n");
  const auto msg = input_error(dir);
  CHECK(msg.find("network.json") != std::string::npos);
  CHECK(msg.find("line 3") != std::string::npos);
}

TEST_CASE("missing files are input errors") {
  Scratch s("missing");
  const auto dir = copy_fixture("fourprice", s.dir);
  fs::remove(dir / io::kPricesFile);
  CHECK(input_error(dir).find("prices.csv") != std::string::npos);
  const auto r = cli({"validate", dir.string()});
  CHECK(r.code == io::kExitValidation);
  CHECK(nlohmann::json::parse(r.err)["error"] == "input");
}

TEST_CASE("an instance without resources offers nothing") {
  Scratch s("empty");
  const auto dir = copy_fixture("fourprice", s.dir);
  spit(dir / io::kDersFile, "{}\n");
  spit(dir / io::kMeteringFile, "{}\n");
  // profile and area columns must follow the resources
  spit(dir / io::kProfilesFile, [] {
    std::string t = "hour\n";
    for (int h = 0; h < 24; ++h) t += std::to_string(h) + "\n";
    return t;
  }());
  CHECK(model::validate_instance(io::load_instance(dir)).ok());
  const auto r = cli({"max-flex", dir.string(), "--config", (dir / "run.toml").string(), "--out", (s.dir / "out").string()});
  CHECK(r.code == io::kExitOk);
  CHECK(r.out.find("q_max_kw 0\n") != std::string::npos);
  const auto summary = nlohmann::json::parse(slurp(s.dir / "out" / "max_flex.json"));
  CHECK(summary["q_max_kw"] == 0.0);
}

TEST_CASE("broken invariants exit with the validation code") {
  Scratch s("invalid");
  const auto dir = copy_fixture("fourprice", s.dir);
  auto net = nlohmann::json::parse(slurp(dir / io::kNetworkFile));
  net["branches"]["l01"]["to"] = "b7";
  spit(dir / io::kNetworkFile, net.dump());
  const auto r = cli({"validate", dir.string()});
  CHECK(r.code == io::kExitValidation);
  const auto err = nlohmann::json::parse(r.err);
  CHECK(err["error"] == "validation");
  CHECK(!err["issues"].empty());
  CHECK_THROWS_AS(io::load_instance(dir), io::InvalidInstance);
}

TEST_CASE("configuration text") {
  const auto values = io::parse_config_text("# c\nseed = 7\n[ss]\nlevels = 2 # two\n[curve]\nbands = [0.1, 0.9]\nname = \"x\"\n");
  CHECK(std::get<double>(values.at("seed")) == 7.0);
  CHECK(std::get<double>(values.at("ss.levels")) == 2.0);
  CHECK(std::get<std::vector<double>>(values.at("curve.bands")) == std::vector<double>{0.1, 0.9});
  CHECK(std::get<std::string>(values.at("curve.name")) == "x");

  auto error_of = [](const std::string& text) {
    try {
      io::parse_run_config(text);
    } catch (const io::ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(error_of("seed = 1\n[product]\ncolour = 3\n").find("product.colour") != std::string::npos);
  CHECK(error_of("seed = 1\nseed = 2\n").find("line 2") != std::string::npos);
  CHECK(error_of("seed = 1\n[ss\n").find("line 2") != std::string::npos);
  CHECK(error_of("seed = 1\n[product]\ndirection = \"sideways\"\n").find("direction") != std::string::npos);

  const auto no_seed = io::parse_run_config("[product]\nreliability = 0.99\n");
  CHECK(!no_seed.seed);
  REQUIRE(!no_seed.check().empty());
  CHECK(no_seed.check().front().find("seed") != std::string::npos);
}

TEST_CASE("canonical configuration text reads back unchanged") {
  for (const char* name : {"toy3", "desk5", "fourprice"}) {
    const auto cfg = io::load_run_config(kFixtures / name / "run.toml");
    const auto text = io::to_text(cfg);
    const auto back = io::parse_run_config(text);
    CHECK(io::to_text(back) == text);
    CHECK(back.seed == cfg.seed);
    CHECK(back.product.reliability == cfg.product.reliability);
    CHECK(back.sweep.bands == cfg.sweep.bands);
  }
}

TEST_CASE("command line exit codes") {
  Scratch s("codes");
  const auto dir = (kFixtures / "fourprice").string();
  CHECK(cli({}).code == io::kExitConfig);
  CHECK(cli({"frobnicate"}).code == io::kExitConfig);
  CHECK(cli({"max-flex", dir}).code == io::kExitConfig);  // --config is required
  CHECK(cli({"sweep", dir, "--config", dir + "/run.toml", "--axis", "colour", "--values", "1"}).code == io::kExitConfig);
  CHECK(cli({"sweep", dir, "--config", dir + "/run.toml", "--axis", "duration", "--values", "1,x"}).code ==
        io::kExitConfig);

  const auto no_seed = s.dir / "no_seed.toml";
  spit(no_seed, "[product]\ndirection = \"upward\"\n");
  const auto r = cli({"max-flex", dir, "--config", no_seed.string()});
  CHECK(r.code == io::kExitConfig);
  CHECK(nlohmann::json::parse(r.err)["message"].get<std::string>().find("seed") != std::string::npos);
  // the flag supplies what the file lacks
  CHECK(cli({"max-flex", dir, "--config", no_seed.string(), "--seed", "3", "--out", (s.dir / "o").string()}).code ==
        io::kExitOk);

  CHECK(cli({"validate", dir}).code == io::kExitOk);
  const auto bench = cli({"ss-bench", "--alpha", "0.001", "--function", "normal", "--seed", "7"});
  CHECK(bench.code == io::kExitOk);
  CHECK(bench.out.find("evaluations 2800") != std::string::npos);
}

TEST_CASE("supply-curve output files are stable and complete") {
  Scratch s("curve");
  const auto dir = (kFixtures / "fourprice").string();
  const auto cfg = dir + "/run.toml";
  for (const char* tag : {"a", "b"}) {
    const auto r = cli({"supply-curve", dir, "--config", cfg, "--out", (s.dir / tag).string(), "--emit-svg", "--dump-lp"});
    REQUIRE(r.code == io::kExitOk);
  }
  const auto csv = slurp(s.dir / "a" / "supply_curve.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 32);  // header + 31 points
  CHECK(csv.rfind("quantity_kw,cost_chf_per_kw,p05_chf_per_kw", 0) == 0);
  CHECK(csv.find("\n90,") != std::string::npos);
  for (const char* f : {"supply_curve.csv", "supply_curve.svg", "max_flex.json", "flex_reference.lp"})
    CHECK(slurp(s.dir / "a" / f) == slurp(s.dir / "b" / f));
  CHECK(slurp(s.dir / "a" / "supply_curve.svg").rfind("<svg", 0) == 0);
}
