#include "vppflex/io/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "vppflex/io/instance_io.hpp"
#include "vppflex/io/reports.hpp"
#include "vppflex/io/run_config.hpp"
#include "vppflex/milp/lp_writer.hpp"
#include "vppflex/model/validate.hpp"
#include "vppflex/support/stats.hpp"

namespace vppflex::io {

namespace {

/// Flags shared by the run subcommands; each overrides the config file.
struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::optional<std::string> out;
  bool histograms = false, svg = false, dump_lp = false;
};

void add_run_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "run configuration (TOML-style key = value)")->required();
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--workers", o.workers, "worker threads");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_flag("--emit-histograms", o.histograms, "write per-level histograms of g");
  cmd->add_flag("--emit-svg", o.svg, "write a fan chart of the supply curve");
  cmd->add_flag("--dump-lp", o.dump_lp, "write the reference-scenario model in LP format");
}

RunConfig resolve(const Overrides& o) {
  auto cfg = load_run_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (cfg.seed) cfg.ss.seed = *cfg.seed;
  if (o.workers) cfg.workers = *o.workers;
  if (o.out) cfg.out_dir = *o.out;
  cfg.emit.histograms |= o.histograms;
  cfg.emit.svg |= o.svg;
  cfg.emit.lp_dump |= o.dump_lp;
  if (const auto problems = cfg.check(); !problems.empty()) throw ConfigError(problems.front());
  return cfg;
}

model::VppInstance instance_for(const std::string& dir, const model::ProductSpec& spec) {
  auto inst = load_instance(dir);
  if (auto report = model::validate_product(inst, spec); !report.ok()) throw InvalidInstance(std::move(report));
  return inst;
}

void maybe_dump_lp(const RunConfig& cfg, const model::VppInstance& inst) {
  if (!cfg.emit.lp_dump) return;
  const auto h = flex::build_flex_model(inst, cfg.product, scenario::reference_scenario(inst));
  std::ostringstream lp;
  milp::write_lp(lp, h.problem);
  write_text(cfg.out_dir / "flex_reference.lp", lp.str());
}

curve::MaxFlexibility run_max_flex(const RunConfig& cfg, const model::VppInstance& inst, std::ostream& out) {
  const support::Executor ex(cfg.workers);
  auto mf = curve::max_flexibility(inst, cfg.product, cfg.uncertainty, cfg.ss, ex);
  write_text(cfg.out_dir / "max_flex.json", max_flex_json(cfg.product, mf));
  if (cfg.emit.histograms) write_text(cfg.out_dir / "ss_histograms.csv", histograms_csv(ss::level_histograms(mf.ss, 20)));
  out << "q_max_kw " << format_number(mf.q_max) << "\n";
  out << "evaluations " << mf.ss.evaluations << "\n";
  out << "cov_quantile " << format_number(mf.ss.cov_quantile) << "\n";
  return mf;
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("--values: cannot read '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError("--values: empty list");
  return out;
}

void report(std::ostream& err, const char* kind, int code, const std::string& message,
            const model::ValidationReport* issues = nullptr) {
  nlohmann::ordered_json j;
  j["error"] = kind;
  j["exit_code"] = code;
  j["message"] = message;
  if (issues) {
    auto& arr = j["issues"] = nlohmann::ordered_json::array();
    for (const auto& i : issues->issues)
      arr.push_back({{"severity", i.severity == model::Severity::error ? "error" : "warning"},
                     {"code", i.code},
                     {"message", i.message}});
  }
  err << j.dump() << "\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Reserve capacity offers of a virtual power plant"};
  app.require_subcommand(1);

  std::string dir;
  auto* validate = app.add_subcommand("validate", "check an instance directory");
  validate->add_option("dir", dir, "instance directory")->required();

  Overrides o;
  auto* max_flex = app.add_subcommand("max-flex", "maximum product quantity at the required reliability");
  max_flex->add_option("dir", dir, "instance directory")->required();
  add_run_flags(max_flex, o);

  auto* supply = app.add_subcommand("supply-curve", "risk-adjusted marginal cost over the quantity range");
  supply->add_option("dir", dir, "instance directory")->required();
  add_run_flags(supply, o);

  std::string axis_name, values_text;
  auto* sweep = app.add_subcommand("sweep", "maximum quantity against one product parameter");
  sweep->add_option("dir", dir, "instance directory")->required();
  sweep->add_option("--axis", axis_name, "reliability, ramp_time, duration or delivery_start")->required();
  sweep->add_option("--values", values_text, "comma-separated parameter values")->required();
  add_run_flags(sweep, o);

  double alpha = 0.001;
  std::string function = "normal";
  std::uint64_t bench_seed = 1;
  std::size_t bench_samples = 1000, bench_levels = 3, bench_workers = 1;
  auto* bench = app.add_subcommand("ss-bench", "subset simulation on an analytic function");
  bench->add_option("--alpha", alpha, "target probability");
  bench->add_option("--function", function, "normal: g = u1; sum: g = (u1 + ... + u5) / sqrt(5)");
  bench->add_option("--seed", bench_seed, "seed");
  bench->add_option("--samples", bench_samples, "samples per level");
  bench->add_option("--levels", bench_levels, "levels (0 picks the count)");
  bench->add_option("--workers", bench_workers, "worker threads");

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  if (!argv_rev.empty()) argv_rev.pop_back();  // program name
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    report(err, "usage", kExitConfig, e.what());
    return kExitConfig;
  }

  try {
    if (validate->parsed()) {
      const auto inst = read_instance(dir);
      const auto r = model::validate_instance(inst);
      for (const auto& i : r.issues)
        out << (i.severity == model::Severity::error ? "error " : "warning ") << i.code << ": " << i.message << "\n";
      if (!r.ok()) {
        report(err, "validation", kExitValidation, "instance has errors", &r);
        return kExitValidation;
      }
      out << "ok " << inst.name << ": " << inst.network.buses.size() << " buses, "
          << inst.generators.size() + inst.heat_pumps.size() + inst.ev_events.size() + inst.batteries.size()
          << " DERs, " << inst.loads.size() << " loads\n";
      return kExitOk;
    }

    if (bench->parsed()) {
      ss::SsConfig cfg;
      cfg.target_probability = alpha;
      cfg.seed = bench_seed;
      cfg.samples_per_level = bench_samples;
      cfg.levels = bench_levels;
      if (const auto problems = cfg.check(); !problems.empty()) throw ConfigError(problems.front());
      ss::PerformanceFunction g;
      double exact = support::normal_quantile(alpha);
      if (function == "normal") {
        g = [](std::span<const double> u) { return u[0]; };
      } else if (function == "sum") {
        g = [](std::span<const double> u) {
          double acc = 0.0;
          for (double v : u) acc += v;
          return acc / std::sqrt(static_cast<double>(u.size()));
        };
      } else {
        throw ConfigError("--function: expected normal or sum");
      }
      const auto r = ss::ss_quantile(g, cfg, support::Executor(bench_workers));
      out << "estimate " << format_number(r.estimate) << "\n";
      out << "exact " << format_number(exact) << "\n";
      out << "evaluations " << r.evaluations << "\n";
      out << "g_calls " << r.g_calls << "\n";
      out << "cov_probability " << format_number(r.cov_probability) << "\n";
      out << "cov_quantile " << format_number(r.cov_quantile) << "\n";
      return kExitOk;
    }

    const auto cfg = resolve(o);
    if (max_flex->parsed()) {
      const auto inst = instance_for(dir, cfg.product);
      maybe_dump_lp(cfg, inst);
      run_max_flex(cfg, inst, out);
      return kExitOk;
    }
    if (supply->parsed()) {
      const auto inst = instance_for(dir, cfg.product);
      maybe_dump_lp(cfg, inst);
      const auto mf = run_max_flex(cfg, inst, out);
      const auto c = curve::build_supply_curve(inst, cfg.product, cfg.uncertainty, mf.q_max, cfg.sweep, *cfg.seed,
                                               support::Executor(cfg.workers));
      write_text(cfg.out_dir / "supply_curve.csv", curve_csv(c));
      if (cfg.emit.svg) write_text(cfg.out_dir / "supply_curve.svg", curve_svg(c));
      out << "points " << c.points.size() << "\n";
      out << "monotone " << (c.monotone() ? "yes" : "no") << "\n";
      return kExitOk;
    }
    if (sweep->parsed()) {
      curve::SweepAxis axis{};
      if (!curve::parse_axis(axis_name, axis)) throw ConfigError("--axis: unknown axis '" + axis_name + "'");
      const auto values = parse_values(values_text);
      const auto inst = load_instance(dir);
      const auto rows = curve::sensitivity_sweep(inst, cfg.product, cfg.uncertainty, axis, values, cfg.ss,
                                                 support::Executor(cfg.workers));
      write_text(cfg.out_dir / ("sweep_" + std::string(curve::to_string(axis)) + ".csv"), sweep_csv(axis, rows));
      for (const auto& r : rows)
        out << format_number(r.value) << " " << (r.ok ? format_number(r.q_max) : "failed: " + r.error) << "\n";
      return kExitOk;
    }
  } catch (const InvalidInstance& e) {
    report(err, "validation", kExitValidation, e.what(), &e.report());
    return kExitValidation;
  } catch (const InputError& e) {
    report(err, "input", kExitValidation, e.what());
    return kExitValidation;
  } catch (const ConfigError& e) {
    report(err, "config", kExitConfig, e.what());
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    report(err, "config", kExitConfig, e.what());
    return kExitConfig;
  } catch (const flex::SolverFailure& e) {
    report(err, "solver", kExitSolver, e.what());
    return kExitSolver;
  } catch (const std::exception& e) {
    report(err, "solver", kExitSolver, e.what());
    return kExitSolver;
  }
  return kExitOk;
}

}  // namespace vppflex::io
