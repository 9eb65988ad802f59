// Acceptance run: one PASS/FAIL line per criterion. Criteria can be picked by
// name on the command line (e.g. `acceptance AC1 AC4`); all run by default.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "common/instances.hpp"
#include "common/lp_oracle.hpp"
#include "common/random_instances.hpp"
#include "vppflex/cost/cost_model.hpp"
#include "vppflex/curve/supply_curve.hpp"
#include "vppflex/io/cli.hpp"
#include "vppflex/io/instance_io.hpp"
#include "vppflex/io/run_config.hpp"
#include "vppflex/milp/solver.hpp"
#include "vppflex/support/stats.hpp"

using namespace vppflex;
using namespace vppflex::testing;
using model::Direction;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const fs::path kFixtures = fs::path(VPPFLEX_DATA_DIR) / "fixtures";

double unit_normal(std::span<const double> u) { return u[0]; }

ss::SsConfig paper_ss(std::uint64_t seed) {
  ss::SsConfig cfg;
  cfg.target_probability = 0.001;
  cfg.levels = 3;
  cfg.level_probability = 0.1;
  cfg.samples_per_level = 1000;
  cfg.seed = seed;
  return cfg;
}

// SS spread over 100 seeds on g(u) = u1, shared by AC2 and AC3
struct SsSpread {
  std::vector<double> estimates, covs;
};
const SsSpread& ss_spread() {
  static const SsSpread s = [] {
    SsSpread out;
    for (std::uint64_t k = 0; k < 100; ++k) {
      const auto r = ss::ss_quantile(unit_normal, paper_ss(1000 + k));
      out.estimates.push_back(r.estimate);
      out.covs.push_back(r.cov_quantile);
    }
    return out;
  }();
  return s;
}

Outcome ac1() {
  const auto r = ss::ss_quantile(unit_normal, paper_ss(1));
  return {r.evaluations == 2800, fmt("evaluations %zu (g calls %zu)", r.evaluations, r.g_calls)};
}

Outcome ac2() {
  const auto& s = ss_spread();
  const double exact = support::normal_quantile(0.001);
  const auto within = std::count_if(s.estimates.begin(), s.estimates.end(),
                                    [&](double e) { return std::abs(e - exact) <= 0.10; });
  const double cov = support::mean(s.covs);
  const bool pass = within >= 95 && cov >= 0.005 && cov <= 0.03;
  return {pass, fmt("%ld/100 within 0.10 of %.4f (mean %.4f, sd %.4f); mean COV_quant %.4f", static_cast<long>(within),
                    exact, support::mean(s.estimates), support::sample_stddev(s.estimates), cov)};
}

Outcome ac3() {
  const double ss_sd = support::sample_stddev(ss_spread().estimates);
  auto dmc_sd = [](std::size_t n, scenario::SamplingMethod m) {
    std::vector<double> e;
    for (std::uint64_t k = 0; k < 100; ++k) e.push_back(ss::dmc_quantile(unit_normal, 5, 0.001, n, m, 5000 + k).estimate);
    return support::sample_stddev(e);
  };
  // smallest multiple of 1400 samples whose DMC spread reaches the SS spread
  std::size_t needed = 0;
  for (std::size_t n = 2800; n <= 56000; n += 1400)
    if (dmc_sd(n, scenario::SamplingMethod::plain) <= ss_sd) {
      needed = n;
      break;
    }
  const bool pass = needed == 0 || needed >= 2 * 2800;
  return {pass, fmt("SS sd %.4f at 2800; DMC needs %s samples (LHS DMC sd at 2800: %.4f)", ss_sd,
                    needed ? std::to_string(needed).c_str() : "> 56000", dmc_sd(2800, scenario::SamplingMethod::lhs))};
}

Outcome ac4() {
  int lp_bad = 0, milp_bad = 0;
  std::mt19937_64 rng(4004);
  for (int k = 0; k < 200; ++k) {
    const auto p = random_lp(rng, 6, 8);
    const auto o = enumerate_vertices(p);
    const auto s = milp::solve(p);
    const bool ok = o.feasible ? s.optimal() && std::abs(s.objective - o.objective) <= 1e-6 * std::max(1.0, std::abs(o.objective))
                               : s.status == milp::SolveStatus::infeasible;
    lp_bad += !ok;
  }
  for (int k = 0; k < 100; ++k) {
    const std::size_t binaries = 1 + rng() % 10;
    const auto p = random_lp(rng, 2, 6, binaries);
    const auto o = enumerate_binaries(p);
    const auto s = milp::solve(p);
    const bool ok = o.feasible ? s.optimal() && std::abs(s.objective - o.objective) <= 1e-6 * std::max(1.0, std::abs(o.objective))
                               : s.status == milp::SolveStatus::infeasible;
    milp_bad += !ok;
  }
  return {lp_bad == 0 && milp_bad == 0, fmt("LP mismatches %d/200, MILP mismatches %d/100", lp_bad, milp_bad)};
}

Outcome ac5() {
  auto g_of = [](const model::VppInstance& inst, const model::ProductSpec& spec) {
    return flex::evaluate_g(inst, spec, scenario::reference_scenario(inst));
  };
  auto dg = chain_instance();
  add_generator(dg, "pv", "b1", 10.0, 0.8);
  const double g_dg = g_of(dg, product(Direction::symmetrical));
  auto bess = chain_instance(2, 4);
  add_battery(bess, "bess", "b1", 20.0, 10.0, 0.95);
  const double g_bess = g_of(bess, product(Direction::symmetrical, 0, 4));
  auto none = chain_instance(3);
  add_load(none, "house", "b2", 12.0);
  const double g_none = g_of(none, product(Direction::symmetrical));
  const bool pass = std::abs(g_dg - 4.0) <= 1e-6 && std::abs(g_bess) <= 1e-6 && std::abs(g_none) <= 1e-6;
  return {pass, fmt("DG %.9g kW, cyclic BESS %.3g kW, no DER %.3g kW", g_dg, g_bess, g_none)};
}

Outcome ac6() {
  InstanceGenerator gen(6006);
  int checked = 0, bad = 0;
  double worst = 0.0;
  while (checked < 20) {
    const auto inst = gen.priced(true);
    const auto spec = gen.any_product();
    const auto sc = scenario::reference_scenario(inst);
    const double g = flex::evaluate_g(inst, spec, sc);
    if (!(g > 0.01)) continue;
    const double q = gen.uniform(0.05, 0.95) * g;
    const auto c = cost::product_cost(inst, spec, sc, q);
    if (!c.feasible) {
      ++bad;
      ++checked;
      continue;
    }
    const auto h = cost::build_cost_model(inst, spec, sc, q);
    const auto fixed = milp::fix_integers(h.flex.problem, c.schedule);
    auto cost_at = [&](double qq) {
      auto p = fixed;
      p.constraint(h.min_quantity_row).rhs = qq;
      const auto s = milp::solve(p);
      return s.optimal() ? s.objective : std::nan("");
    };
    const double step = 1e-4;
    const double fd = (cost_at(q + step) - cost_at(q - step)) / (2 * step);
    const double err = std::abs(fd - c.price);
    worst = std::max(worst, std::isnan(err) ? 1e9 : err);
    bad += !(err <= 1e-6);
    ++checked;
  }
  return {bad == 0, fmt("%d/20 outside 1e-6, worst |dual - FD| %.2e", bad, worst)};
}

struct FixtureRun {
  io::RunConfig cfg;
  model::VppInstance inst;
};

FixtureRun fixture(const std::string& name) {
  FixtureRun f{io::load_run_config(kFixtures / name / "run.toml"), io::load_instance(kFixtures / name)};
  f.cfg.ss.seed = *f.cfg.seed;
  return f;
}

// Energy cost of the four-price fixture by enumerating candidate dispatches
// of its single generator hour by hour (0, the local load, the headroom cap).
double fourprice_energy_cost(const model::VppInstance& inst, const model::ProductSpec& spec, double q) {
  const auto& g = inst.generators.front();
  const auto& load = inst.loads.front();
  double total = 0.0;
  for (std::size_t t = static_cast<std::size_t>(spec.delivery_start_h);
       t < static_cast<std::size_t>(spec.delivery_start_h + spec.duration_h); ++t) {
    const double cap = g.p_nom_kw * g.capacity_factor[t] - q;
    if (cap < 0.0) return std::numeric_limits<double>::infinity();
    double best = std::numeric_limits<double>::infinity();
    for (double p : {0.0, std::min(load.p_kw[t], cap), cap}) {
      const double net = p - load.p_kw[t];
      const double cost = net >= 0.0 ? -inst.prices.market[t] * net : (inst.prices.market[t] + inst.prices.tariff[t]) * -net;
      best = std::min(best, cost + g.cost_p * p);
    }
    total += best * inst.step_h;
  }
  return total;
}

Outcome ac7() {
  std::vector<std::string> notes;
  bool pass = true;
  for (const auto& entry : fs::directory_iterator(kFixtures)) {
    const auto name = entry.path().filename().string();
    auto f = fixture(name);
    const auto mf = curve::max_flexibility(f.inst, f.cfg.product, f.cfg.uncertainty, f.cfg.ss);
    const auto c = curve::build_supply_curve(f.inst, f.cfg.product, f.cfg.uncertainty, mf.q_max, f.cfg.sweep, *f.cfg.seed);
    bool mono = true;
    for (std::size_t i = 1; i < c.points.size(); ++i) mono &= c.points[i].cost >= c.points[i - 1].cost - 1e-7;
    pass &= mono;
    std::string note = name + (mono ? " monotone" : " NOT monotone");

    if (name == "fourprice") {
      double worst = 0.0;
      std::vector<double> levels;
      for (const auto& p : c.points) {
        if (p.quantity <= 0.0) continue;
        const double h = 1e-6;
        const double oracle = (fourprice_energy_cost(f.inst, f.cfg.product, p.quantity) -
                               fourprice_energy_cost(f.inst, f.cfg.product, p.quantity - h)) / h;
        worst = std::max(worst, std::abs(oracle - p.cost));
        if (std::none_of(levels.begin(), levels.end(), [&](double l) { return std::abs(l - p.cost) <= 1e-6; }))
          levels.push_back(p.cost);
      }
      pass &= mf.q_max == 90.0 && worst <= 1e-6 && levels.size() == 4;
      note += fmt(" (q_max %.6g, worst |curve - enumeration| %.1e, %zu levels)", mf.q_max, worst, levels.size());
    }
    notes.push_back(note);
  }
  std::sort(notes.begin(), notes.end());
  std::string detail;
  for (const auto& n : notes) detail += (detail.empty() ? "" : "; ") + n;
  return {pass && notes.size() >= 3, detail};
}

Outcome ac8() {
  std::string detail;
  bool pass = true;
  auto run = [&](const FixtureRun& f, curve::SweepAxis axis, std::vector<double> values, int trend) {
    const auto rows = curve::sensitivity_sweep(f.inst, f.cfg.product, f.cfg.uncertainty, axis, values, f.cfg.ss);
    bool ok = true;
    std::string line = std::string(curve::to_string(axis)) + ":";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      ok &= rows[i].ok;
      line += fmt(" %g->%.4g", rows[i].value, rows[i].q_max);
      if (i > 0) ok &= trend * (rows[i].q_max - rows[i - 1].q_max) >= -1e-9;
    }
    pass &= ok;
    detail += (detail.empty() ? "" : "; ") + line + (ok ? "" : " (trend broken)");
  };
  const auto toy = fixture("toy3");
  run(toy, curve::SweepAxis::reliability, {0.9, 0.99, 0.999}, -1);
  run(toy, curve::SweepAxis::ramp_time, {1.0, 5.0, 15.0}, +1);
  // the single generator bounds every delivery hour on its own, so longer
  // periods only add constraints
  auto four = fixture("fourprice");
  four.cfg.uncertainty.sigma_generation = 0.0815;
  four.cfg.uncertainty.sigma_load = 0.108;
  four.cfg.product.reliability = 0.999;
  run(four, curve::SweepAxis::duration, {1.0, 2.0, 3.0, 4.0}, -1);
  return {pass, detail};
}

Outcome ac9() {
  // voltage drop over one branch with known r, x and a lagging load
  auto inst = chain_instance(2, 24);
  inst.network.branches[0].r = 0.03;
  inst.network.branches[0].x = 0.05;
  add_load(inst, "l", "b1", 80.0, 0.8);
  const auto h = flex::build_flex_model(inst, product(Direction::upward), scenario::reference_scenario(inst));
  const auto sol = flex::solve_flex(h);
  double drop_err = sol.solution.optimal() ? 0.0 : 1e9;
  if (sol.solution.optimal()) {
    const auto& x = sol.solution.values;
    for (std::size_t s = 0; s < h.states.size(); ++s)
      for (std::size_t k = 0; k < h.steps.size(); ++k) {
        const double p = x[h.p_branch[s][k][0]], q = x[h.q_branch[s][k][0]];
        const double drop = x[h.v[s][k][0]] - x[h.v[s][k][1]];
        drop_err = std::max(drop_err, std::abs(drop - 2.0 * (0.03 * p + 0.05 * q)));
      }
  }

  // polygon of one branch: its half-plane rows and the p/q variable bounds
  const double s_max = 0.7;
  auto poly = chain_instance(2, 24, s_max);
  const auto hp = flex::build_flex_model(poly, product(Direction::upward), scenario::reference_scenario(poly));
  const auto& pb = hp.problem;
  const std::size_t pv = hp.p_branch[0][0][0], qv = hp.q_branch[0][0][0];
  struct Cut {
    double a, b, rhs;  // a p + b q <= rhs
  };
  std::vector<Cut> cuts;
  for (const auto& c : pb.constraints()) {
    double a = 0.0, b = 0.0;
    bool only = !c.terms.empty();
    for (const auto& t : c.terms) {
      if (t.var == pv) a += t.coef;
      else if (t.var == qv) b += t.coef;
      else only = false;
    }
    // balance rows of the empty far bus touch p or q alone; the diagonal
    // edges of the polygon touch both (its axis-aligned edges are bounds)
    if (!only || a == 0.0 || b == 0.0) continue;
    if (c.sense != milp::Sense::ge) cuts.push_back({a, b, c.rhs});
    if (c.sense != milp::Sense::le) cuts.push_back({-a, -b, -c.rhs});
  }
  const auto& P = pb.variable(pv);
  const auto& Q = pb.variable(qv);
  if (std::isfinite(P.ub)) cuts.push_back({1, 0, P.ub});
  if (std::isfinite(P.lb)) cuts.push_back({-1, 0, -P.lb});
  if (std::isfinite(Q.ub)) cuts.push_back({0, 1, Q.ub});
  if (std::isfinite(Q.lb)) cuts.push_back({0, -1, -Q.lb});

  const double outer = s_max / std::cos(std::numbers::pi / poly.network.n_seg);
  double circle_violation = 0.0, radius_excess = -1e9;
  for (int i = 0; i < 10000; ++i) {
    const double th = 2.0 * std::numbers::pi * i / 10000.0;
    const double c = std::cos(th), s = std::sin(th);
    double reach = std::numeric_limits<double>::infinity();
    for (const auto& cut : cuts) {
      circle_violation = std::max(circle_violation, cut.a * s_max * c + cut.b * s_max * s - cut.rhs);
      const double along = cut.a * c + cut.b * s;
      if (along > 1e-15) reach = std::min(reach, cut.rhs / along);
    }
    radius_excess = std::max(radius_excess, reach - outer);
  }
  const bool pass = drop_err <= 1e-9 && circle_violation <= 1e-9 && radius_excess <= 1e-9;
  return {pass, fmt("drop error %.1e; %zu half-planes, circle violation %.1e, radius excess over s_max/cos(pi/N) %.1e",
                    drop_err, cuts.size(), circle_violation, radius_excess)};
}

std::map<std::string, std::string> read_tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    out[fs::relative(e.path(), dir).string()] = s.str();
  }
  return out;
}

Outcome ac10() {
  const fs::path root = fs::temp_directory_path() / ("vppflex_determinism_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);

  // reduced sampling keeps the repeated runs short; every stage still runs
  struct Job {
    std::string fixture;
    fs::path config;
  };
  std::vector<Job> jobs;
  for (const std::string name : {"toy3", "desk5", "fourprice"}) {
    auto cfg = io::load_run_config(kFixtures / name / "run.toml");
    cfg.ss.samples_per_level = 100;
    cfg.sweep.steps = 6;
    cfg.sweep.samples = 12;
    const auto path = root / (name + ".toml");
    std::ofstream(path) << io::to_text(cfg);
    jobs.push_back({name, path});
  }

  std::vector<std::string> failures;
  auto pipeline = [&](const std::string& tag, std::size_t workers) {
    std::ostringstream log, err;
    const auto out = root / tag;
    for (const auto& j : jobs) {
      const auto dir = (kFixtures / j.fixture).string();
      const auto o = (out / j.fixture).string();
      const std::string w = std::to_string(workers), cfg = j.config.string();
      std::vector<std::vector<std::string>> runs{
          {"vppflex", "max-flex", dir, "--config", cfg, "--workers", w, "--out", o, "--emit-histograms", "--dump-lp"},
          {"vppflex", "supply-curve", dir, "--config", cfg, "--workers", w, "--out", o, "--emit-svg"},
          {"vppflex", "sweep", dir, "--config", cfg, "--workers", w, "--out", o, "--axis", "reliability", "--values",
           "0.99,0.999"}};
      for (const auto& r : runs) {
        const int code = io::run_cli(r, log, err);
        if (code != 0) failures.push_back(tag + " " + r[1] + " " + j.fixture + " exit " + std::to_string(code));
      }
    }
    std::ofstream(out / "stdout.txt") << log.str();
    return read_tree(out);
  };

  const auto first = pipeline("w1a", 1);
  std::string detail = fmt("%zu files per run", first.size());
  bool pass = !first.empty();
  for (const auto& [tag, workers] : std::vector<std::pair<std::string, std::size_t>>{{"w1b", 1}, {"w4", 4}, {"w16", 16}}) {
    const auto other = pipeline(tag, workers);
    const bool same = other == first;
    pass &= same;
    detail += fmt("; %s %s", tag.c_str(), same ? "identical" : "DIFFERS");
  }
  for (const auto& e : failures) detail += "; " + e;
  pass &= failures.empty();
  fs::remove_all(root);
  return {pass, detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4}, {"AC5", ac5},
      {"AC6", ac6}, {"AC7", ac7}, {"AC8", ac8}, {"AC9", ac9}, {"AC10", ac10}};
  std::vector<std::string> picked(argv + 1, argv + argc);
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    if (!picked.empty() && std::find(picked.begin(), picked.end(), name) == picked.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%-4s %s  %s  [%.1f s]\n", name.c_str(), o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
