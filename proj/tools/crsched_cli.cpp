// Copyright 2026 The crsched Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line driver: simulate, verify, moments.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "crsched/engine.hpp"
#include "crsched/experiment.hpp"
#include "crsched/oracle.hpp"

namespace fs = std::filesystem;
using namespace crsched;

namespace {

struct SimulateArgs {
  std::string config;
  std::string out;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> policy;
  std::optional<std::uint64_t> horizon;
  std::optional<std::size_t> replications;
  bool y_trace = false;
};

const std::vector<double> kDefaultLoads{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};

SimConfig load_or_default(const std::string& path) {
  return path.empty() ? SimConfig{} : load_config_file(path);
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  os << text;
}

// Runs one sweep and writes its CSV files; returns false on any audit failure.
bool run_into(const SimConfig& cfg, const fs::path& dir, bool y_trace) {
  fs::create_directories(dir);
  EngineOptions opt;
  opt.record_y_history = y_trace;
  opt.throw_on_audit_failure = false;
  const auto results = run_sweep(cfg, opt);

  std::ostringstream res, sum, meta;
  write_results_csv(res, results);
  write_summary_csv(sum, results);
  write_metadata(meta, cfg, compute_service_analytics(cfg));
  write_file(dir / "results.csv", res.str());
  write_file(dir / "summary.csv", sum.str());
  write_file(dir / "metadata.txt", meta.str());
  if (y_trace) {
    std::ostringstream ys;
    write_y_trace_csv(ys, results);
    write_file(dir / "y_trace.csv", ys.str());
  }

  bool pass = true;
  std::size_t unstable = 0;
  for (const auto& r : results) {
    pass = pass && r.report.audit_pass();
    unstable += r.report.unstable ? 1 : 0;
  }
  std::cout << dir.string() << ": " << results.size() << " runs, "
            << (pass ? "audit pass" : "AUDIT FAILURE");
  if (unstable) std::cout << ", " << unstable << " hit the queue cap";
  std::cout << "\n";
  return pass;
}

int simulate(const SimulateArgs& a) {
  SimConfig cfg = load_or_default(a.config);
  if (a.seed) cfg.seed = *a.seed;
  if (a.policy) cfg.policy = *a.policy;
  if (a.horizon) cfg.horizon = *a.horizon;
  if (a.replications) cfg.replications = *a.replications;
  if (cfg.sweep_var != SweepVar::kNone && cfg.sweep_values.empty()) {
    if (cfg.sweep_var != SweepVar::kLoad) {
      throw ConfigError(0, "sweep.values is required unless sweeping the load");
    }
    cfg.sweep_values = kDefaultLoads;
  }
  cfg.validate();
  const fs::path out = a.out;

  if (a.preset.empty()) return run_into(cfg, out, a.y_trace) ? 0 : 1;

  cfg.packet_bits = 1000;
  if (cfg.sweep_var != SweepVar::kLoad) cfg.sweep_values = kDefaultLoads;
  cfg.sweep_var = SweepVar::kLoad;
  bool ok = true;
  if (a.preset == "fig3") {
    cfg.policy = "doic";
    for (double d : {25.0, 45.0}) {
      SimConfig c = cfg;
      c.delay_bounds.back() = d;
      ok = run_into(c, out / ("d_last_" + detail::num(d)), a.y_trace) && ok;
    }
  } else if (a.preset == "fig4") {
    for (const char* p : {"doic", "csma", "cnc"}) {
      SimConfig c = cfg;
      c.policy = p;
      ok = run_into(c, out / p, a.y_trace) && ok;
    }
  } else {
    throw ConfigError(0, "unknown preset '" + a.preset + "'");
  }
  return ok ? 0 : 1;
}

struct Check {
  std::string name;
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

// Analytic moments (analytics log base) against Monte Carlo packets drawn with
// the engine's log base.
void check_moments(const SimConfig& cfg, std::vector<Check>& out) {
  const auto a = compute_service_analytics(cfg);
  const auto links = cfg.links();
  const auto policy = cfg.power_policy();
  for (std::size_t i = 0; i < links.size(); ++i) {
    if (i > 0 && a.laws[i].pmf() == a.laws[i - 1].pmf() &&
        a.laws[i].step() == a.laws[i - 1].step()) {
      continue;
    }
    const auto mc = mc_service_moments(links[i].to_base, links[i].to_primary, policy,
                                       cfg.packet_bits, cfg.mc_samples, cfg.seed, cfg.log_base);
    const double z1 = std::abs(a.exact_mean[i] - mc.mean) / std::max(mc.mean_se, 1e-12);
    const double z2 =
        std::abs(a.second_moment[i] - mc.second_moment) / std::max(mc.second_moment_se, 1e-12);
    std::string detail = fmt("E[s] %.4f vs MC %.4f (z=%.2f); ", a.exact_mean[i], mc.mean, z1) +
                         fmt("E[s^2] %.2f vs MC %.2f (z=%.2f)", a.second_moment[i],
                             mc.second_moment, z2);
    if (cfg.mc_samples < 10'000) detail += "; low power: fewer than 1e4 samples";
    out.push_back({"service moments SU " + std::to_string(i + 1), z1 <= 3.0 && z2 <= 3.0, detail});
  }
}

void check_priority_formula(const SimConfig& base, std::vector<Check>& out) {
  SimConfig cfg = base;
  cfg.policy = "static-priority";
  cfg.static_order.clear();
  cfg.load = 0.5;
  cfg.sweep_values.clear();
  cfg.sweep_var = SweepVar::kNone;
  const auto a = compute_service_analytics(cfg);
  cfg = resolve_load(cfg, a);
  auto sched = make_scheduler(cfg, a);
  const auto rep = run(cfg, *sched);
  std::vector<std::size_t> order(cfg.n);
  for (std::size_t i = 0; i < cfg.n; ++i) order[i] = i;
  const auto w = priority_delays(a.moments(cfg.arrival_rates()), order);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    const double rel = std::abs(rep.su[i].w_bar - w[i]) / w[i];
    out.push_back({"priority delay SU " + std::to_string(i + 1), rel <= 0.10,
                   fmt("simulated %.3f vs formula %.3f (%.1f%%)", rep.su[i].w_bar, w[i],
                       100 * rel)});
  }
}

SimConfig single_point(SimConfig cfg, const ServiceAnalytics& a) {
  if (!cfg.sweep_values.empty() && cfg.sweep_var != SweepVar::kNone) {
    cfg = apply_sweep_value(cfg, cfg.sweep_var, cfg.sweep_values.front());
  }
  return resolve_load(cfg, a);
}

void check_replay_and_audit(const SimConfig& base, std::vector<Check>& out) {
  const auto a = compute_service_analytics(base);
  for (const char* p : {"doic", "csma", "cnc"}) {
    SimConfig cfg = single_point(base, a);
    cfg.policy = p;
    cfg.horizon = std::min<std::uint64_t>(cfg.horizon, 200'000);
    EngineOptions opt;
    opt.full_log = true;
    opt.throw_on_audit_failure = false;
    auto sched = make_scheduler(cfg, a);
    const auto rep = run(cfg, *sched, opt);
    const auto v = replay_verify(cfg, rep);
    out.push_back({std::string("replay ") + p, v.pass,
                   v.pass ? std::to_string(rep.slots) + " slots, " + std::to_string(rep.frames) +
                                " frames"
                          : v.detail});
    out.push_back({std::string("audit ") + p, rep.audit_pass(),
                   std::to_string(rep.audit_failures) + " violating slots"});
  }
}

int verify(const std::string& path) {
  const SimConfig cfg = load_or_default(path);
  std::vector<Check> checks;
  check_moments(cfg, checks);
  check_priority_formula(cfg, checks);
  check_replay_and_audit(cfg, checks);
  bool ok = true;
  std::printf("%-26s %-6s %s\n", "check", "result", "detail");
  for (const auto& c : checks) {
    std::printf("%-26s %-6s %s\n", c.name.c_str(), c.pass ? "PASS" : "FAIL", c.detail.c_str());
    ok = ok && c.pass;
  }
  return ok ? 0 : 1;
}

int moments(const std::string& path) {
  const SimConfig cfg = load_or_default(path);
  const auto a = compute_service_analytics(cfg);
  const auto links = cfg.links();
  const auto policy = cfg.power_policy();
  std::printf("su,E_R,E_s_renewal,E_s,E_s2,mc_E_s,mc_E_s_se,mc_E_s2,mc_E_s2_se\n");
  for (std::size_t i = 0; i < links.size(); ++i) {
    const auto mc = mc_service_moments(links[i].to_base, links[i].to_primary, policy,
                                       cfg.packet_bits, cfg.mc_samples, cfg.seed, cfg.log_base);
    std::printf("%zu,%.6f,%.6f,%.6f,%.4f,%.6f,%.6f,%.4f,%.4f\n", i + 1, a.laws[i].mean(),
                a.renewal_mean[i], a.exact_mean[i], a.second_moment[i], mc.mean, mc.mean_se,
                mc.second_moment, mc.second_moment_se);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Slotted uplink scheduling simulator for underlay cognitive radio"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "run a simulation sweep and write CSV files");
  s->add_option("--config", sim.config, "config file (key = value)")->check(CLI::ExistingFile);
  s->add_option("--out", sim.out, "output directory")->required();
  s->add_option("--preset", sim.preset, "fig3 or fig4")->check(CLI::IsMember({"fig3", "fig4"}));
  s->add_option("--seed", sim.seed, "master seed");
  s->add_option("--policy", sim.policy, "scheduling policy")
      ->check(CLI::IsMember({"doic", "csma", "cnc", "static-priority"}));
  s->add_option("--horizon", sim.horizon, "slots per run");
  s->add_option("--replications", sim.replications, "replications per sweep point");
  s->add_flag("--y-trace", sim.y_trace, "also write per-frame virtual queue traces");

  std::string verify_config;
  auto* v = app.add_subcommand("verify", "run the oracle checks and print a table");
  v->add_option("--config", verify_config, "config file")->check(CLI::ExistingFile);

  std::string moments_config;
  auto* m = app.add_subcommand("moments", "service-time moments: analytics vs Monte Carlo");
  m->add_option("--config", moments_config, "config file")->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*s) return simulate(sim);
    if (*v) return verify(verify_config);
    if (*m) return moments(moments_config);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
