// Command-line front end: run, sweep, nodal, bounds, selftest.

#include <cstdio>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "hvns/harness.hpp"

using namespace hvns;

namespace {

int cmd_run(const std::string& config_path, const std::string& out) {
  const AnyConfig any = load_config(config_path);
  if (!std::holds_alternative<RunConfig>(any)) {
    throw ValidationError("config " + config_path + " describes a sweep; use the sweep subcommand");
  }
  const auto& config = std::get<RunConfig>(any);
  const std::filesystem::path dir = out.empty() ? config.output.dir : std::filesystem::path(out);
  const RunOutcome o = execute_run(config, dir);
  const auto& s = o.record.final_state;
  std::printf("t = %.10g after %lld steps, energy = %.10g\n", s.t, static_cast<long long>(s.step),
              o.rows.empty() ? 0.0 : o.rows.back().energy);
  if (o.final_nodal) std::printf("sup nodal area = %.10g\n", o.final_nodal->sup_measure);
  std::printf("outputs in %s\n", dir.string().c_str());
  if (o.exit_code != kExitOk) std::fprintf(stderr, "error: %s (partial outputs written)\n", o.message.c_str());
  return o.exit_code;
}

int cmd_sweep(const std::string& config_path, const std::string& out, int workers) {
  const AnyConfig any = load_config(config_path);
  if (!std::holds_alternative<SweepConfig>(any)) {
    throw ValidationError("config " + config_path + " has no sweep.* keys; use the run subcommand");
  }
  SweepConfig config = std::get<SweepConfig>(any);
  if (workers > 0) config.workers = workers;
  const std::filesystem::path dir = out.empty() ? config.base.output.dir : std::filesystem::path(out);
  const SweepOutcome o = execute_sweep(config, dir);
  std::printf("%zu cells on %d worker(s), %d failed; outputs in %s\n", o.cells.size(), o.workers, o.failed,
              dir.string().c_str());
  std::cout << format_bound_summary(o.report);
  return o.failed == 0 ? kExitOk : kExitRuntime;
}

int cmd_nodal(const std::string& snapshot, int levels, bool magnitude, const std::string& out,
              const std::string& mesh) {
  const Checkpoint cp = read_checkpoint(snapshot);
  const NodalReport report = nodal_measure(cp.field(), {levels, magnitude}, cp.t, cp.l_hyper);
  const std::string text = format_nodal_report(report);
  std::cout << text;
  if (!out.empty()) write_nodal_report(out, report);
  if (!mesh.empty()) {
    if (report.sup_measure == 0) throw DomainError("no level set to export: every sampled level is empty");
    const auto w = vorticity_samples(cp.field());
    Samples h = report.sup_component < 3
                    ? w[std::size_t(report.sup_component)]
                    : Samples(w[0].grid(), w[0].values().square() + w[1].values().square() + w[2].values().square());
    write_mesh(mesh, isosurface(h, report.sup_level));
  }
  return kExitOk;
}

struct BoundsArgs {
  std::string diag;
  std::string config;
  std::string kind;
  std::string out;
  std::map<std::string, double> values;
  std::map<int, double> constants;
};

int cmd_bounds(const BoundsArgs& a) {
  RunConfig config;
  if (!a.config.empty()) {
    const AnyConfig any = load_config(a.config);
    config = std::holds_alternative<RunConfig>(any) ? std::get<RunConfig>(any) : std::get<SweepConfig>(any).base;
  }
  std::vector<DiagnosticsRow> rows;
  if (!a.diag.empty()) rows = read_diagnostics_csv(a.diag);

  BoundInputs in;
  if (!a.config.empty() || !rows.empty()) in = bound_inputs_from(config, rows);
  const std::map<std::string, std::optional<double>*> slots{
      {"G", &in.G},       {"l", &in.l_hyper},    {"eps", &in.eps_hyper}, {"lambda1", &in.lambda1},
      {"lambda_m", &in.lambda_m}, {"m", &in.m},  {"beta", &in.beta},     {"alpha", &in.alpha},
      {"L", &in.L},       {"nu", &in.nu},        {"t", &in.t},           {"l0", &in.l0},
      {"l_eps", &in.l_eps}, {"u0_norm", &in.u0_norm}};
  for (const auto& [name, v] : a.values) *slots.at(name) = v;
  for (const auto& [i, v] : a.constants) in.constants[i] = v;

  if (!a.kind.empty()) {
    const BoundEntry e = evaluate_bound(parse_bound_kind(a.kind), in);
    std::printf("%.12g\n", e.value);
    for (const auto& f : e.flags) std::fprintf(stderr, "flag: %s\n", f.c_str());
    return kExitOk;
  }
  BoundReport report = bound_report_from(config, rows);
  report.bounds.clear();
  for (BoundKind k : {BoundKind::C14, BoundKind::C4, BoundKind::C6, BoundKind::C8, BoundKind::C9, BoundKind::T0}) {
    try {
      report.bounds.push_back(evaluate_bound(k, in));
    } catch (const MissingInputError&) {
    }
  }
  std::cout << format_bound_summary(report);
  if (!a.out.empty()) write_bound_report(a.out, report);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hvns: hyperviscous Navier-Stokes runs, vorticity level sets and bound evaluation"};
  app.require_subcommand(1);

  std::string config_path, out;
  int workers = 0;
  auto* run = app.add_subcommand("run", "integrate one configuration");
  run->add_option("--config", config_path, "configuration file")->required();
  run->add_option("--out", out, "output directory (default: output.dir)");

  auto* sweep = app.add_subcommand("sweep", "run every cell of a sweep configuration");
  sweep->add_option("--config", config_path, "configuration file with sweep.* keys")->required();
  sweep->add_option("--out", out, "output directory (default: output.dir)");
  sweep->add_option("--workers", workers, "worker threads (capped by HVNS_THREADS)")->check(CLI::PositiveNumber);

  std::string snapshot, mesh;
  int levels = 21;
  bool magnitude = false;
  auto* nodal = app.add_subcommand("nodal", "nodal report of a snapshot file");
  nodal->add_option("--snapshot", snapshot, "snapshot written by run")->required();
  nodal->add_option("--levels", levels, "number of sampled levels (0 plus quantiles)")->check(CLI::PositiveNumber);
  nodal->add_flag("--magnitude", magnitude, "also measure level sets of |omega|^2");
  nodal->add_option("--out", out, "write the report to this file");
  nodal->add_option("--mesh", mesh, "export the supremal level set as a v/f mesh");

  BoundsArgs ba;
  auto* bounds = app.add_subcommand("bounds", "evaluate closed-form bounds");
  bounds->add_option("--diag", ba.diag, "diagnostics CSV of a run");
  bounds->add_option("--config", ba.config, "configuration of that run");
  bounds->add_option("--kind", ba.kind, "print one bound: c14, c4, c6, c8, c9 or t0");
  bounds->add_option("--out", ba.out, "directory for bounds.csv and bounds_summary.txt");
  std::map<std::string, double> value_storage;
  for (const char* name :
       {"G", "l", "eps", "lambda1", "lambda_m", "m", "beta", "alpha", "L", "nu", "t", "l0", "l_eps", "u0_norm"}) {
    bounds->add_option_function<double>(std::string("--") + name, [&ba, name](double v) { ba.values[name] = v; },
                                         std::string("override input ") + name);
  }
  for (int i = 1; i <= 11; ++i) {
    bounds->add_option_function<double>("--C" + std::to_string(i), [&ba, i](double v) { ba.constants[i] = v; },
                                        "universal constant C" + std::to_string(i));
  }

  auto* selftest = app.add_subcommand("selftest", "run the fast invariant checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*run) return cmd_run(config_path, out);
    if (*sweep) return cmd_sweep(config_path, out, workers);
    if (*nodal) return cmd_nodal(snapshot, levels, magnitude, out, mesh);
    if (*bounds) return cmd_bounds(ba);
    if (*selftest) return run_selftest(std::cout) == 0 ? kExitOk : kExitRuntime;
  } catch (const ConfigError& e) {
    for (const auto& p : e.problems()) std::fprintf(stderr, "config error: %s\n", p.c_str());
    return kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e);
  }
  return kExitValidation;
}
