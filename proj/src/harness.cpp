#include "hvns/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

namespace hvns {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  os << text;
  if (!os) throw IoError("failed writing: " + path.string());
}

void make_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  }
}

std::filesystem::path snapshot_path(const std::filesystem::path& dir, std::int64_t step) {
  char name[64];
  std::snprintf(name, sizeof name, "snapshot_%08lld.hvns", static_cast<long long>(step));
  return dir / name;
}

RunOutcome run_impl(const RunConfig& config, const std::filesystem::path* out_dir) {
  const Field u0 = initial_field(config);
  const LevelSpec levels{config.output.levels, config.output.magnitude};

  GevreyMonitor monitor(config.resolved_gevrey_alpha(), norm(u0, NormKind::hdot(1)));
  std::map<std::int64_t, GevreyReading> gevrey;
  std::map<std::int64_t, double> nodal_sup;
  std::vector<std::pair<double, double>> series;

  RunOptions options;
  options.sample_every = config.output.diag_every;
  options.observers.push_back({config.output.diag_every, [&](const SolverState& s) {
                                 try {
                                   gevrey[s.step] = monitor.observe(s);
                                 } catch (const RangeError&) {
                                   // alpha t left the exponent guard; the row keeps NaN.
                                 }
                               }});
  if (config.output.nodal_every > 0) {
    options.observers.push_back({config.output.nodal_every, [&](const SolverState& s) {
                                   const NodalReport r = nodal_measure(s, levels);
                                   nodal_sup[s.step] = r.sup_measure;
                                   series.emplace_back(s.t, r.sup_measure);
                                 }});
  }
  if (out_dir && config.output.snapshot_every > 0) {
    options.observers.push_back({config.output.snapshot_every, [&](const SolverState& s) {
                                   write_checkpoint(snapshot_path(*out_dir, s.step), s);
                                 }});
  }

  RunOutcome outcome{integrate(config.solver, u0, options), {}, {}, {}, {}, kExitOk, {}};
  outcome.nodal_series = std::move(series);
  const auto& rec = outcome.record;
  const SolverState& last = rec.final_state;

  if (!rec.blowup) {
    outcome.final_nodal = nodal_measure(last, levels);
    if (!nodal_sup.count(last.step)) {
      nodal_sup[last.step] = outcome.final_nodal->sup_measure;
      outcome.nodal_series.emplace_back(last.t, outcome.final_nodal->sup_measure);
    }
  }

  DiagnosticsRecorder recorder({config.solver.nu, config.L, config.resolved_forcing_scale(), norm(last.f_hat)});
  for (const auto& s : rec.samples) {
    const auto g = gevrey.find(s.step);
    const auto a = nodal_sup.find(s.step);
    recorder.add(s, (g == gevrey.end() || s.blowup) ? nullptr : &g->second,
                 (a == nodal_sup.end() || s.blowup) ? kNaN : a->second);
  }
  outcome.rows = recorder.rows();
  outcome.numbers = recorder.numbers();

  if (rec.blowup) {
    outcome.exit_code = kExitRuntime;
    outcome.message = rec.message.empty() ? "blow-up" : rec.message;
  }
  return outcome;
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ValidationError*>(&e)) return kExitValidation;
  if (dynamic_cast<const IoError*>(&e)) return kExitIo;
  return kExitRuntime;
}

RunOutcome simulate(const RunConfig& config) { return run_impl(config, nullptr); }

RunOutcome execute_run(const RunConfig& config, const std::filesystem::path& out_dir) {
  make_dir(out_dir);
  RunConfig resolved = config;
  resolved.output.dir = out_dir;
  write_text(out_dir / "config.cfg", format_config(resolved));
  RunOutcome outcome = run_impl(config, &out_dir);
  write_diagnostics_csv(out_dir / "diagnostics.csv", outcome.rows);
  if (!outcome.record.blowup) {
    write_checkpoint(out_dir / "final.hvns", outcome.record.final_state);
    write_nodal_report(out_dir / "nodal_report.txt", *outcome.final_nodal);
  }
  return outcome;
}

std::string format_nodal_report(const NodalReport& r) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "t = %.17g\nl_hyper = %.17g\nsup_measure = %.17g\nsup_component = %d\n", r.t,
                r.l_hyper, r.sup_measure, r.sup_component);
  os << line;
  std::snprintf(line, sizeof line, "sup_level = %.17g\ndegenerate = %d\ncomponent,level,area,degenerate\n",
                r.sup_level, r.degenerate ? 1 : 0);
  os << line;
  for (const auto& c : r.components) {
    if (c.degenerate) {
      std::snprintf(line, sizeof line, "%d,nan,0,1\n", c.component);
      os << line;
      continue;
    }
    for (std::size_t i = 0; i < c.levels.size(); ++i) {
      std::snprintf(line, sizeof line, "%d,%.17g,%.17g,0\n", c.component, c.levels[i], c.areas[i]);
      os << line;
    }
  }
  return os.str();
}

void write_nodal_report(const std::filesystem::path& path, const NodalReport& report) {
  write_text(path, format_nodal_report(report));
}

BoundInputs bound_inputs_from(const RunConfig& config, std::span<const DiagnosticsRow> rows) {
  const Grid g = config.grid();
  BoundInputs in;
  in.constants = config.constants;
  in.lambda1 = g.lambda1();
  in.L = config.L;
  in.nu = config.solver.nu;
  in.l_hyper = config.solver.l_hyper;
  in.eps_hyper = config.solver.eps_hyper;
  in.alpha = config.resolved_gevrey_alpha();
  in.l0 = 1 / std::sqrt(g.lambda1());
  if (config.m) {
    in.m = double(*config.m);
    in.lambda_m = stokes_eigenvalue(g, *config.m);
  }
  if (config.beta) in.beta = *config.beta;

  const DiagnosticsRow* last = nullptr;
  for (const auto& r : rows) {
    if (!r.blowup) last = &r;
  }
  if (!rows.empty() && !rows.front().blowup) in.u0_norm = std::sqrt(2 * rows.front().energy);
  if (last) {
    if (last->t > 0) in.t = last->t;
    if (last->grashof > 0) in.G = last->grashof;
    if (!in.beta && std::isfinite(last->beta_min) && last->beta_min > 0) in.beta = last->beta_min;
    if (std::isfinite(last->leps_paper) && last->leps_paper > 0) in.l_eps = last->leps_paper;
  }
  return in;
}

BoundReport bound_report_from(const RunConfig& config, std::span<const DiagnosticsRow> rows) {
  BoundReport report;
  const BoundInputs in = bound_inputs_from(config, rows);
  for (BoundKind k : {BoundKind::C14, BoundKind::C4, BoundKind::C6, BoundKind::C8, BoundKind::C9, BoundKind::T0}) {
    try {
      report.bounds.push_back(evaluate_bound(k, in));
    } catch (const MissingInputError&) {
    } catch (const DomainError&) {
    }
  }
  for (const auto& r : rows) {
    if (!r.blowup && std::isfinite(r.nodal_sup_area)) report.nodal_series.emplace_back(r.t, r.nodal_sup_area);
  }
  return report;
}

int effective_workers(int requested, std::size_t cells) {
  int workers = std::max(1, requested);
  if (const char* env = std::getenv("HVNS_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap >= 1) workers = std::min<long>(workers, cap);
  }
  return std::max(1, std::min<int>(workers, int(std::max<std::size_t>(1, cells))));
}

namespace {

CellResult run_cell(const SweepCell& cell, const std::filesystem::path& dir) {
  CellResult result;
  result.cell = cell;
  try {
    const RunOutcome out = execute_run(cell.config, dir);
    result.exit_code = out.exit_code;
    result.reason = out.message;
    result.grashof = out.numbers.grashof;
    result.reynolds = out.numbers.reynolds;
    // Supremum over the later half of the record, away from the initial transient.
    const double t_half = 0.5 * out.record.final_state.t;
    for (const auto& [t, a] : out.nodal_series) {
      if (t >= t_half) result.sup_nodal_area = std::max(result.sup_nodal_area, a);
    }
    if (!out.record.blowup) {
      const double cut = cell.config.n / 4.0;
      result.high_k_fraction = high_k_energy_fraction(out.record.final_state.u, cut);
    }
  } catch (const std::exception& e) {
    result.exit_code = exit_code_for(e);
    result.reason = e.what();
  }
  return result;
}

std::string quote(std::string s) {
  for (auto& c : s) {
    if (c == '"' || c == '\n') c = '\'';
  }
  return '"' + s + '"';
}

}  // namespace

SweepOutcome execute_sweep(const SweepConfig& config, const std::filesystem::path& out_dir) {
  make_dir(out_dir);
  SweepConfig resolved = config;
  resolved.base.output.dir = out_dir;
  write_text(out_dir / "config.cfg", format_config(resolved));

  const auto cells = config.cells();
  SweepOutcome outcome;
  outcome.workers = effective_workers(config.workers, cells.size());
  outcome.cells.resize(cells.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      RunConfig cfg = cells[i].config;
      cfg.output.dir = out_dir / cells[i].name;
      SweepCell cell = cells[i];
      cell.config = cfg;
      outcome.cells[i] = run_cell(cell, cfg.output.dir);
    }
  };
  if (outcome.workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < outcome.workers; ++w) pool.emplace_back(worker);
  }

  // Aggregation: one c9 entry per cell and one area-vs-G study per (l, eps).
  std::map<std::pair<double, double>, ScalingStudy> studies;
  for (const auto& r : outcome.cells) {
    if (r.exit_code != kExitOk) {
      ++outcome.failed;
      continue;
    }
    const auto& s = r.cell.config.solver;
    if (r.grashof > 0) {
      BoundInputs in;
      in.constants = r.cell.config.constants;
      in.G = r.grashof;
      in.l_hyper = s.l_hyper;
      in.nu = s.nu;
      in.lambda1 = r.cell.config.grid().lambda1();
      in.annotations["cell"] = r.cell.index;
      outcome.report.bounds.push_back(evaluate_bound(BoundKind::C9, in));
    }
    auto& study = studies[{s.l_hyper, s.eps_hyper}];
    char label[128];
    std::snprintf(label, sizeof label, "sup nodal area vs G, l_hyper=%g, eps_hyper=%g", s.l_hyper, s.eps_hyper);
    study.label = label;
    study.reference_exponent = s.l_hyper / 6;
    if (r.grashof > 0 && r.sup_nodal_area > 0) {
      study.x.push_back(r.grashof);
      study.area.push_back(r.sup_nodal_area);
    }
  }
  for (auto& [key, study] : studies) {
    std::vector<double> distinct = study.x;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (study.x.size() >= 3 && distinct.size() >= 2) study.fit = fit_scaling(study.x, study.area);
    outcome.report.studies.push_back(study);
  }

  std::ostringstream csv;
  csv << "cell,l_hyper,eps_hyper,amplitude,exit_code,reason,grashof,sup_nodal_area,reynolds,high_k_fraction\n";
  char line[256];
  for (const auto& r : outcome.cells) {
    const auto& s = r.cell.config.solver;
    std::snprintf(line, sizeof line, "%s,%.17g,%.17g,%.17g,%d,", r.cell.name.c_str(), s.l_hyper, s.eps_hyper,
                  s.forcing.amplitude, r.exit_code);
    csv << line << quote(r.reason);
    std::snprintf(line, sizeof line, ",%.17g,%.17g,%.17g,%.17g\n", r.grashof, r.sup_nodal_area, r.reynolds,
                  r.high_k_fraction);
    csv << line;
  }
  write_text(out_dir / "cells.csv", csv.str());

  std::string summary = format_bound_summary(outcome.report);
  summary += "\ncells: " + std::to_string(outcome.cells.size()) + ", failed: " + std::to_string(outcome.failed) + "\n";
  for (const auto& r : outcome.cells) {
    if (r.exit_code != kExitOk) {
      summary += "  failed " + r.cell.name + " (exit " + std::to_string(r.exit_code) + "): " + r.reason + "\n";
    }
  }
  write_text(out_dir / "bounds.csv", format_bound_csv(outcome.report));
  write_text(out_dir / "bounds_summary.txt", summary);
  return outcome;
}

namespace {

struct SelfCheck {
  std::ostream& os;
  int failures = 0;
  void report(const char* name, bool ok, const std::string& detail) {
    os << (ok ? "PASS " : "FAIL ") << name << ": " << detail << '\n';
    if (!ok) ++failures;
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace

int run_selftest(std::ostream& os) {
  SelfCheck check{os};
  const double two_pi = 2 * std::numbers::pi;
  const Grid g16 = build_grid(16, two_pi);

  {
    SolverParams p;
    p.nu = 1;
    p.eps_hyper = 0.1;
    p.l_hyper = 2;
    p.dt = 1e-3;
    p.T_end = 0.2;
    RunConfig c;
    c.n = 16;
    c.init.kind = InitSpec::Kind::Shear;
    const Field u0 = initial_field(c);
    const RunRecord r = integrate(p, u0);
    const double err = std::abs(norm(r.final_state.u) / norm(u0) / std::exp(-1.1 * 0.2) - 1);
    check.report("shear decay", err <= 1e-8, "relative error " + num(err));
  }
  {
    SolverParams p;
    p.nu = 0.05;
    p.eps_hyper = 0.01;
    p.l_hyper = 2;
    p.dt = 5e-3;
    p.forcing = {ForcingSpec::Type::Kolmogorov, 1.0, 1, 0};
    SolverState s = make_state(p, random_field<double>(g16, RandomFieldSpec{3, 4.0, 2.0, 0.5}));
    double div = 0, herm = 0, mean = 0;
    for (int i = 0; i < 20; ++i) {
      step(s, p.dt);
      div = std::max(div, divergence_defect(s.u));
      herm = std::max(herm, hermitian_defect(s.u));
      mean = std::max(mean, mean_mode_magnitude(s.u));
    }
    check.report("structural invariants", div <= 1e-12 && herm <= 1e-13 && mean == 0,
                 "div " + num(div) + ", hermitian " + num(herm) + ", mean " + num(mean));
  }
  {
    SolverParams a;
    a.nu = 0.3;
    a.eps_hyper = 0.2;
    a.l_hyper = 1;
    a.dt = 2e-3;
    a.T_end = 0.04;
    SolverParams b = a;
    b.nu = 0.5;
    b.eps_hyper = 0;
    const Field u0 = random_field<double>(g16, RandomFieldSpec{5, 4.0, 2.0, 0.5});
    const Field ua = integrate(a, u0).final_state.u;
    const Field ub = integrate(b, u0).final_state.u;
    const double rel = norm(ua - ub) / norm(ub);
    check.report("l=1 reduction", rel <= 1e-13, "relative difference " + num(rel));
  }
  {
    int violations = 0;
    const std::vector<double> levels{-1.0, 0.0, 0.5, 2.0};
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const Field u = random_field<double>(g16, RandomFieldSpec{seed, 3.0, 2.0, 1.0});
      violations += lemma_transfer_check(u, 0.05 * double(seed), levels).violations;
    }
    check.report("Gevrey transfer", violations == 0, std::to_string(violations) + " violations");
  }
  {
    const Grid g = build_grid(32, two_pi);
    Samples h(g);
    for (int iz = 0; iz < 32; ++iz)
      for (int iy = 0; iy < 32; ++iy)
        for (int ix = 0; ix < 32; ++ix) {
          const double x = h.coordinate(ix) - std::numbers::pi;
          const double y = h.coordinate(iy) - std::numbers::pi;
          const double z = h.coordinate(iz) - std::numbers::pi;
          h(ix, iy, iz) = x * x + y * y + z * z - 1;
        }
    const double err = std::abs(isosurface_area(h, 0.0) / (4 * std::numbers::pi) - 1);
    check.report("sphere area", err <= 0.03, "relative error " + num(err));
  }
  {
    BoundInputs in;
    in.G = 1e6;
    in.l_hyper = 3;
    in.lambda_m = 4;
    in.L = two_pi;
    in.nu = 1;
    in.lambda1 = 1;
    const double c9 = bound_value(BoundKind::C9, in);
    in.l_hyper = 2;
    const double c4 = bound_value(BoundKind::C4, in);
    const double t0 = bound_value(BoundKind::T0, in);
    const bool ok = std::abs(c9 / 1000 - 1) <= 1e-12 && std::abs(c4 / 4 - 1) <= 1e-12 &&
                    std::abs(t0 / (4 * std::numbers::pi) - 1) <= 1e-12;
    check.report("bound formulas", ok, "c9 " + num(c9) + ", c4 " + num(c4) + ", t0 " + num(t0));
  }
  return check.failures;
}

}  // namespace hvns
