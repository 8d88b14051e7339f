#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hvns/bounds_lab.hpp"
#include "hvns/config.hpp"
#include "hvns/turb_diagnostics.hpp"
#include "hvns/vortex_nodal.hpp"

namespace hvns {

/// Exit codes shared by the CLI and the sweep cell status.
enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitRuntime = 2, kExitIo = 3 };

/// Maps an exception thrown by the library onto its exit code.
int exit_code_for(const std::exception& e);

struct RunOutcome {
  RunRecord record;
  std::vector<DiagnosticsRow> rows;
  /// Nodal report of the last state (skipped after a blow-up).
  std::optional<NodalReport> final_nodal;
  /// (t, sup nodal area) at every nodal measurement.
  std::vector<std::pair<double, double>> nodal_series;
  TurbulenceNumbers numbers;
  int exit_code = kExitOk;
  std::string message;
};

/// Runs one configuration and writes into out_dir:
///   config.cfg          resolved configuration
///   diagnostics.csv     one row per diagnostics sample
///   snapshot_<step>.hvns every output.snapshot_every steps, final.hvns at the end
///   nodal_report.txt    nodal report of the final state
/// A blow-up still writes the rows and snapshots produced so far and returns
/// exit code 2 in the outcome.
RunOutcome execute_run(const RunConfig& config, const std::filesystem::path& out_dir);

/// Same without touching the filesystem.
RunOutcome simulate(const RunConfig& config);

std::string format_nodal_report(const NodalReport& report);
void write_nodal_report(const std::filesystem::path& path, const NodalReport& report);

/// Bound inputs from a configuration and the diagnostics rows of its run.
/// Measured quantities (G, beta, l_eps, t, ||u0||) come from the rows.
BoundInputs bound_inputs_from(const RunConfig& config, std::span<const DiagnosticsRow> rows);

/// Every bound kind whose inputs are available, plus the measured nodal series.
BoundReport bound_report_from(const RunConfig& config, std::span<const DiagnosticsRow> rows);

struct CellResult {
  SweepCell cell;
  int exit_code = kExitOk;
  std::string reason;
  double grashof = 0.0;
  double sup_nodal_area = 0.0;
  double reynolds = 0.0;
  double high_k_fraction = 0.0;
};

struct SweepOutcome {
  std::vector<CellResult> cells;
  BoundReport report;
  int workers = 1;
  int failed = 0;
};

/// Worker count after the HVNS_THREADS cap.
int effective_workers(int requested, std::size_t cells);

/// Runs every cell into out_dir/<cell name>/ and writes config.cfg,
/// cells.csv, bounds.csv and bounds_summary.txt into out_dir.
SweepOutcome execute_sweep(const SweepConfig& config, const std::filesystem::path& out_dir);

/// Fast invariant checks; prints one PASS/FAIL line each and returns the
/// number of failures.
int run_selftest(std::ostream& os);

}  // namespace hvns
