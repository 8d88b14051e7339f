#pragma once

#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "hvns/nse_solver.hpp"

namespace hvns {

/// Norms of one sampled state, the raw material of every time average below.
struct HistoryPoint {
  double t = 0.0;
  /// ||u||
  double l2_norm = 0.0;
  /// ||A^{1/2} u||
  double grad_norm = 0.0;
};

using History = std::vector<HistoryPoint>;

/// Samples flagged blowup are skipped.
History history_from(std::span<const EnergySample> samples);

/// limsup-style average of g over [t0, T]: for every sample time T' in the
/// upper half of the record, take the trapezoidal mean of g over the trailing
/// window [t0 + (T'-t0)/2, T'], and return the largest of these means.
/// A single sample (or a record of zero duration) returns the last value.
double long_time_average(std::span<const double> t, std::span<const double> g);

struct ReynoldsNumbers {
  /// U^2 = <||u||^2> / L^2 as written in the source formula.
  double U_paper = 0.0;
  /// U^2 = <||u||^2> / L^3, the volume-averaged mean square velocity.
  double U_standard = 0.0;
  double paper = 0.0;
  double standard = 0.0;
};

/// Re = U * forcing_scale / nu with both normalizations of U.
ReynoldsNumbers reynolds(const History& history, double L, double forcing_scale, double nu);

/// Gr = ||f|| / (nu^2 lambda1^{3/4}).
double grashof(double f_norm, double nu, double lambda1);
double grashof(const Field& f, double nu, double lambda1);

/// min over samples of ||u(t)|| / ||f||. Throws UndefinedRatioError for f = 0.
double beta_ratio(const History& history, double f_norm);
double beta_ratio(const History& history, const Field& f);

enum class DissipationVariant { Paper, Standard };

struct DissipationNumbers {
  /// lambda1^{3/2} nu <||A^{1/2}u||^2>
  double eps_paper = 0.0;
  /// nu <||A^{1/2}u||^2> / |Omega|
  double eps_standard = 0.0;
  /// nu^3 / eps_paper
  double l_eps_paper = 0.0;
  /// (nu^3 / eps_standard)^{1/4}
  double l_eps_standard = 0.0;
  /// lambda1^{-1/2}
  double l0 = 0.0;
  double ratio_l0_over_leps = 0.0;
};

/// Zero dissipation reports both length scales as +infinity.
DissipationNumbers dissipation_and_scales(const History& history, double nu, double lambda1, double volume,
                                          DissipationVariant variant = DissipationVariant::Paper);

struct TurbulenceNumbers {
  double reynolds = 0.0;
  double reynolds_standard = 0.0;
  double grashof = 0.0;
  double beta_ratio = 0.0;
  DissipationNumbers dissipation;
};

/// Default Gevrey rate alpha = nu lambda1^{1/2} / 4.
double default_gevrey_rate(double nu, double lambda1);

struct GevreyReading {
  double value = 0.0;
  double ratio = 0.0;
  bool decreasing = true;
};

/// Tracks ||A^{1/2} e^{alpha t A^{1/2}} u(t)|| against 2 ||A^{1/2} u0||.
class GevreyMonitor {
 public:
  GevreyMonitor(double alpha_rate, double u0_grad_norm);

  /// Throws RangeError when alpha t leaves the exponent guard.
  GevreyReading observe(const Field& u, double t);
  GevreyReading observe(const SolverState& state) { return observe(state.u, state.t); }

  double alpha_rate() const { return alpha_; }

 private:
  double alpha_;
  double reference_;
  double last_ = std::numeric_limits<double>::infinity();
  bool decreasing_ = true;
};

/// Fraction of the energy carried by modes with |k| > k_cut.
double high_k_energy_fraction(const Field& u, double k_cut);

/// Lower growth check log||u(t)|| - log||u(0)|| >= eta t over a history.
struct GrowthProbe {
  int violations = 0;
  /// min over samples of (log||u(t)|| - log||u(0)||) - eta t.
  double worst_margin = std::numeric_limits<double>::infinity();
};

GrowthProbe lower_growth_probe(const History& history, double eta);

struct DiagnosticsRow {
  double t = 0.0;
  double energy = 0.0;
  double grad_norm = 0.0;
  double hyper_norm = 0.0;
  double injection = 0.0;
  double budget_residual = 0.0;
  double gevrey_half_norm = 0.0;
  double gevrey_ratio = 0.0;
  double div_residual = 0.0;
  double nodal_sup_area = std::numeric_limits<double>::quiet_NaN();
  double re_paper = 0.0;
  double re_standard = 0.0;
  double grashof = 0.0;
  double beta_min = 0.0;
  double eps_paper = 0.0;
  double eps_standard = 0.0;
  double leps_paper = 0.0;
  double leps_standard = 0.0;
  bool blowup = false;
};

/// Fixed inputs of the running turbulence numbers.
struct DiagnosticsContext {
  double nu = 1.0;
  double L = 1.0;
  double forcing_scale = 1.0;
  double f_norm = 0.0;
};

/// Builds rows from energy samples, recomputing the running averages over
/// the history seen so far for each new row.
class DiagnosticsRecorder {
 public:
  explicit DiagnosticsRecorder(DiagnosticsContext context);

  /// gevrey and nodal values are NaN when not sampled at this row.
  const DiagnosticsRow& add(const EnergySample& sample, const GevreyReading* gevrey, double nodal_sup);

  const std::vector<DiagnosticsRow>& rows() const { return rows_; }
  const History& history() const { return history_; }
  TurbulenceNumbers numbers() const;

 private:
  DiagnosticsContext context_;
  double lambda1_;
  History history_;
  std::vector<DiagnosticsRow> rows_;
};

/// Column names of the diagnostics CSV, in order.
const std::vector<std::string>& diagnostics_columns();

void write_diagnostics_csv(const std::filesystem::path& path, std::span<const DiagnosticsRow> rows);
std::string format_diagnostics_csv(std::span<const DiagnosticsRow> rows);
std::vector<DiagnosticsRow> read_diagnostics_csv(const std::filesystem::path& path);

}  // namespace hvns
