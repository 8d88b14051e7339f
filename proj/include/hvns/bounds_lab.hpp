#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hvns/spectral_core.hpp"

namespace hvns {

/// Universal constants C1..C11, indexed by their number (slot 0 unused).
/// None of them is known, so every bound value is indicative only.
struct BoundConstants {
  std::array<double, 12> C{1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1};
  double& operator[](int i) { return C.at(std::size_t(i)); }
  double operator[](int i) const { return C.at(std::size_t(i)); }
};

struct BoundInputs {
  std::optional<double> lambda1;
  /// m-th Stokes eigenvalue, see stokes_eigenvalue.
  std::optional<double> lambda_m;
  std::optional<double> m;
  std::optional<double> l_hyper;
  std::optional<double> eps_hyper;
  std::optional<double> beta;
  std::optional<double> alpha;
  std::optional<double> L;
  std::optional<double> nu;
  std::optional<double> G;
  std::optional<double> t;
  /// Macroscopic and dissipation lengths for the l0/l_eps form.
  std::optional<double> l0;
  std::optional<double> l_eps;
  /// ||u0||, only used by the smallness flag.
  std::optional<double> u0_norm;
  BoundConstants constants;
  /// Free-form numbers carried into reports untouched.
  std::map<std::string, double> annotations;
};

enum class BoundKind { C14, C4, C6, C8, C9, T0 };

std::string to_string(BoundKind kind);
/// Accepts "c14", "c4", "c6", "c8", "c9", "t0"; throws DomainError otherwise.
BoundKind parse_bound_kind(const std::string& text);

/// eta = -(eps lambda_m^{l/2} + (1 + beta^2) / (2 beta^2)).
double eta_rate(double eps_hyper, double lambda_m, double l_hyper, double beta);

/// Closed-form value of one bound. Throws MissingInputError when an input of
/// that kind is absent and DomainError for nonpositive inputs or t = 0 in c14.
double bound_value(BoundKind kind, const BoundInputs& inputs);

/// Hypothesis annotations for the inputs that are present. They never gate
/// evaluation.
std::vector<std::string> hypothesis_flags(const BoundInputs& inputs);

/// FNV-1a hash (hex) of every present input, constant and annotation.
std::string inputs_hash(const BoundInputs& inputs);

/// m-th eigenvalue (m >= 1) of the Stokes operator restricted to the band of
/// the grid, counted with multiplicity two per wavevector.
double stokes_eigenvalue(const Grid& grid, std::int64_t m);
/// Number of eigenvalues the band holds.
std::int64_t stokes_mode_count(const Grid& grid);

struct TransferReport {
  /// ||A^{1/2} e^{alpha A^{1/2}} u|| / ||A^{1/2} u||.
  double M_u = 0.0;
  std::vector<double> levels;
  /// ||e^{alpha A^{1/2}} (omega - c)|| / ||omega - c|| per level.
  std::vector<double> ratios;
  int violations = 0;
  /// max over levels of ratio / M_u - 1.
  double worst_excess = 0.0;
};

/// Checks ratio(c) <= M_u (1 + 1e-10) with c subtracted from the mean mode of
/// every vorticity component. Throws DomainError for the zero field.
TransferReport lemma_transfer_check(const Field& u, double alpha, std::span<const double> levels);

struct LogInequality {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

/// a mu (1 + log(mu^2/b^2))^{1/2} against d mu^2 + (a^2/d^2) log(2a/(b d)),
/// holds = lhs <= rhs + 1e-12 |rhs|. Requires a, d > 0 and mu >= b > 0.
LogInequality scalar_log_inequality_check(double a, double d, double mu, double b);

/// |(e^{aA^{1/2}} B(u,u), e^{aA^{1/2}} Au)| divided by
/// ||A^{1/2}u||_G^2 ||Au||_G (1 + log(||Au||_G^2 / (lambda1 ||A^{1/2}u||_G^2)))^{1/2},
/// an empirical lower estimate of the constant. Throws DomainError for u = 0.
double trilinear_log_probe(const Field& u, double alpha_t);

struct ScalingFit {
  double exponent = 0.0;
  double intercept = 0.0;
  /// Root mean square of the log-space residuals.
  double residual = 0.0;
  double exponent_low = 0.0;
  double exponent_high = 0.0;
  double confidence = 0.95;
  int points = 0;
};

/// Least squares fit of log(area) = intercept + exponent log(x), with a
/// Student-t confidence interval on the exponent.
ScalingFit fit_scaling(std::span<const double> x, std::span<const double> area, double confidence = 0.95);

struct BoundEntry {
  BoundKind kind = BoundKind::C9;
  std::string hash;
  double value = 0.0;
  std::vector<std::string> flags;
};

BoundEntry evaluate_bound(BoundKind kind, const BoundInputs& inputs);

struct ScalingStudy {
  std::string label;
  std::vector<double> x;
  std::vector<double> area;
  std::optional<ScalingFit> fit;
  /// Exponent the closed-form bound predicts, for side-by-side reporting.
  double reference_exponent = 0.0;
};

struct BoundReport {
  std::vector<BoundEntry> bounds;
  /// Measured sup nodal area series (t, area).
  std::vector<std::pair<double, double>> nodal_series;
  std::vector<ScalingStudy> studies;
};

std::string format_bound_csv(const BoundReport& report);
std::string format_bound_summary(const BoundReport& report);
/// Writes bounds.csv and bounds_summary.txt into dir.
void write_bound_report(const std::filesystem::path& dir, const BoundReport& report);

}  // namespace hvns
