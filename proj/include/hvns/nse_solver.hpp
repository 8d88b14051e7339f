#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hvns/spectral_core.hpp"

namespace hvns {

/// Time-independent body force. Kolmogorov forcing drives component `axis`
/// with F0 sin(2 pi k_f x_{axis+1} / L), e.g. axis 0 gives (F0 sin(k_f y), 0, 0).
struct ForcingSpec {
  enum class Type { None, Kolmogorov };
  Type type = Type::None;
  double amplitude = 0.0;
  int k_f = 1;
  int axis = 0;
};

struct SolverParams {
  double nu = 1.0;
  double eps_hyper = 0.0;
  double l_hyper = 1.0;
  /// Fixed step, or the upper bound on the step when `adaptive` is set.
  double dt = 1e-3;
  bool adaptive = false;
  double cfl_safety = 0.5;
  double T_end = 0.0;
  ForcingSpec forcing;

  /// Throws DomainError on the first violated constraint.
  void validate() const;
};

/// The hyperviscous system is only known to be well posed for l >= 5/4 in 3D.
inline constexpr double kWellPosedHyperExponent = 1.25;

Field kolmogorov_force(const Grid& grid, double amplitude, int k_f, int axis);
Field build_forcing(const Grid& grid, const ForcingSpec& spec);

/// -P[(u.grad)u] restricted to the 2/3-rule band, from the rotational form
/// omega x u with products taken on a lattice where they do not alias into the band.
Field nonlinear_term(const Field& u);

/// nonlinear_term plus the largest collocation speed of u.
Field nonlinear_term(const Field& u, double& max_speed);

/// Largest |u(x)| over the collocation points.
double max_speed(const Field& u);

struct SolverState {
  double t = 0.0;
  Field u;
  Field f_hat;
  SolverParams params;
  std::int64_t step = 0;
  /// nu lambda_k + eps lambda_k^l per stored mode.
  std::shared_ptr<const Eigen::ArrayXd> decay_rate;
  /// nonlinear_term(u) and max|u| for the current u, filled lazily and reused by the next step.
  std::optional<Field> nonlinear;
  double speed = 0.0;

  const Grid& grid() const { return u.grid(); }
  bool well_posed_regime() const { return params.l_hyper >= kWellPosedHyperExponent; }
};

/// Validate params and the initial field and attach forcing and decay tables.
/// u0 must be solenoidal, mean-zero and supported inside the 2/3-rule band.
SolverState make_state(const SolverParams& params, const Field& u0, double t0 = 0.0, std::int64_t step0 = 0);

/// Advective step limit cfl_safety * dx / max|u| (infinite for a zero field).
double cfl_limit(const SolverState& state, double speed);

/// Fill state.nonlinear / state.speed for the current u if absent.
void ensure_nonlinear(SolverState& state);

/// du/dt = nonlinear_term(u) + f - (nu A + eps A^l) u.
Field time_derivative(SolverState& state);

/// One integrating-factor RK4 step of length dt. Throws CflViolation when dt
/// exceeds the advective limit and BlowUpError on non-finite coefficients.
void step(SolverState& state, double dt);

/// Energy-budget terms of the current state.
struct EnergySample {
  double t = 0.0;
  std::int64_t step = 0;
  double dt = 0.0;
  double energy = 0.0;
  double grad_norm = 0.0;
  double hyper_norm = 0.0;
  double injection = 0.0;
  /// d/dt of (dissipation - injection), used by the budget quadrature.
  double budget_slope = 0.0;
  /// Budget defect of the step that produced this state (0 at the first sample).
  double budget_residual = 0.0;
  double div_residual = 0.0;
  bool blowup = false;
};

EnergySample measure(SolverState& state);

/// (E1 - E0)/h + (1/h) int (D - I) dt with D = nu|A^{1/2}u|^2 + eps|A^{l/2}u|^2 and
/// I = (f,u). The integral uses the endpoint-corrected trapezoid
/// h/2 (g0 + g1) + h^2/12 (g0' - g1'), so the quadrature error is O(h^4).
/// delta_energy = E1 - E0 is passed separately so it can be formed without cancellation.
double budget_residual(const SolverParams& params, const EnergySample& before, const EnergySample& after,
                       double delta_energy, double h);

/// E(u1) - E(u0) evaluated as (u1 - u0, u1 + u0)/2.
double energy_change(const Field& u0, const Field& u1);

struct Observer {
  std::int64_t every = 1;
  std::function<void(const SolverState&)> callback;
};

struct RunOptions {
  /// Energy samples are recorded every `sample_every` steps, plus the first and last state.
  std::int64_t sample_every = 1;
  std::vector<Observer> observers;
  std::int64_t checkpoint_every = 0;
  std::filesystem::path checkpoint_path;
  /// Stop after this many total steps (negative: run to T_end). Simulates an interrupted run.
  std::int64_t stop_after_step = -1;
};

struct RunRecord {
  SolverState final_state;
  std::vector<EnergySample> samples;
  bool blowup = false;
  double blowup_time = 0.0;
  std::string message;
  bool well_posed_regime = true;
};

/// Advance u0 to params.T_end. A blow-up ends the run early with a final
/// sample flagged blowup; CFL violations in fixed-step mode propagate.
RunRecord integrate(const SolverParams& params, const Field& u0, const RunOptions& options = {});

/// Continue a run from a checkpoint written by integrate with the same params.
RunRecord resume(const SolverParams& params, const std::filesystem::path& checkpoint, const RunOptions& options = {});

/// Continue from an existing state.
RunRecord run_from(SolverState state, const RunOptions& options);

// Checkpoint files.

struct Checkpoint {
  int n = 0;
  double L = 0.0;
  double t = 0.0;
  double nu = 0.0;
  double eps_hyper = 0.0;
  double l_hyper = 0.0;
  std::int64_t step = 0;
  /// Collocation samples per component, x fastest.
  std::array<Eigen::ArrayXd, 3> samples;

  Field field() const;
};

inline constexpr const char* kCheckpointMagic = "HVNS1";

void write_checkpoint(const std::filesystem::path& path, const SolverState& state);
Checkpoint read_checkpoint(const std::filesystem::path& path);

/// The field reconstructed from its own collocation samples (transform,
/// truncate to the band, project). A restart from a checkpoint starts from
/// exactly this field.
Field canonicalize_from_samples(const Field& u);

}  // namespace hvns
