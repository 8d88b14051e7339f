#include "hvns/nse_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace hvns {

namespace {

// Products of two band-limited fields reach |k_i| <= 2r. On an m-point lattice
// they alias onto |k_i| >= m - 2r, which stays outside the band when m > 3r.
int product_lattice(const Grid& grid) {
  const int r = grid.dealias_radius();
  return 3 * r < grid.n() ? grid.n() : grid.n() + 2;
}

std::string format_time(double t) {
  std::ostringstream os;
  os.precision(17);
  os << t;
  return os.str();
}

void require_solenoidal(const Field& u) {
  if (u.solenoidal()) return;
  if (divergence_defect(u) > 1e-10) throw ContractError("nonlinear term requires a solenoidal field");
}

}  // namespace

void SolverParams::validate() const {
  if (!(nu > 0) || !std::isfinite(nu)) throw DomainError("nu must be positive");
  if (!(eps_hyper >= 0) || !std::isfinite(eps_hyper)) throw DomainError("eps_hyper must be >= 0");
  if (!(l_hyper >= 1) || !std::isfinite(l_hyper)) throw DomainError("l_hyper must be >= 1");
  if (!(dt > 0) || !std::isfinite(dt)) throw DomainError("dt must be positive");
  if (!(cfl_safety > 0) || cfl_safety > 1) throw DomainError("cfl_safety must lie in (0, 1]");
  if (!(T_end >= 0) || !std::isfinite(T_end)) throw DomainError("T_end must be finite and >= 0");
  if (forcing.axis < 0 || forcing.axis > 2) throw DomainError("forcing axis must be 0, 1 or 2");
  if (!std::isfinite(forcing.amplitude)) throw DomainError("forcing amplitude must be finite");
}

Field kolmogorov_force(const Grid& grid, double amplitude, int k_f, int axis) {
  if (k_f < 1 || k_f > grid.dealias_radius()) {
    throw OutOfBandError("forcing wavenumber must lie in [1, " + std::to_string(grid.dealias_radius()) + "]");
  }
  if (axis < 0 || axis > 2) throw DomainError("forcing axis must be 0, 1 or 2");
  Field f(grid);
  f.set_solenoidal(true);
  if (amplitude == 0) return f;
  // sin(q) = (e^{iq} - e^{-iq}) / 2i, so the coefficient at +k_f is -i F0 / 2.
  Wavevector k{0, 0, 0};
  k[(axis + 1) % 3] = k_f;
  Field::ModeVector a = Field::ModeVector::Zero();
  a[axis] = std::complex<double>(0, -0.5 * amplitude);
  f.set_mode(k, a);
  return f;
}

Field build_forcing(const Grid& grid, const ForcingSpec& spec) {
  if (spec.type == ForcingSpec::Type::Kolmogorov) return kolmogorov_force(grid, spec.amplitude, spec.k_f, spec.axis);
  Field f(grid);
  f.set_solenoidal(true);
  return f;
}

Field nonlinear_term(const Field& u, double& speed) {
  require_solenoidal(u);
  const auto& g = u.grid();
  const int m = product_lattice(g);
  auto& fft = thread_transform<double>(m);
  const Field w = curl(u);

  std::array<Eigen::ArrayXd, 3> uu, ww;
  for (int c = 0; c < 3; ++c) {
    fft.to_physical(pad_spectrum(g, u[c], m), uu[c]);
    fft.to_physical(pad_spectrum(g, w[c], m), ww[c]);
  }
  speed = std::sqrt((uu[0].square() + uu[1].square() + uu[2].square()).maxCoeff());

  Field out(g);
  Eigen::ArrayXd cross;
  SpectrumArray<double> spectrum;
  for (int c = 0; c < 3; ++c) {
    const int a = (c + 1) % 3;
    const int b = (c + 2) % 3;
    cross = ww[a] * uu[b] - ww[b] * uu[a];
    fft.to_spectral(cross, spectrum);
    out[c] = m == g.n() ? spectrum : truncate_spectrum(g, spectrum, m);
    out[c][0] = 0;
  }
  out.scale_modes(g.dealias_mask());
  out = leray_project(std::move(out));
  out *= -1.0;
  return out;
}

Field nonlinear_term(const Field& u) {
  double speed = 0;
  return nonlinear_term(u, speed);
}

double max_speed(const Field& u) {
  const auto s = to_physical(u);
  return std::sqrt((s[0].values().square() + s[1].values().square() + s[2].values().square()).maxCoeff());
}

SolverState make_state(const SolverParams& params, const Field& u0, double t0, std::int64_t step0) {
  params.validate();
  const auto& g = u0.grid();
  const double scale = u0.max_abs();
  if (!u0.all_finite()) throw NumericError("initial field has non-finite coefficients");
  if (scale > 0) {
    if (mean_mode_magnitude(u0) > 1e-12 * scale) throw ContractError("initial field must have zero mean");
    if (divergence_defect(u0) > 1e-10) throw ContractError("initial field must be solenoidal");
    const Eigen::ArrayXd outside = 1.0 - g.dealias_mask();
    double leak = 0;
    for (int c = 0; c < 3; ++c) leak = std::max(leak, (outside * u0[c].abs()).maxCoeff());
    if (leak > 1e-12 * scale) throw ContractError("initial field has content outside the 2/3-rule band");
  }
  Field u = dealias(u0);
  u.set_solenoidal(true);
  Field f = build_forcing(g, params.forcing);

  const Eigen::ArrayXd lambda = g.lambda1() * g.k_squared();
  // (nu + eps lambda^{l-1}) lambda keeps l = 1 bitwise equal to viscosity nu + eps.
  auto rate = std::make_shared<Eigen::ArrayXd>((params.nu + params.eps_hyper * lambda.pow(params.l_hyper - 1.0)) * lambda);
  return SolverState{t0, std::move(u), std::move(f), params, step0, std::move(rate), std::nullopt, 0.0};
}

double cfl_limit(const SolverState& state, double speed) {
  if (speed == 0) return std::numeric_limits<double>::infinity();
  return state.params.cfl_safety * state.grid().spacing() / speed;
}

void ensure_nonlinear(SolverState& state) {
  if (state.nonlinear) return;
  double speed = 0;
  state.nonlinear = nonlinear_term(state.u, speed);
  state.speed = speed;
}

Field time_derivative(SolverState& state) {
  ensure_nonlinear(state);
  Field linear = state.u;
  linear.scale_modes(*state.decay_rate);
  Field out = *state.nonlinear + state.f_hat;
  out -= linear;
  return out;
}

void step(SolverState& state, double h) {
  if (!(h > 0) || !std::isfinite(h)) throw DomainError("step size must be positive");
  const Eigen::ArrayXd& rate = *state.decay_rate;
  const Eigen::ArrayXd e_half = (-0.5 * h * rate).exp();
  const Field& u = state.u;
  const Field& f = state.f_hat;
  const double t_new = state.t + h;

  ensure_nonlinear(state);
  const double speed = state.speed;
  if (!std::isfinite(speed)) throw BlowUpError("non-finite velocity at t=" + format_time(state.t), state.t);
  const double limit = cfl_limit(state, speed);
  if (h > limit) {
    throw CflViolation("dt=" + format_time(h) + " exceeds the advective limit " + format_time(limit), limit);
  }
  Field a = *state.nonlinear + f;

  Field u1 = u + (0.5 * h) * a;
  u1.scale_modes(e_half);
  Field b = nonlinear_term(u1);
  b += f;

  Field uh = u;
  uh.scale_modes(e_half);
  Field u2 = uh + (0.5 * h) * b;
  Field c = nonlinear_term(u2);
  c += f;

  Field u3 = uh + h * c;
  u3.scale_modes(e_half);
  Field d = nonlinear_term(u3);
  d += f;

  // E(h)u + h/6 (E(h)a + 2E(h/2)(b + c) + d), factored through E(h/2).
  Field next = u + (h / 6.0) * a;
  next.scale_modes(e_half);
  b += c;
  next += (h / 3.0) * b;
  next.scale_modes(e_half);
  next += (h / 6.0) * d;

  if (!next.all_finite()) throw BlowUpError("non-finite coefficients at t=" + format_time(t_new), t_new);
  next.set_solenoidal(true);
  state.u = std::move(next);
  state.t = t_new;
  ++state.step;
  state.nonlinear.reset();
}

EnergySample measure(SolverState& state) {
  EnergySample s;
  s.t = state.t;
  s.step = state.step;
  const double l2 = norm(state.u);
  s.energy = 0.5 * l2 * l2;
  s.grad_norm = norm(state.u, NormKind::hdot(1));
  s.hyper_norm = norm(state.u, NormKind::hdot(state.params.l_hyper));
  s.injection = inner(state.f_hat, state.u);
  // g = (L u, u) - (f, u) with L = nu A + eps A^l, so g' = (2 L u - f, u_t).
  const Field ut = time_derivative(state);
  Field weight = state.u;
  weight.scale_modes(*state.decay_rate);
  weight *= 2.0;
  weight -= state.f_hat;
  s.budget_slope = inner(weight, ut);
  s.div_residual = divergence_defect(state.u);
  return s;
}

double energy_change(const Field& u0, const Field& u1) { return 0.5 * inner(u1 - u0, u1 + u0); }

double budget_residual(const SolverParams& p, const EnergySample& before, const EnergySample& after,
                       double delta_energy, double h) {
  auto dissipation = [&](const EnergySample& s) {
    return p.nu * s.grad_norm * s.grad_norm + p.eps_hyper * s.hyper_norm * s.hyper_norm;
  };
  const double g0 = dissipation(before) - before.injection;
  const double g1 = dissipation(after) - after.injection;
  return delta_energy / h + 0.5 * (g0 + g1) + h / 12.0 * (before.budget_slope - after.budget_slope);
}

RunRecord integrate(const SolverParams& params, const Field& u0, const RunOptions& options) {
  return run_from(make_state(params, u0), options);
}

RunRecord resume(const SolverParams& params, const std::filesystem::path& checkpoint, const RunOptions& options) {
  const Checkpoint ck = read_checkpoint(checkpoint);
  if (ck.nu != params.nu || ck.eps_hyper != params.eps_hyper || ck.l_hyper != params.l_hyper) {
    throw ContractError("checkpoint " + checkpoint.string() + " was written with different (nu, eps, l)");
  }
  return run_from(make_state(params, ck.field(), ck.t, ck.step), options);
}

RunRecord run_from(SolverState state, const RunOptions& options) {
  const SolverParams& params = state.params;
  const std::int64_t sample_every = std::max<std::int64_t>(1, options.sample_every);
  RunRecord record{state, {}, false, 0.0, {}, state.well_posed_regime()};

  EnergySample prev = measure(state);
  record.samples.push_back(prev);
  for (const auto& obs : options.observers) {
    if (obs.callback && obs.every > 0 && state.step % obs.every == 0) obs.callback(state);
  }

  const double tol = 1e-6 * params.dt;
  const double min_step = 1e-14 * std::max(1.0, params.T_end);
  while (params.T_end - state.t > tol) {
    if (options.stop_after_step >= 0 && state.step >= options.stop_after_step) break;
    double h = std::min(params.dt, params.T_end - state.t);
    const Field before = state.u;
    try {
      if (params.adaptive) {
        const double speed = max_speed(state.u);
        if (!std::isfinite(speed)) throw BlowUpError("non-finite velocity at t=" + format_time(state.t), state.t);
        h = std::min(h, cfl_limit(state, speed));
        if (h < min_step) throw BlowUpError("step size collapsed at t=" + format_time(state.t), state.t);
      }
      step(state, h);
    } catch (const BlowUpError& e) {
      record.blowup = true;
      record.blowup_time = e.time();
      record.message = e.what();
      EnergySample bad;
      bad.t = e.time();
      bad.step = state.step + 1;
      bad.dt = h;
      const double nan = std::numeric_limits<double>::quiet_NaN();
      bad.energy = bad.grad_norm = bad.hyper_norm = bad.injection = bad.budget_residual = bad.div_residual = nan;
      bad.blowup = true;
      record.samples.push_back(bad);
      break;
    }

    if (options.checkpoint_every > 0 && state.step % options.checkpoint_every == 0) {
      write_checkpoint(options.checkpoint_path, state);
      // Continue from exactly what a restart would read back.
      state.u = canonicalize_from_samples(state.u);
      state.u.set_solenoidal(true);
      state.nonlinear.reset();
    }

    EnergySample cur = measure(state);
    cur.dt = h;
    cur.budget_residual = budget_residual(params, prev, cur, energy_change(before, state.u), h);
    const bool at_end = !(params.T_end - state.t > tol);
    if (state.step % sample_every == 0 || at_end) record.samples.push_back(cur);
    prev = cur;

    for (const auto& obs : options.observers) {
      if (obs.callback && obs.every > 0 && state.step % obs.every == 0) obs.callback(state);
    }
  }
  if (!record.blowup && record.samples.back().step != state.step) record.samples.push_back(prev);
  // Observers always see the final state once.
  for (const auto& obs : options.observers) {
    if (obs.callback && obs.every > 0 && state.step % obs.every != 0) obs.callback(state);
  }
  record.final_state = std::move(state);
  return record;
}

}  // namespace hvns
