#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "hvns/nse_solver.hpp"
#include "test_support.hpp"

using namespace hvns;
using namespace hvns::test;

namespace {

SolverParams shear_params() {
  SolverParams p;
  p.nu = 1.0;
  p.eps_hyper = 0.1;
  p.l_hyper = 2.0;
  p.dt = 1e-3;
  return p;
}

SolverParams forced_params(double T) {
  SolverParams p;
  p.nu = 0.05;
  p.eps_hyper = 0.01;
  p.l_hyper = 2.0;
  p.dt = 5e-3;
  p.T_end = T;
  p.forcing = {ForcingSpec::Type::Kolmogorov, 1.0, 1, 0};
  return p;
}

double relative_difference(const Field& a, const Field& b) { return norm(a - b) / norm(b); }

// -P[(u.grad)u] on the dealias band by direct convolution over the full lattice.
Field brute_force_nonlinear(const Field& u) {
  const auto& g = u.grid();
  const int r = g.n() / 2 - 1;
  const int band = g.dealias_radius();
  Field out(g);
  for (int kz = 0; kz <= band; ++kz)
    for (int ky = -band; ky <= band; ++ky)
      for (int kx = -band; kx <= band; ++kx) {
        Field::ModeVector acc = Field::ModeVector::Zero();
        for (int pz = -r; pz <= r; ++pz)
          for (int py = -r; py <= r; ++py)
            for (int px = -r; px <= r; ++px) {
              const Wavevector q{kx - px, ky - py, kz - pz};
              if (std::abs(q[0]) > r || std::abs(q[1]) > r || std::abs(q[2]) > r) continue;
              const auto up = u.mode({px, py, pz});
              const auto uq = u.mode(q);
              const std::complex<double> adv = std::complex<double>(0, g.unit()) *
                                               (up[0] * double(q[0]) + up[1] * double(q[1]) + up[2] * double(q[2]));
              acc += adv * uq;
            }
        if (kz == 0 && (ky < 0 || (ky == 0 && kx < 0))) continue;
        out.set_mode({kx, ky, kz}, acc);
      }
  out = leray_project(std::move(out));
  out *= -1.0;
  return out;
}

// Physical samples of sum_i a_i d_i b_j on a 3/2-padded lattice, returned in spectral form.
Field padded_advection(const Field& a, const Field& b) {
  const auto& g = a.grid();
  const int m = 3 * g.n() / 2;
  auto& fft = thread_transform<double>(m);
  const std::array<Eigen::ArrayXi, 3> k{g.kx(), g.ky(), g.kz()};
  std::array<Eigen::ArrayXd, 3> aa;
  for (int c = 0; c < 3; ++c) fft.to_physical(pad_spectrum(g, a[c], m), aa[c]);
  Field out(g);
  for (int j = 0; j < 3; ++j) {
    Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(Index(m) * m * m);
    for (int i = 0; i < 3; ++i) {
      const SpectrumArray<double> deriv =
          std::complex<double>(0, g.unit()) * k[i].cast<double>().cast<std::complex<double>>() * b[j];
      Eigen::ArrayXd d;
      fft.to_physical(pad_spectrum(g, deriv, m), d);
      acc += aa[i] * d;
    }
    SpectrumArray<double> spec;
    fft.to_spectral(acc, spec);
    out[j] = truncate_spectrum(g, spec, m);
  }
  return dealias(out);
}

std::filesystem::path temp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "hvns_solver_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("kolmogorov forcing is sin y along x with the analytic norm") {
  const Grid g = build_grid(8, 2 * kPi);
  const Field f = kolmogorov_force(g, 1.0, 1, 0);
  const auto s = to_physical(f);
  for (int iz = 0; iz < 8; iz += 3)
    for (int iy = 0; iy < 8; ++iy)
      for (int ix = 0; ix < 8; ix += 2) {
        CHECK(s[0](ix, iy, iz) == doctest::Approx(std::sin(s[0].coordinate(iy))).epsilon(1e-14));
        CHECK(std::abs(s[1](ix, iy, iz)) < 1e-15);
        CHECK(std::abs(s[2](ix, iy, iz)) < 1e-15);
      }
  CHECK(norm(f) == doctest::Approx(std::sqrt(std::pow(2 * kPi, 3) / 2)).epsilon(1e-14));
  CHECK(divergence_defect(f) == 0.0);
  CHECK(mean_mode_magnitude(f) == 0.0);
  CHECK(kolmogorov_force(g, 0.0, 1, 0).max_abs() == 0.0);
  CHECK_THROWS_AS(kolmogorov_force(g, 1.0, 3, 0), OutOfBandError);
  CHECK_THROWS_AS(kolmogorov_force(g, 1.0, 0, 0), OutOfBandError);
}

TEST_CASE("nonlinear term vanishes on shear flow") {
  const Grid g = build_grid(16, 2 * kPi);
  const Field n = nonlinear_term(shear_field(g));
  CHECK(n.max_abs() < 1e-15);
}

TEST_CASE("nonlinear term matches a brute-force convolution on n=8") {
  const Grid g = build_grid(8, 2 * kPi);
  SUBCASE("two modes: output on k1 +- k2 only") {
    std::vector<ModeSpec<double>> modes{
        {{1, 0, 0}, Field::ModeVector({0, 0.5}, {0.3, 0}, {0, -0.2})},
        {{0, 1, 1}, Field::ModeVector({0.4, 0.1}, {0, 0.25}, {0.1, 0})},
    };
    Field u = leray_project(synthesize_modes<double>(g, modes));
    const Field got = nonlinear_term(u);
    const Field want = brute_force_nonlinear(u);
    CHECK(norm(got - want) <= 1e-13 * norm(want));
    CHECK(norm(want) > 0);
    for (Index i = 0; i < g.spectral_size(); ++i) {
      const Wavevector k{g.kx()[i], g.ky()[i], g.kz()[i]};
      const bool sum_or_diff = (std::abs(k[0]) == 1 && std::abs(k[1]) == 1 && std::abs(k[2]) == 1) ||
                               (k[0] == 0 && std::abs(k[1]) == 0 && k[2] == 0);
      const bool self = (std::abs(k[0]) == 2 && k[1] == 0 && k[2] == 0) || (k[0] == 0 && std::abs(k[1]) == 2 && std::abs(k[2]) == 2);
      if (!sum_or_diff && !self) {
        for (int c = 0; c < 3; ++c) CHECK(std::abs(got[c][i]) < 1e-15);
      }
    }
  }
  SUBCASE("random band-limited field") {
    const Field u = random_field<double>(g, RandomFieldSpec{11, 2.0, 2.0, 1.0});
    const Field got = nonlinear_term(u);
    const Field want = brute_force_nonlinear(u);
    CHECK(norm(got - want) <= 1e-13 * norm(want));
  }
}

TEST_CASE("nonlinear term is solenoidal, band limited and energy neutral") {
  for (int n : {16, 18, 24}) {
    const Grid g = build_grid(n, 2 * kPi);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const Field u = random_field<double>(g, RandomFieldSpec{seed, 4.0, 3.0, 2.0});
      const Field b = nonlinear_term(u);
      CHECK(divergence_defect(b) <= 1e-12);
      CHECK(mean_mode_magnitude(b) == 0.0);
      CHECK(hermitian_defect(b) <= 1e-13);
      CHECK((b[0].abs() * (1.0 - g.dealias_mask())).maxCoeff() == 0.0);
      const double scale = norm(u) * std::pow(norm(u, NormKind::hdot(1)), 2);
      CHECK(std::abs(inner(b, u)) <= 1e-11 * scale);
    }
  }
}

TEST_CASE("nonlinear term rejects non-solenoidal input") {
  const Grid g = build_grid(8, 2 * kPi);
  std::vector<ModeSpec<double>> modes{{{1, 0, 0}, Field::ModeVector(1.0, 0, 0)}};
  CHECK_THROWS_AS(nonlinear_term(synthesize_modes<double>(g, modes)), ContractError);
}

TEST_CASE("curl of the momentum residual equals the vorticity residual") {
  const Grid g = build_grid(16, 2 * kPi);
  const SolverParams p = forced_params(0.0);
  const SolverState s = make_state(p, random_field<double>(g, RandomFieldSpec{5, 4.0, 2.5, 1.0}));
  const Field& u = s.u;
  const Field w = curl(u);

  Field momentum = p.eps_hyper * stokes_power(u, p.l_hyper) + p.nu * stokes_power(u, 1.0);
  momentum -= nonlinear_term(u);
  momentum -= s.f_hat;

  Field vorticity = p.eps_hyper * stokes_power(w, p.l_hyper) + p.nu * stokes_power(w, 1.0);
  vorticity += padded_advection(u, w);
  vorticity -= padded_advection(w, u);
  vorticity -= curl(s.f_hat);

  const Field lhs = curl(momentum);
  CHECK(norm(lhs - vorticity) <= 1e-9 * norm(vorticity));
}

TEST_CASE("step decays shear flow exactly") {
  const Grid g = build_grid(16, 2 * kPi);
  SolverState s = make_state(shear_params(), shear_field(g));
  const Field u0 = s.u;
  step(s, 1e-3);
  const Field expected = std::exp(-1.1e-3) * u0;
  CHECK(relative_difference(s.u, expected) <= 1e-10);
  CHECK(s.t == 1e-3);
  CHECK(s.step == 1);
}

TEST_CASE("zero field without forcing stays zero") {
  const Grid g = build_grid(16, 2 * kPi);
  SolverState s = make_state(shear_params(), Field(g));
  for (int i = 0; i < 5; ++i) step(s, 1e-2);
  CHECK(s.u.max_abs() == 0.0);
}

TEST_CASE("hyperviscosity with l = 1 equals plain viscosity nu + eps") {
  const Grid g = build_grid(16, 2 * kPi);
  const Field u0 = random_field<double>(g, RandomFieldSpec{3, 4.0, 2.0, 1.0});
  SolverParams a = forced_params(0.0);
  a.l_hyper = 1.0;
  a.eps_hyper = 0.02;
  SolverParams b = a;
  b.nu = a.nu + a.eps_hyper;
  b.eps_hyper = 0.0;
  SolverState sa = make_state(a, u0);
  SolverState sb = make_state(b, u0);
  for (int i = 0; i < 100; ++i) {
    step(sa, 5e-3);
    step(sb, 5e-3);
  }
  CHECK(norm(sa.u - sb.u) <= 1e-13 * norm(sb.u));
  CHECK_FALSE(sa.well_posed_regime());
}

TEST_CASE("solver preserves solenoidality, Hermitian symmetry and zero mean") {
  const Grid g = build_grid(16, 2 * kPi);
  SolverState s = make_state(forced_params(0.0), random_field<double>(g, RandomFieldSpec{2, 4.0, 2.0, 1.0}));
  for (int i = 0; i < 40; ++i) {
    step(s, 5e-3);
    REQUIRE(divergence_defect(s.u) <= 1e-12);
    REQUIRE(hermitian_defect(s.u) <= 1e-13);
    REQUIRE(mean_mode_magnitude(s.u) == 0.0);
  }
}

TEST_CASE("make_state validates parameters and the initial field") {
  const Grid g = build_grid(16, 2 * kPi);
  SolverParams p = shear_params();
  p.l_hyper = 0.5;
  CHECK_THROWS_AS(make_state(p, shear_field(g)), DomainError);
  p = shear_params();
  p.nu = 0;
  CHECK_THROWS_AS(make_state(p, shear_field(g)), DomainError);
  std::vector<ModeSpec<double>> gradient{{{1, 0, 0}, Field::ModeVector(1.0, 0, 0)}};
  CHECK_THROWS_AS(make_state(shear_params(), synthesize_modes<double>(g, gradient)), ContractError);
  std::vector<ModeSpec<double>> high{{{0, 7, 0}, Field::ModeVector(1.0, 0, 0)}};
  CHECK_THROWS_AS(make_state(shear_params(), synthesize_modes<double>(g, high)), ContractError);
}

TEST_CASE("step enforces the advective CFL limit") {
  const Grid g = build_grid(16, 2 * kPi);
  SolverState s = make_state(shear_params(), shear_field(g, 10.0));
  // max|u| = 10, dx = 2 pi / 16, safety 0.5.
  const double limit = 0.5 * (2 * kPi / 16) / 10.0;
  try {
    step(s, 0.1);
    FAIL("expected a CFL violation");
  } catch (const CflViolation& e) {
    CHECK(e.suggested_dt() == doctest::Approx(limit).epsilon(1e-12));
  }
  CHECK(s.step == 0);
  CHECK_NOTHROW(step(s, 0.9 * limit));

  SolverParams p = shear_params();
  p.dt = 0.1;
  p.adaptive = true;
  p.T_end = 0.2;
  const RunRecord rec = integrate(p, shear_field(g, 10.0));
  CHECK_FALSE(rec.blowup);
  CHECK(rec.final_state.t == doctest::Approx(0.2).epsilon(1e-12));
  // The shear amplitude at the start of each step follows from the energy 1/4 A^2 |Omega|.
  for (std::size_t i = 1; i < rec.samples.size(); ++i) {
    const double amp = std::sqrt(4 * rec.samples[i - 1].energy / g.volume());
    CHECK(rec.samples[i].dt * amp <= 0.5 * g.spacing() * (1 + 1e-12));
  }
}

TEST_CASE("non-finite coefficients raise blow-up with a time stamp") {
  const Grid g = build_grid(16, 2 * kPi);
  SolverParams p = shear_params();
  p.T_end = 0.01;
  SolverState s = make_state(p, shear_field(g));
  s.t = 0.25;
  s.u[0][5] = std::numeric_limits<double>::quiet_NaN();
  try {
    step(s, 1e-3);
    FAIL("expected blow-up");
  } catch (const BlowUpError& e) {
    CHECK(e.time() == 0.25);
  }
  s.params.T_end = 0.5;
  const RunRecord rec = run_from(s, {});
  CHECK(rec.blowup);
  CHECK(rec.blowup_time == 0.25);
  REQUIRE(rec.samples.size() == 2);
  CHECK(rec.samples.back().blowup);
}

TEST_CASE("integrate with T_end = 0 records only the initial sample") {
  const Grid g = build_grid(16, 2 * kPi);
  int calls = 0;
  RunOptions opt;
  opt.observers.push_back({1, [&](const SolverState&) { ++calls; }});
  const RunRecord rec = integrate(shear_params(), shear_field(g), opt);
  REQUIRE(rec.samples.size() == 1);
  CHECK(rec.samples[0].t == 0.0);
  CHECK(rec.samples[0].energy == doctest::Approx(std::pow(2 * kPi, 3) / 4).epsilon(1e-14));
  CHECK(calls == 1);
}

TEST_CASE("shear decay run reaches E(0) exp(-2.2) at T = 1") {
  const Grid g = build_grid(16, 2 * kPi);
  SolverParams p = shear_params();
  p.T_end = 1.0;
  RunOptions opt;
  opt.sample_every = 100;
  std::vector<double> seen;
  opt.observers.push_back({250, [&](const SolverState& s) { seen.push_back(s.t); }});
  const RunRecord rec = integrate(p, shear_field(g), opt);
  CHECK(rec.final_state.step == 1000);
  CHECK(rec.final_state.t == doctest::Approx(1.0).epsilon(1e-12));
  const double e0 = rec.samples.front().energy;
  CHECK(rec.samples.back().energy == doctest::Approx(e0 * std::exp(-2.2)).epsilon(1e-9));
  CHECK(rec.samples.size() == 11);
  CHECK(seen.size() == 5);
  // Linear decay satisfies the budget to integrator accuracy.
  for (const auto& s : rec.samples) CHECK(std::abs(s.budget_residual) < 1e-5 * e0);
}

TEST_CASE("restart from a checkpoint reproduces the uninterrupted run bitwise") {
  const Grid g = build_grid(16, 2 * kPi);
  SolverParams p = forced_params(0.2);
  const Field u0 = random_field<double>(g, RandomFieldSpec{9, 4.0, 2.0, 1.0});
  const auto path_a = temp_path("full.hvns");
  const auto path_b = temp_path("killed.hvns");

  RunOptions full;
  full.checkpoint_every = 20;
  full.checkpoint_path = path_a;
  const RunRecord uninterrupted = integrate(p, u0, full);

  RunOptions killed = full;
  killed.checkpoint_path = path_b;
  killed.stop_after_step = 20;
  const RunRecord first = integrate(p, u0, killed);
  CHECK(first.final_state.step == 20);
  CHECK(first.final_state.t == doctest::Approx(0.1).epsilon(1e-12));

  RunOptions rest = full;
  rest.checkpoint_path = path_b;
  const RunRecord resumed = resume(p, path_b, rest);
  CHECK(resumed.final_state.step == uninterrupted.final_state.step);
  CHECK(resumed.final_state.t == uninterrupted.final_state.t);
  for (int c = 0; c < 3; ++c) CHECK((resumed.final_state.u[c] == uninterrupted.final_state.u[c]).all());
}

TEST_CASE("checkpoint round trip and I/O errors") {
  const Grid g = build_grid(8, 3.0);
  SolverParams p = shear_params();
  SolverState s = make_state(p, random_field<double>(g, RandomFieldSpec{4, 4.0, 2.0, 1.0}), 0.75, 42);
  const auto path = temp_path("roundtrip.hvns");
  write_checkpoint(path, s);
  const Checkpoint ck = read_checkpoint(path);
  CHECK(ck.n == 8);
  CHECK(ck.L == 3.0);
  CHECK(ck.t == 0.75);
  CHECK(ck.step == 42);
  CHECK(ck.nu == p.nu);
  CHECK(ck.eps_hyper == p.eps_hyper);
  CHECK(ck.l_hyper == p.l_hyper);
  CHECK(norm(ck.field() - s.u) <= 1e-14 * norm(s.u));
  CHECK(std::filesystem::file_size(path) == std::string("HVNS1 hyperviscous NSE velocity samples\n").size() + 56 + 3 * 512 * 8);

  {
    std::ifstream is(path, std::ios::binary);
    std::string first;
    std::getline(is, first);
    CHECK(first.rfind("HVNS1", 0) == 0);
  }

  CHECK_THROWS_AS(read_checkpoint(temp_path("missing.hvns")), IoError);
  const auto bad = temp_path("bad.hvns");
  std::ofstream(bad) << "NOPE\n";
  CHECK_THROWS_AS(read_checkpoint(bad), IoError);
  CHECK_THROWS_AS(write_checkpoint("/nonexistent-dir/x/y.hvns", s), IoError);

  SolverParams other = p;
  other.nu = 2.0;
  CHECK_THROWS_AS(resume(other, path, {}), ContractError);
}

TEST_CASE("budget residual is second order in dt") {
  const Grid g = build_grid(16, 2 * kPi);
  const Field u0 = random_field<double>(g, RandomFieldSpec{1, 4.0, 2.0, 0.5});
  double worst[2] = {0, 0};
  const double dts[2] = {2e-3, 1e-3};
  for (int i = 0; i < 2; ++i) {
    SolverParams p = forced_params(0.02);
    p.dt = dts[i];
    const RunRecord rec = integrate(p, u0);
    for (std::size_t j = 1; j < rec.samples.size(); ++j) worst[i] = std::max(worst[i], std::abs(rec.samples[j].budget_residual));
  }
  MESSAGE("budget residual ratio " << worst[0] / worst[1]);
  CHECK(worst[0] / worst[1] >= 4.0);
}
