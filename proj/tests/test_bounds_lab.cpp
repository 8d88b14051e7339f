#include <random>

#include "doctest.h"
#include "hvns/bounds_lab.hpp"
#include "hvns/nse_solver.hpp"
#include "test_support.hpp"

using namespace hvns;
using namespace hvns::test;

namespace {

bool close(double a, double b, double rel) { return std::abs(a - b) <= rel * std::abs(b); }

Field single_mode_y(const Grid& g) { return shear_field(g); }

}  // namespace

TEST_CASE("eta rate") {
  CHECK(eta_rate(0.1, 4.0, 2.0, 1.0) == doctest::Approx(-1.4).epsilon(1e-15));
  CHECK(eta_rate(0.0, 4.0, 2.0, 3.0) == doctest::Approx(-(1 + 9.0) / 18.0).epsilon(1e-15));
  CHECK(eta_rate(0.1, 4.0, 2.0, 1e8) == doctest::Approx(-0.4 - 0.5).epsilon(1e-12));
  CHECK_THROWS_AS(eta_rate(0.1, 4.0, 2.0, 0.0), DomainError);
  CHECK_THROWS_AS(eta_rate(0.1, 0.0, 2.0, 1.0), DomainError);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int i = 0; i < 1000; ++i) CHECK(eta_rate(u(rng), 0.01 + u(rng), 1 + u(rng), 0.01 + u(rng)) < 0);
}

TEST_CASE("bound formulas reproduce hand substitutions") {
  BoundInputs in;
  in.G = 1e6;
  in.l_hyper = 3;
  CHECK(close(bound_value(BoundKind::C9, in), 1000.0, 1e-12));
  in.l_hyper = 2;
  CHECK(close(bound_value(BoundKind::C9, in), 100.0, 1e-12));
  in.l_hyper = 1;
  CHECK(close(bound_value(BoundKind::C9, in), std::pow(1e6, 1.0 / 6), 1e-15));

  BoundInputs c4;
  c4.lambda_m = 4;
  c4.l_hyper = 2;
  CHECK(close(bound_value(BoundKind::C4, c4), 4.0, 1e-12));

  BoundInputs t0;
  t0.L = 2 * kPi;
  t0.nu = 1;
  t0.lambda1 = 1;
  CHECK(close(bound_value(BoundKind::T0, t0), 4 * kPi, 1e-12));

  BoundInputs c6;
  c6.m = 8;
  c6.l_hyper = 3;
  c6.constants[8] = 2.5;
  CHECK(close(bound_value(BoundKind::C6, c6), 2.5 * 8, 1e-14));

  BoundInputs c8;
  c8.l0 = 10;
  c8.l_eps = 0.01;
  c8.l_hyper = 1;
  CHECK(close(bound_value(BoundKind::C8, c8), 10.0, 1e-14));

  BoundInputs c14;
  c14.L = 1;
  c14.lambda1 = 1;
  c14.lambda_m = std::exp(2.0);
  c14.alpha = 1;
  c14.beta = 1;
  c14.l_hyper = 2;
  c14.eps_hyper = 0;
  c14.t = 1;
  // 1 + 1 + 1*t, times e^{1}.
  CHECK(close(bound_value(BoundKind::C14, c14), 3 * std::exp(1.0), 1e-14));
}

TEST_CASE("bound inputs are checked") {
  BoundInputs in;
  CHECK_THROWS_AS(bound_value(BoundKind::C9, in), MissingInputError);
  in.G = 10;
  CHECK_THROWS_AS(bound_value(BoundKind::C9, in), MissingInputError);
  in.l_hyper = 2;
  CHECK_NOTHROW(bound_value(BoundKind::C9, in));
  in.G = -1;
  CHECK_THROWS_AS(bound_value(BoundKind::C9, in), DomainError);

  BoundInputs c14;
  c14.L = 1;
  c14.lambda1 = 1;
  c14.lambda_m = 4;
  c14.alpha = 1;
  c14.beta = 1;
  c14.l_hyper = 2;
  c14.eps_hyper = 0.1;
  CHECK_THROWS_AS(bound_value(BoundKind::C14, c14), MissingInputError);
  c14.t = 0;
  CHECK_THROWS_AS(bound_value(BoundKind::C14, c14), DomainError);

  CHECK(parse_bound_kind("c14") == BoundKind::C14);
  CHECK(parse_bound_kind("t0") == BoundKind::T0);
  CHECK_THROWS_AS(parse_bound_kind("c7"), DomainError);
}

TEST_CASE("c9 grows with G and with l above G = 1") {
  BoundInputs in;
  for (double l : {1.0, 1.5, 2.0, 3.0, 4.0}) {
    in.l_hyper = l;
    double previous = 0;
    for (double G = 1.5; G < 1e8; G *= 1.7) {
      in.G = G;
      const double v = bound_value(BoundKind::C9, in);
      CHECK(v > previous);
      previous = v;
    }
  }
  for (double G : {1.01, 2.0, 1e3, 1e7}) {
    in.G = G;
    double previous = 0;
    for (double l = 1.0; l <= 4.0; l += 0.25) {
      in.l_hyper = l;
      const double v = bound_value(BoundKind::C9, in);
      CHECK(v > previous);
      previous = v;
    }
  }
}

TEST_CASE("c14 blows up at small t and grows at large t") {
  BoundInputs in;
  in.L = 2 * kPi;
  in.lambda1 = 1;
  in.lambda_m = 9;
  in.alpha = 0.25;
  in.beta = 2;
  in.l_hyper = 2;
  in.eps_hyper = 0.01;
  std::vector<double> values;
  for (double t = 1e-3; t <= 1e4; t *= 2) {
    in.t = t;
    values.push_back(bound_value(BoundKind::C14, in));
  }
  CHECK(std::isinf(values.front()));
  in.t = 1e-2;
  const double early = bound_value(BoundKind::C14, in);
  in.t = 1e-1;
  CHECK(early > bound_value(BoundKind::C14, in));
  // Eventually increasing: the last third of the grid is monotone.
  for (std::size_t i = 2 * values.size() / 3; i + 1 < values.size(); ++i) CHECK(values[i + 1] > values[i]);
}

TEST_CASE("hypothesis flags annotate and never gate") {
  BoundInputs in;
  in.nu = 1;
  in.lambda1 = 1;
  in.alpha = 0.2;
  in.beta = 0.3;
  in.u0_norm = 0.5;
  CHECK(hypothesis_flags(in).empty());
  in.alpha = 0.3;
  in.beta = 1.0;
  in.u0_norm = 2.0;
  const auto flags = hypothesis_flags(in);
  CHECK(flags == std::vector<std::string>{"alpha > nu*lambda1^(1/2)/4", "beta > nu*lambda1/(2*sqrt(2))",
                                          "||u0|| > C3*nu*lambda1^(1/2)"});
  in.beta = 6.0;
  CHECK(hypothesis_flags(in).size() == 4);
  in.G = 1e6;
  in.l_hyper = 3;
  const auto entry = evaluate_bound(BoundKind::C9, in);
  CHECK(entry.flags.size() == 4);
  CHECK(close(entry.value, 1000.0, 1e-12));
}

TEST_CASE("inputs hash is stable and sensitive") {
  BoundInputs a;
  a.G = 1e6;
  a.l_hyper = 3;
  BoundInputs b = a;
  CHECK(inputs_hash(a) == inputs_hash(b));
  CHECK(inputs_hash(a).size() == 16);
  b.constants[11] = 2;
  CHECK(inputs_hash(a) != inputs_hash(b));
  b = a;
  b.annotations["rho"] = 1;
  CHECK(inputs_hash(a) != inputs_hash(b));
}

TEST_CASE("Stokes eigenvalue sequence of the band") {
  const Grid g = build_grid(16, 2 * kPi);
  CHECK(stokes_mode_count(g) == 2 * (11 * 11 * 11 - 1));
  CHECK(stokes_eigenvalue(g, 1) == 1.0);
  CHECK(stokes_eigenvalue(g, 12) == 1.0);
  CHECK(stokes_eigenvalue(g, 13) == 2.0);
  CHECK(stokes_eigenvalue(g, 36) == 2.0);
  CHECK(stokes_eigenvalue(g, 37) == 3.0);
  CHECK(stokes_eigenvalue(g, stokes_mode_count(g)) == 75.0);
  CHECK_THROWS_AS(stokes_eigenvalue(g, 0), DomainError);
  CHECK_THROWS_AS(stokes_eigenvalue(g, stokes_mode_count(g) + 1), RangeError);
  const Grid h = build_grid(16, 1.0);
  CHECK(close(stokes_eigenvalue(h, 13), 2 * h.lambda1(), 1e-15));
  // Nondecreasing in m.
  double previous = 0;
  for (std::int64_t m = 1; m <= stokes_mode_count(g); m += 7) {
    const double v = stokes_eigenvalue(g, m);
    CHECK(v >= previous);
    previous = v;
  }
}

TEST_CASE("transfer check on a single mode") {
  const Grid g = build_grid(16, 2 * kPi);
  const Field u = single_mode_y(g);
  const std::vector<double> levels{0.0, 1.0};
  const auto r = lemma_transfer_check(u, 0.5, levels);
  CHECK(close(r.M_u, std::exp(0.5), 1e-14));
  CHECK(close(r.ratios[0], std::exp(0.5), 1e-14));
  CHECK(r.ratios[1] < std::exp(0.5));
  // Two-term evaluation: ||omega||^2 = |Omega|/2 on one component, the constant adds 3 c^2 |Omega|.
  const double e = std::exp(0.5);
  CHECK(close(r.ratios[1], std::sqrt((0.5 * e * e + 3.0) / (0.5 + 3.0)), 1e-14));
  CHECK(r.violations == 0);
  CHECK_THROWS_AS(lemma_transfer_check(Field(g), 0.5, levels), DomainError);
}

TEST_CASE("transfer check never fails on random solenoidal fields") {
  const Grid g = build_grid(16, 2 * kPi);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> alpha_dist(0.0, 1.0);
  std::normal_distribution<double> level_dist(0.0, 2.0);
  int violations = 0;
  double worst = -1;
  for (int trial = 0; trial < 100; ++trial) {
    const Field u = random_field<double>(g, RandomFieldSpec{std::uint64_t(trial + 1), 3.0, 2.0, 1.0});
    std::vector<double> levels(3);
    for (auto& c : levels) c = level_dist(rng);
    const auto r = lemma_transfer_check(u, alpha_dist(rng), levels);
    violations += r.violations;
    worst = std::max(worst, r.worst_excess);
  }
  CHECK(violations == 0);
  CHECK(worst <= 1e-10);
}

TEST_CASE("scalar log inequality") {
  auto r = scalar_log_inequality_check(1, 1, 1, 1);
  CHECK(r.lhs == 1.0);
  CHECK(close(r.rhs, 1 + std::log(2.0), 1e-15));
  CHECK(r.holds);
  r = scalar_log_inequality_check(2, 0.5, 1, 1);
  CHECK(r.lhs == 2.0);
  CHECK(close(r.rhs, 0.5 + 16 * std::log(8.0), 1e-15));
  CHECK(r.rhs == doctest::Approx(33.77).epsilon(1e-3));
  CHECK(r.holds);
  CHECK_THROWS_AS(scalar_log_inequality_check(1, 1, 0.5, 1), DomainError);
  CHECK_THROWS_AS(scalar_log_inequality_check(0, 1, 1, 1), DomainError);
  CHECK_THROWS_AS(scalar_log_inequality_check(1, -1, 1, 1), DomainError);
  CHECK_THROWS_AS(scalar_log_inequality_check(1, 1, 1, 0), DomainError);

  // Small a against d drives the logarithm negative and the right side below zero.
  r = scalar_log_inequality_check(0.0025, 0.01, 1, 1);
  CHECK(close(r.lhs, 0.0025, 1e-15));
  CHECK(close(r.rhs, 0.01 + 0.0625 * std::log(0.5), 1e-14));
  CHECK(r.rhs < 0);
  CHECK_FALSE(r.holds);
}

TEST_CASE("trilinear probe") {
  const Grid g16 = build_grid(16, 2 * kPi);
  CHECK(trilinear_log_probe(shear_field(g16), 0.1) == 0.0);
  CHECK_THROWS_AS(trilinear_log_probe(Field(g16), 0.1), DomainError);

  const Field u = random_field<double>(g16, RandomFieldSpec{4, 3.0, 2.0, 1.0});
  const double r1 = trilinear_log_probe(u, 0.2);
  const double r2 = trilinear_log_probe(2.0 * u, 0.2);
  CHECK(r1 > 0);
  CHECK(close(r2, r1, 1e-12));

  // The corpus is drawn once on the n=16 band and carried unchanged to n=24,
  // so both resolutions see the same physical fields.
  const Grid g24 = build_grid(24, 2 * kPi);
  double m16 = 0, m24 = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const Field coarse = random_field<double>(g16, RandomFieldSpec{seed, 2.0, 2.0, 1.0});
    Field fine(g24);
    for (int c = 0; c < 3; ++c) fine[c] = pad_spectrum(g16, coarse[c], 24);
    const double a = trilinear_log_probe(coarse, 0.1);
    const double b = trilinear_log_probe(fine, 0.1);
    CHECK(close(b, a, 1e-9));
    m16 = std::max(m16, a);
    m24 = std::max(m24, b);
  }
  MESSAGE("trilinear probe corpus max: n=16 " << m16 << ", n=24 " << m24);
  CHECK(std::isfinite(m16));
  CHECK(m16 > 0);
  CHECK(std::abs(m24 - m16) <= 0.2 * m16);
}

TEST_CASE("power-law fit") {
  std::vector<double> x{1, 2, 4, 8, 16}, y;
  for (double v : x) y.push_back(std::sqrt(v));
  auto fit = fit_scaling(x, y);
  CHECK(std::abs(fit.exponent - 0.5) <= 1e-12);
  CHECK(std::abs(fit.intercept) <= 1e-12);
  CHECK(fit.residual <= 1e-12);
  CHECK(fit.exponent_low <= fit.exponent);
  CHECK(fit.exponent_high >= fit.exponent);

  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 0.01);
  std::vector<double> xs, ys;
  for (double v = 1; v <= 100; v *= 1.6) {
    xs.push_back(v);
    ys.push_back(3 * v * v * (1 + noise(rng)));
  }
  fit = fit_scaling(xs, ys);
  CHECK(fit.exponent >= 1.9);
  CHECK(fit.exponent <= 2.1);
  CHECK(std::exp(fit.intercept) == doctest::Approx(3.0).epsilon(0.05));
  CHECK(fit.exponent_low < 2.0);
  CHECK(fit.exponent_high > 2.0);

  // Three points give one degree of freedom and a wide but finite interval.
  fit = fit_scaling(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2.2, 2.9});
  CHECK(std::isfinite(fit.exponent_low));
  CHECK(std::isfinite(fit.exponent_high));

  CHECK_THROWS_AS(fit_scaling(std::vector<double>{1, 2}, std::vector<double>{1, 2}), InsufficientDataError);
  CHECK_THROWS_AS(fit_scaling(std::vector<double>{1, 2, 0}, std::vector<double>{1, 2, 3}), DomainError);
  CHECK_THROWS_AS(fit_scaling(std::vector<double>{1, 2, 3}, std::vector<double>{1, -2, 3}), DomainError);
}

TEST_CASE("bound report formatting") {
  BoundReport report;
  BoundInputs in;
  in.G = 1e6;
  in.l_hyper = 3;
  in.nu = 1;
  in.beta = 10;
  report.bounds.push_back(evaluate_bound(BoundKind::C9, in));
  report.nodal_series = {{0.0, 1.0}, {1.0, 2.5}};
  ScalingStudy s;
  s.label = "sup nodal area vs G, l=1";
  s.x = {1, 10, 100};
  s.area = {1, 2, 4};
  s.fit = fit_scaling(s.x, s.area);
  s.reference_exponent = 1.0 / 6;
  report.studies.push_back(s);
  const std::string csv = format_bound_csv(report);
  CHECK(csv.rfind("kind,inputs_hash,value,flags\n", 0) == 0);
  CHECK(csv.find("c9," + inputs_hash(in) + ",1000") != std::string::npos);
  CHECK(csv.find("beta > 4*sqrt(2)/nu") != std::string::npos);
  const std::string summary = format_bound_summary(report);
  CHECK(summary.find("indicative") != std::string::npos);
  CHECK(summary.find("sup nodal area vs G") != std::string::npos);
  CHECK(summary.find("2.5") != std::string::npos);
  CHECK_THROWS_AS(write_bound_report("/nonexistent-dir", report), IoError);
}
