#include "hvns/bounds_lab.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <map>
#include <sstream>

#include "hvns/nse_solver.hpp"

namespace hvns {

namespace {

double need(const std::optional<double>& value, const char* name, BoundKind kind) {
  if (!value) throw MissingInputError("bound " + to_string(kind) + " needs input " + name);
  return *value;
}

double positive(const std::optional<double>& value, const char* name, BoundKind kind) {
  const double v = need(value, name, kind);
  if (!(v > 0) || !std::isfinite(v)) {
    throw DomainError("bound " + to_string(kind) + " needs " + name + " > 0");
  }
  return v;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string to_string(BoundKind kind) {
  switch (kind) {
    case BoundKind::C14: return "c14";
    case BoundKind::C4: return "c4";
    case BoundKind::C6: return "c6";
    case BoundKind::C8: return "c8";
    case BoundKind::C9: return "c9";
    case BoundKind::T0: return "t0";
  }
  return "?";
}

BoundKind parse_bound_kind(const std::string& text) {
  for (BoundKind k : {BoundKind::C14, BoundKind::C4, BoundKind::C6, BoundKind::C8, BoundKind::C9, BoundKind::T0}) {
    if (to_string(k) == text) return k;
  }
  throw DomainError("unknown bound kind '" + text + "' (expected c14, c4, c6, c8, c9 or t0)");
}

double eta_rate(double eps_hyper, double lambda_m, double l_hyper, double beta) {
  if (!(beta > 0)) throw DomainError("eta_rate needs beta > 0");
  if (!(lambda_m > 0)) throw DomainError("eta_rate needs lambda_m > 0");
  if (!(eps_hyper >= 0)) throw DomainError("eta_rate needs eps_hyper >= 0");
  const double b2 = beta * beta;
  return -(eps_hyper * std::pow(lambda_m, l_hyper / 2) + (1 + b2) / (2 * b2));
}

double bound_value(BoundKind kind, const BoundInputs& in) {
  const auto& C = in.constants;
  switch (kind) {
    case BoundKind::C14: {
      const double t = need(in.t, "t", kind);
      if (t == 0) throw DomainError("c14 is singular at t = 0");
      if (!(t > 0)) throw DomainError("c14 needs t > 0");
      const double L = positive(in.L, "L", kind);
      const double lambda1 = positive(in.lambda1, "lambda1", kind);
      const double lambda_m = positive(in.lambda_m, "lambda_m", kind);
      const double alpha = positive(in.alpha, "alpha", kind);
      const double beta = positive(in.beta, "beta", kind);
      const double l = positive(in.l_hyper, "l_hyper", kind);
      const double eps = need(in.eps_hyper, "eps_hyper", kind);
      const double rate = -eta_rate(eps, lambda_m, l, beta);
      return C[1] * L * (1 + 0.5 * std::log(lambda_m / lambda1) + rate * t) * std::exp(C[2] * L / (alpha * t));
    }
    case BoundKind::C4: {
      const double lambda_m = positive(in.lambda_m, "lambda_m", kind);
      const double l = positive(in.l_hyper, "l_hyper", kind);
      return C[7] * std::pow(lambda_m, l / 2);
    }
    case BoundKind::C6: {
      const double m = positive(in.m, "m", kind);
      const double l = positive(in.l_hyper, "l_hyper", kind);
      return C[8] * std::pow(m, l / 3);
    }
    case BoundKind::C8: {
      const double l0 = positive(in.l0, "l0", kind);
      const double l_eps = positive(in.l_eps, "l_eps", kind);
      const double l = positive(in.l_hyper, "l_hyper", kind);
      return C[10] * std::pow(l0 / l_eps, l / 3);
    }
    case BoundKind::C9: {
      const double G = positive(in.G, "G", kind);
      const double l = positive(in.l_hyper, "l_hyper", kind);
      return C[11] * std::pow(G, l / 6);
    }
    case BoundKind::T0: {
      const double L = positive(in.L, "L", kind);
      const double nu = positive(in.nu, "nu", kind);
      const double lambda1 = positive(in.lambda1, "lambda1", kind);
      return 2 * C[2] * L / (nu * std::sqrt(lambda1));
    }
  }
  return 0.0;
}

std::vector<std::string> hypothesis_flags(const BoundInputs& in) {
  std::vector<std::string> flags;
  if (in.alpha && in.nu && in.lambda1) {
    const double limit = *in.nu * std::sqrt(*in.lambda1) / 4;
    if (*in.alpha > limit) flags.push_back("alpha > nu*lambda1^(1/2)/4");
  }
  if (in.beta && in.nu) {
    if (*in.beta > 4 * std::numbers::sqrt2 / *in.nu) flags.push_back("beta > 4*sqrt(2)/nu");
  }
  if (in.beta && in.nu && in.lambda1) {
    if (*in.beta > *in.nu * *in.lambda1 / (2 * std::numbers::sqrt2)) flags.push_back("beta > nu*lambda1/(2*sqrt(2))");
  }
  if (in.u0_norm && in.nu && in.lambda1) {
    if (*in.u0_norm > in.constants[3] * *in.nu * std::sqrt(*in.lambda1)) {
      flags.push_back("||u0|| > C3*nu*lambda1^(1/2)");
    }
  }
  return flags;
}

std::string inputs_hash(const BoundInputs& in) {
  std::ostringstream text;
  auto add = [&](const char* name, const std::optional<double>& v) {
    if (v) text << name << '=' << format_number(*v) << ';';
  };
  add("lambda1", in.lambda1);
  add("lambda_m", in.lambda_m);
  add("m", in.m);
  add("l_hyper", in.l_hyper);
  add("eps_hyper", in.eps_hyper);
  add("beta", in.beta);
  add("alpha", in.alpha);
  add("L", in.L);
  add("nu", in.nu);
  add("G", in.G);
  add("t", in.t);
  add("l0", in.l0);
  add("l_eps", in.l_eps);
  add("u0_norm", in.u0_norm);
  for (int i = 1; i <= 11; ++i) text << 'C' << i << '=' << format_number(in.constants[i]) << ';';
  for (const auto& [k, v] : in.annotations) text << k << '=' << format_number(v) << ';';

  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : text.str()) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

// Sorted distinct |k|^2 in the band with their eigenvalue multiplicities.
std::vector<std::pair<double, std::int64_t>> band_spectrum(const Grid& grid) {
  std::map<double, std::int64_t> count;
  const auto& k2 = grid.k_squared();
  const auto& mask = grid.dealias_mask();
  const auto& w = grid.weight();
  for (Index i = 0; i < grid.spectral_size(); ++i) {
    if (k2[i] == 0 || mask[i] == 0) continue;
    count[k2[i]] += 2 * std::int64_t(w[i]);
  }
  return {count.begin(), count.end()};
}

}  // namespace

std::int64_t stokes_mode_count(const Grid& grid) {
  std::int64_t total = 0;
  for (const auto& [k2, mult] : band_spectrum(grid)) total += mult;
  return total;
}

double stokes_eigenvalue(const Grid& grid, std::int64_t m) {
  if (m < 1) throw DomainError("eigenvalue index m must be >= 1");
  std::int64_t seen = 0;
  for (const auto& [k2, mult] : band_spectrum(grid)) {
    seen += mult;
    if (seen >= m) return grid.lambda1() * k2;
  }
  throw RangeError("eigenvalue index m exceeds the " + std::to_string(seen) + " modes of the band");
}

TransferReport lemma_transfer_check(const Field& u, double alpha, std::span<const double> levels) {
  const double grad = norm(u, NormKind::hdot(1));
  if (grad == 0) throw DomainError("transfer check needs a nonzero field");
  TransferReport report;
  report.M_u = norm(u, NormKind::gevrey_weighted(alpha, 0.5)) / grad;
  const Field w = curl(u);
  for (double c : levels) {
    Field shifted = w;
    for (int comp = 0; comp < 3; ++comp) shifted[comp][0] -= c;
    const double base = norm(shifted);
    const double ratio = base == 0 ? 1.0 : norm(shifted, NormKind::gevrey(alpha)) / base;
    report.levels.push_back(c);
    report.ratios.push_back(ratio);
    const double excess = ratio / report.M_u - 1;
    report.worst_excess = report.ratios.size() == 1 ? excess : std::max(report.worst_excess, excess);
    if (ratio > report.M_u * (1 + 1e-10)) ++report.violations;
  }
  return report;
}

LogInequality scalar_log_inequality_check(double a, double d, double mu, double b) {
  if (!(a > 0) || !(d > 0)) throw DomainError("log inequality needs a > 0 and d > 0");
  if (!(b > 0) || !(mu >= b)) throw DomainError("log inequality needs mu >= b > 0");
  LogInequality out;
  out.lhs = a * mu * std::sqrt(1 + std::log(mu * mu / (b * b)));
  out.rhs = d * mu * mu + (a * a) / (d * d) * std::log(2 * a / (b * d));
  out.holds = out.lhs <= out.rhs + 1e-12 * std::abs(out.rhs);
  return out;
}

double trilinear_log_probe(const Field& u, double alpha_t) {
  const double grad_g = norm(u, NormKind::gevrey_weighted(alpha_t, 0.5));
  if (grad_g == 0) throw DomainError("trilinear probe needs a nonzero field");
  const double au_g = norm(u, NormKind::gevrey_weighted(alpha_t, 1.0));
  // nonlinear_term returns -P[(u.grad)u], exact on the band that Au occupies.
  const Field b = gevrey_smooth(nonlinear_term(u), alpha_t);
  const Field au = gevrey_smooth(stokes_power(u, 1.0), alpha_t);
  const double lhs = std::abs(inner(b, au));
  const double lambda1 = u.grid().lambda1();
  const double log_factor = 1 + std::log(au_g * au_g / (lambda1 * grad_g * grad_g));
  return lhs / (grad_g * grad_g * au_g * std::sqrt(log_factor));
}

ScalingFit fit_scaling(std::span<const double> x, std::span<const double> area, double confidence) {
  if (x.size() != area.size()) throw ShapeError("fit_scaling needs as many areas as abscissae");
  if (x.size() < 3) throw InsufficientDataError("fit_scaling needs at least 3 points");
  if (!(confidence > 0 && confidence < 1)) throw DomainError("confidence must lie in (0, 1)");
  const std::size_t n = x.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0) || !(area[i] > 0)) throw DomainError("fit_scaling needs positive x and area");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(area[i]);
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= double(n);
  my /= double(n);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0) throw DomainError("fit_scaling needs at least two distinct x values");
  ScalingFit fit;
  fit.points = int(n);
  fit.confidence = confidence;
  fit.exponent = sxy / sxx;
  fit.intercept = my - fit.exponent * mx;
  double ss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - (fit.intercept + fit.exponent * lx[i]);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / double(n));
  const double se = std::sqrt(ss / double(n - 2) / sxx);
  const boost::math::students_t dist(double(n - 2));
  const double q = boost::math::quantile(dist, 0.5 + confidence / 2);
  fit.exponent_low = fit.exponent - q * se;
  fit.exponent_high = fit.exponent + q * se;
  return fit;
}

BoundEntry evaluate_bound(BoundKind kind, const BoundInputs& inputs) {
  return {kind, inputs_hash(inputs), bound_value(kind, inputs), hypothesis_flags(inputs)};
}

std::string format_bound_csv(const BoundReport& report) {
  std::ostringstream os;
  os << "kind,inputs_hash,value,flags\n";
  for (const auto& b : report.bounds) {
    std::string flags;
    for (const auto& f : b.flags) flags += (flags.empty() ? "" : "; ") + f;
    os << to_string(b.kind) << ',' << b.hash << ',' << format_number(b.value) << ",\"" << flags << "\"\n";
  }
  return os.str();
}

std::string format_bound_summary(const BoundReport& report) {
  std::ostringstream os;
  os << "Bound values (all universal constants default to 1; absolute values are indicative,\n"
        "only scaling exponents are empirically meaningful)\n\n";
  char line[256];
  std::snprintf(line, sizeof line, "%-6s %-18s %-24s %s\n", "kind", "inputs_hash", "value", "flags");
  os << line;
  for (const auto& b : report.bounds) {
    std::string flags;
    for (const auto& f : b.flags) flags += (flags.empty() ? "" : "; ") + f;
    std::snprintf(line, sizeof line, "%-6s %-18s %-24.17g %s\n", to_string(b.kind).c_str(), b.hash.c_str(), b.value,
                  flags.empty() ? "-" : flags.c_str());
    os << line;
  }
  if (!report.nodal_series.empty()) {
    double sup = 0;
    for (const auto& [t, a] : report.nodal_series) sup = std::max(sup, a);
    std::snprintf(line, sizeof line, "\nmeasured sup nodal area over %zu samples: %.10g\n", report.nodal_series.size(),
                  sup);
    os << line;
  }
  for (const auto& s : report.studies) {
    os << "\nscaling study: " << s.label << " (" << s.x.size() << " points)\n";
    if (s.fit) {
      std::snprintf(line, sizeof line,
                    "  fitted exponent %.6g, %.0f%% CI [%.6g, %.6g], rms log residual %.3g; bound exponent %.6g\n",
                    s.fit->exponent, 100 * s.fit->confidence, s.fit->exponent_low, s.fit->exponent_high,
                    s.fit->residual, s.reference_exponent);
    } else {
      std::snprintf(line, sizeof line, "  no fit (fewer than 3 usable points); bound exponent %.6g\n",
                    s.reference_exponent);
    }
    os << line;
  }
  return os.str();
}

void write_bound_report(const std::filesystem::path& dir, const BoundReport& report) {
  auto write = [](const std::filesystem::path& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    os << text;
    if (!os) throw IoError("failed writing: " + path.string());
  };
  write(dir / "bounds.csv", format_bound_csv(report));
  write(dir / "bounds_summary.txt", format_bound_summary(report));
}

}  // namespace hvns
