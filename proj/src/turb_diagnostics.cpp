#include "hvns/turb_diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace hvns {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double long_time_average_of(const History& history, double (*extract)(const HistoryPoint&)) {
  if (history.empty()) throw InsufficientDataError("history is empty");
  std::vector<double> t, g;
  t.reserve(history.size());
  g.reserve(history.size());
  for (const auto& p : history) {
    t.push_back(p.t);
    g.push_back(extract(p));
  }
  return long_time_average(t, g);
}

double square_l2(const HistoryPoint& p) { return p.l2_norm * p.l2_norm; }
double square_grad(const HistoryPoint& p) { return p.grad_norm * p.grad_norm; }

}  // namespace

History history_from(std::span<const EnergySample> samples) {
  History out;
  for (const auto& s : samples) {
    if (s.blowup) continue;
    out.push_back({s.t, std::sqrt(2.0 * s.energy), s.grad_norm});
  }
  return out;
}

double long_time_average(std::span<const double> t, std::span<const double> g) {
  if (t.empty()) throw InsufficientDataError("long-time average of an empty series");
  if (t.size() != g.size()) throw ShapeError("time and value series differ in length");
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (!(t[i] >= t[i - 1])) throw DomainError("sample times must be nondecreasing");
  }
  const double t0 = t.front();
  const double T = t.back();
  if (!(T > t0)) return g.back();

  const std::size_t n = t.size();
  std::vector<double> prefix(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) prefix[i] = prefix[i - 1] + 0.5 * (t[i] - t[i - 1]) * (g[i] + g[i - 1]);

  // Integral of the piecewise-linear interpolant from t0 to x.
  auto integral_to = [&](double x) {
    const auto it = std::upper_bound(t.begin(), t.end(), x);
    const std::size_t j = std::size_t(it - t.begin()) - 1;
    if (j + 1 >= n || t[j + 1] == t[j]) return prefix[j];
    const double s = (x - t[j]) / (t[j + 1] - t[j]);
    const double gx = g[j] + s * (g[j + 1] - g[j]);
    return prefix[j] + 0.5 * (x - t[j]) * (g[j] + gx);
  };

  double best = -kInf;
  const double half_span = 0.5 * (T - t0);
  for (std::size_t j = 0; j < n; ++j) {
    if (t[j] - t0 < half_span || !(t[j] > t0)) continue;
    const double start = t0 + 0.5 * (t[j] - t0);
    const double mean = (prefix[j] - integral_to(start)) / (t[j] - start);
    best = std::max(best, mean);
  }
  return best;
}

ReynoldsNumbers reynolds(const History& history, double L, double forcing_scale, double nu) {
  if (!(nu > 0)) throw DomainError("nu must be positive");
  if (!(L > 0)) throw DomainError("box length must be positive");
  if (!(forcing_scale > 0)) throw DomainError("forcing scale must be positive");
  const double mean_square = long_time_average_of(history, square_l2);
  ReynoldsNumbers re;
  re.U_paper = std::sqrt(mean_square) / L;
  re.U_standard = std::sqrt(mean_square / (L * L * L));
  re.paper = re.U_paper * forcing_scale / nu;
  re.standard = re.U_standard * forcing_scale / nu;
  return re;
}

double grashof(double f_norm, double nu, double lambda1) {
  if (!(nu > 0)) throw DomainError("nu must be positive");
  if (!(lambda1 > 0)) throw DomainError("lambda1 must be positive");
  return f_norm / (nu * nu * std::pow(lambda1, 0.75));
}

double grashof(const Field& f, double nu, double lambda1) { return grashof(norm(f), nu, lambda1); }

double beta_ratio(const History& history, double f_norm) {
  if (!(f_norm > 0)) throw UndefinedRatioError("beta is undefined without forcing");
  if (history.empty()) throw InsufficientDataError("history is empty");
  double lowest = kInf;
  for (const auto& p : history) lowest = std::min(lowest, p.l2_norm);
  return lowest / f_norm;
}

double beta_ratio(const History& history, const Field& f) { return beta_ratio(history, norm(f)); }

DissipationNumbers dissipation_and_scales(const History& history, double nu, double lambda1, double volume,
                                          DissipationVariant variant) {
  if (!(nu > 0)) throw DomainError("nu must be positive");
  if (!(lambda1 > 0) || !(volume > 0)) throw DomainError("lambda1 and volume must be positive");
  const double mean = long_time_average_of(history, square_grad);
  DissipationNumbers d;
  d.eps_paper = std::pow(lambda1, 1.5) * nu * mean;
  d.eps_standard = nu * mean / volume;
  const double nu3 = nu * nu * nu;
  d.l_eps_paper = d.eps_paper > 0 ? nu3 / d.eps_paper : kInf;
  d.l_eps_standard = d.eps_standard > 0 ? std::pow(nu3 / d.eps_standard, 0.25) : kInf;
  d.l0 = 1.0 / std::sqrt(lambda1);
  const double leps = variant == DissipationVariant::Paper ? d.l_eps_paper : d.l_eps_standard;
  d.ratio_l0_over_leps = d.l0 / leps;
  return d;
}

double default_gevrey_rate(double nu, double lambda1) { return nu * std::sqrt(lambda1) / 4.0; }

GevreyMonitor::GevreyMonitor(double alpha_rate, double u0_grad_norm) : alpha_(alpha_rate), reference_(u0_grad_norm) {
  if (!(alpha_rate >= 0) || !std::isfinite(alpha_rate)) throw DomainError("Gevrey rate must be finite and >= 0");
  if (!(u0_grad_norm >= 0)) throw DomainError("initial gradient norm must be >= 0");
}

GevreyReading GevreyMonitor::observe(const Field& u, double t) {
  GevreyReading r;
  r.value = norm(u, NormKind::gevrey_weighted(alpha_ * t, 0.5));
  if (reference_ > 0) {
    r.ratio = r.value / (2.0 * reference_);
  } else {
    r.ratio = r.value == 0 ? 0.0 : kInf;
  }
  // A relative slack of 1e-12 keeps roundoff on a flat series from clearing the flag.
  if (r.value > last_ * (1.0 + 1e-12)) decreasing_ = false;
  last_ = r.value;
  r.decreasing = decreasing_;
  return r;
}

double high_k_energy_fraction(const Field& u, double k_cut) {
  const auto& g = u.grid();
  const Eigen::ArrayXd e = g.weight() * (u[0].abs2() + u[1].abs2() + u[2].abs2());
  const double total = e.sum();
  if (total == 0) return 0.0;
  const Eigen::ArrayXd above = (g.k_squared() > k_cut * k_cut).cast<double>();
  return (e * above).sum() / total;
}

GrowthProbe lower_growth_probe(const History& history, double eta) {
  GrowthProbe probe;
  if (history.empty() || !(history.front().l2_norm > 0)) return probe;
  const double log0 = std::log(history.front().l2_norm);
  const double t0 = history.front().t;
  for (const auto& p : history) {
    const double margin = std::log(p.l2_norm) - log0 - eta * (p.t - t0);
    probe.worst_margin = std::min(probe.worst_margin, margin);
    if (margin < 0) ++probe.violations;
  }
  return probe;
}

DiagnosticsRecorder::DiagnosticsRecorder(DiagnosticsContext context) : context_(context) {
  if (!(context.nu > 0) || !(context.L > 0)) throw DomainError("diagnostics need nu > 0 and L > 0");
  const double unit = 2.0 * std::numbers::pi / context.L;
  lambda1_ = unit * unit;
}

TurbulenceNumbers DiagnosticsRecorder::numbers() const {
  TurbulenceNumbers n;
  n.grashof = grashof(context_.f_norm, context_.nu, lambda1_);
  if (history_.empty()) {
    n.beta_ratio = kNaN;
    return n;
  }
  const auto re = reynolds(history_, context_.L, context_.forcing_scale, context_.nu);
  n.reynolds = re.paper;
  n.reynolds_standard = re.standard;
  n.beta_ratio = context_.f_norm > 0 ? beta_ratio(history_, context_.f_norm) : kNaN;
  n.dissipation = dissipation_and_scales(history_, context_.nu, lambda1_, std::pow(context_.L, 3));
  return n;
}

const DiagnosticsRow& DiagnosticsRecorder::add(const EnergySample& s, const GevreyReading* gevrey, double nodal_sup) {
  if (!s.blowup) history_.push_back({s.t, std::sqrt(2.0 * s.energy), s.grad_norm});
  DiagnosticsRow row;
  row.t = s.t;
  row.energy = s.energy;
  row.grad_norm = s.grad_norm;
  row.hyper_norm = s.hyper_norm;
  row.injection = s.injection;
  row.budget_residual = s.budget_residual;
  row.gevrey_half_norm = gevrey ? gevrey->value : kNaN;
  row.gevrey_ratio = gevrey ? gevrey->ratio : kNaN;
  row.div_residual = s.div_residual;
  row.nodal_sup_area = nodal_sup;
  const TurbulenceNumbers n = numbers();
  row.re_paper = n.reynolds;
  row.re_standard = n.reynolds_standard;
  row.grashof = n.grashof;
  row.beta_min = n.beta_ratio;
  row.eps_paper = n.dissipation.eps_paper;
  row.eps_standard = n.dissipation.eps_standard;
  row.leps_paper = n.dissipation.l_eps_paper;
  row.leps_standard = n.dissipation.l_eps_standard;
  row.blowup = s.blowup;
  rows_.push_back(row);
  return rows_.back();
}

const std::vector<std::string>& diagnostics_columns() {
  static const std::vector<std::string> columns{
      "t",           "energy",        "grad_norm",   "hyper_norm", "injection",    "budget_residual", "gevrey_half_norm",
      "gevrey_ratio", "div_residual", "nodal_sup_area", "re_paper", "re_standard", "grashof",         "beta_min",
      "eps_paper",   "eps_standard",  "leps_paper",  "leps_standard", "blowup"};
  return columns;
}

std::string format_diagnostics_csv(std::span<const DiagnosticsRow> rows) {
  std::string out;
  const auto& cols = diagnostics_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
  out += '\n';
  char buf[32];
  for (const auto& r : rows) {
    const double values[] = {r.t,           r.energy,       r.grad_norm,   r.hyper_norm,  r.injection,
                             r.budget_residual, r.gevrey_half_norm, r.gevrey_ratio, r.div_residual, r.nodal_sup_area,
                             r.re_paper,    r.re_standard,  r.grashof,     r.beta_min,    r.eps_paper,
                             r.eps_standard, r.leps_paper,  r.leps_standard};
    for (double v : values) {
      std::snprintf(buf, sizeof buf, "%.17g,", v);
      out += buf;
    }
    out += r.blowup ? "1\n" : "0\n";
  }
  return out;
}

void write_diagnostics_csv(const std::filesystem::path& path, std::span<const DiagnosticsRow> rows) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open diagnostics file for writing: " + path.string());
  os << format_diagnostics_csv(rows);
  if (!os) throw IoError("failed writing diagnostics file: " + path.string());
}

std::vector<DiagnosticsRow> read_diagnostics_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open diagnostics file: " + path.string());
  std::string line;
  std::getline(is, line);
  std::string expected;
  const auto& cols = diagnostics_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) expected += (i ? "," : "") + cols[i];
  if (line != expected) throw IoError("unexpected diagnostics header in " + path.string());

  std::vector<DiagnosticsRow> rows;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> v;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double x = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0') {
        throw IoError("malformed value '" + cell + "' at " + path.string() + ":" + std::to_string(line_no));
      }
      v.push_back(x);
    }
    if (v.size() != cols.size()) {
      throw IoError("wrong column count at " + path.string() + ":" + std::to_string(line_no));
    }
    DiagnosticsRow r;
    double* fields[] = {&r.t,           &r.energy,       &r.grad_norm,   &r.hyper_norm,  &r.injection,
                        &r.budget_residual, &r.gevrey_half_norm, &r.gevrey_ratio, &r.div_residual, &r.nodal_sup_area,
                        &r.re_paper,    &r.re_standard,  &r.grashof,     &r.beta_min,    &r.eps_paper,
                        &r.eps_standard, &r.leps_paper,  &r.leps_standard};
    for (std::size_t i = 0; i < 18; ++i) *fields[i] = v[i];
    r.blowup = v[18] != 0;
    rows.push_back(r);
  }
  return rows;
}

}  // namespace hvns
