#include "hvns/config.hpp"

#include "hvns/turb_diagnostics.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace hvns {

double RunConfig::resolved_forcing_scale() const {
  if (forcing_scale) return *forcing_scale;
  return L / double(std::max(1, solver.forcing.k_f));
}

double RunConfig::resolved_gevrey_alpha() const {
  if (gevrey_alpha) return *gevrey_alpha;
  return default_gevrey_rate(solver.nu, grid().lambda1());
}

std::vector<SweepCell> SweepConfig::cells() const {
  const std::vector<double> ls = l_hyper.empty() ? std::vector<double>{base.solver.l_hyper} : l_hyper;
  const std::vector<double> es = eps_hyper.empty() ? std::vector<double>{base.solver.eps_hyper} : eps_hyper;
  const std::vector<double> as = amplitude.empty() ? std::vector<double>{base.solver.forcing.amplitude} : amplitude;
  std::vector<SweepCell> out;
  char name[64];
  for (double l : ls) {
    for (double e : es) {
      for (double a : as) {
        SweepCell cell;
        cell.index = int(out.size());
        std::snprintf(name, sizeof name, "cell_%03d", cell.index);
        cell.name = name;
        cell.config = base;
        cell.config.solver.l_hyper = l;
        cell.config.solver.eps_hyper = e;
        cell.config.solver.forcing.amplitude = a;
        out.push_back(std::move(cell));
      }
    }
  }
  return out;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::optional<double> to_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<std::int64_t> to_int(const std::string& s) {
  if (s.empty()) return std::nullopt;
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<std::vector<double>> to_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto v = to_double(trim(item));
    if (!v) return std::nullopt;
    out.push_back(*v);
  }
  if (out.empty()) return std::nullopt;
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Parser {
  RunConfig run;
  SweepConfig sweep;
  bool is_sweep = false;
  std::vector<std::string> errors;
  std::map<std::string, int> line_of;

  using Setter = std::function<std::optional<std::string>(const std::string&)>;
  std::map<std::string, Setter> keys;

  static Setter real(double& target) {
    return [&target](const std::string& v) -> std::optional<std::string> {
      const auto d = to_double(v);
      if (!d) return "expected a number, got '" + v + "'";
      target = *d;
      return std::nullopt;
    };
  }
  static Setter maybe_real(std::optional<double>& target) {
    return [&target](const std::string& v) -> std::optional<std::string> {
      const auto d = to_double(v);
      if (!d) return "expected a number, got '" + v + "'";
      target = *d;
      return std::nullopt;
    };
  }
  template <typename Int>
  static Setter integer(Int& target) {
    return [&target](const std::string& v) -> std::optional<std::string> {
      const auto d = to_int(v);
      if (!d) return "expected an integer, got '" + v + "'";
      target = Int(*d);
      return std::nullopt;
    };
  }
  static Setter boolean(bool& target) {
    return [&target](const std::string& v) -> std::optional<std::string> {
      if (v == "true" || v == "1") {
        target = true;
      } else if (v == "false" || v == "0") {
        target = false;
      } else {
        return "expected true or false, got '" + v + "'";
      }
      return std::nullopt;
    };
  }
  static Setter list(std::vector<double>& target) {
    return [&target](const std::string& v) -> std::optional<std::string> {
      const auto d = to_list(v);
      if (!d) return "expected a comma-separated list of numbers, got '" + v + "'";
      target = *d;
      return std::nullopt;
    };
  }

  Parser() {
    auto& r = run;
    auto& s = r.solver;
    keys["grid.n"] = integer(r.n);
    keys["grid.L"] = real(r.L);
    keys["fluid.nu"] = real(s.nu);
    keys["hyper.eps"] = real(s.eps_hyper);
    keys["hyper.l"] = real(s.l_hyper);
    keys["time.dt"] = real(s.dt);
    keys["time.T"] = real(s.T_end);
    keys["time.cfl_safety"] = real(s.cfl_safety);
    keys["time.adaptive"] = boolean(s.adaptive);
    keys["forcing.type"] = [&s](const std::string& v) -> std::optional<std::string> {
      if (v == "none") {
        s.forcing.type = ForcingSpec::Type::None;
      } else if (v == "kolmogorov") {
        s.forcing.type = ForcingSpec::Type::Kolmogorov;
      } else {
        return "expected none or kolmogorov, got '" + v + "'";
      }
      return std::nullopt;
    };
    keys["forcing.amplitude"] = real(s.forcing.amplitude);
    keys["forcing.k_f"] = integer(s.forcing.k_f);
    keys["forcing.axis"] = integer(s.forcing.axis);
    keys["forcing.scale"] = maybe_real(r.forcing_scale);
    keys["init.kind"] = [&r](const std::string& v) -> std::optional<std::string> {
      if (v == "random") {
        r.init.kind = InitSpec::Kind::Random;
      } else if (v == "shear") {
        r.init.kind = InitSpec::Kind::Shear;
      } else if (v == "zero") {
        r.init.kind = InitSpec::Kind::Zero;
      } else {
        return "expected random, shear or zero, got '" + v + "'";
      }
      return std::nullopt;
    };
    keys["init.seed"] = integer(r.init.seed);
    keys["init.k0"] = real(r.init.k0);
    keys["init.energy"] = real(r.init.energy);
    keys["output.dir"] = [&r](const std::string& v) -> std::optional<std::string> {
      if (v.empty()) return "expected a directory path";
      r.output.dir = v;
      return std::nullopt;
    };
    keys["output.diag_every"] = integer(r.output.diag_every);
    keys["output.snapshot_every"] = integer(r.output.snapshot_every);
    keys["output.nodal_every"] = integer(r.output.nodal_every);
    keys["output.levels"] = integer(r.output.levels);
    keys["output.magnitude"] = boolean(r.output.magnitude);
    keys["gevrey.alpha_rate"] = maybe_real(r.gevrey_alpha);
    for (int i = 1; i <= 11; ++i) keys["bounds.C" + std::to_string(i)] = real(r.constants.C[std::size_t(i)]);
    keys["bounds.beta"] = maybe_real(r.beta);
    keys["bounds.m"] = [&r](const std::string& v) -> std::optional<std::string> {
      const auto d = to_int(v);
      if (!d) return "expected an integer, got '" + v + "'";
      r.m = *d;
      return std::nullopt;
    };
    keys["sweep.l_hyper"] = list(sweep.l_hyper);
    keys["sweep.eps_hyper"] = list(sweep.eps_hyper);
    keys["sweep.amplitude"] = list(sweep.amplitude);
    keys["sweep.workers"] = integer(sweep.workers);
    keys["sweep.max_cells"] = integer(sweep.max_cells);
  }

  void error(int line, const std::string& what) {
    errors.push_back(line > 0 ? "line " + std::to_string(line) + ": " + what : "default value: " + what);
  }

  // Constraint on a key; reported at the key's line (or as a default).
  void require(bool ok, const std::string& key, const std::string& what) {
    if (ok) return;
    const auto it = line_of.find(key);
    error(it == line_of.end() ? 0 : it->second, key + ": " + what);
  }

  void parse(std::string_view text) {
    std::istringstream is{std::string(text)};
    std::string raw;
    int line = 0;
    while (std::getline(is, raw)) {
      ++line;
      const auto hash = raw.find('#');
      const std::string content = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
      if (content.empty()) continue;
      const auto eq = content.find('=');
      if (eq == std::string::npos) {
        error(line, "expected 'section.key = value', got '" + content + "'");
        continue;
      }
      const std::string key = trim(content.substr(0, eq));
      const std::string value = trim(content.substr(eq + 1));
      const auto it = keys.find(key);
      if (it == keys.end()) {
        error(line, "unknown key '" + key + "'");
        continue;
      }
      if (line_of.count(key)) {
        error(line, "duplicate key '" + key + "' (first set on line " + std::to_string(line_of[key]) + ")");
        continue;
      }
      line_of[key] = line;
      if (key.rfind("sweep.", 0) == 0) is_sweep = true;
      if (auto problem = it->second(value)) error(line, key + ": " + *problem);
    }
    validate();
  }

  void validate() {
    const auto& r = run;
    const auto& s = r.solver;
    const bool grid_ok = r.n >= 4 && r.n % 2 == 0;
    require(grid_ok, "grid.n", "n must be an even integer >= 4");
    require(r.L > 0 && std::isfinite(r.L), "grid.L", "L must be positive");
    require(s.nu > 0 && std::isfinite(s.nu), "fluid.nu", "nu must be positive");
    require(s.eps_hyper >= 0 && std::isfinite(s.eps_hyper), "hyper.eps", "eps_hyper >= 0 required");
    require(s.l_hyper >= 1 && std::isfinite(s.l_hyper), "hyper.l", "l_hyper >= 1 required");
    require(s.dt > 0 && std::isfinite(s.dt), "time.dt", "dt must be positive");
    require(s.T_end >= 0 && std::isfinite(s.T_end), "time.T", "T must be >= 0");
    require(s.cfl_safety > 0 && s.cfl_safety <= 1, "time.cfl_safety", "cfl_safety must lie in (0, 1]");
    require(std::isfinite(s.forcing.amplitude), "forcing.amplitude", "amplitude must be finite");
    require(s.forcing.axis >= 0 && s.forcing.axis <= 2, "forcing.axis", "axis must be 0, 1 or 2");
    if (grid_ok) {
      require(s.forcing.k_f >= 1 && s.forcing.k_f <= r.n / 3, "forcing.k_f",
              "k_f must lie in [1, " + std::to_string(r.n / 3) + "] for n = " + std::to_string(r.n));
    }
    if (r.forcing_scale) require(*r.forcing_scale > 0, "forcing.scale", "forcing scale must be positive");
    require(r.init.k0 > 0, "init.k0", "k0 must be positive");
    require(r.init.energy > 0 || r.init.kind == InitSpec::Kind::Zero, "init.energy", "energy must be positive");
    require(r.output.diag_every >= 1, "output.diag_every", "diag_every must be >= 1");
    require(r.output.snapshot_every >= 0, "output.snapshot_every", "snapshot_every must be >= 0");
    require(r.output.nodal_every >= 0, "output.nodal_every", "nodal_every must be >= 0");
    require(r.output.levels >= 1, "output.levels", "levels must be >= 1");
    if (r.gevrey_alpha) {
      require(*r.gevrey_alpha >= 0 && std::isfinite(*r.gevrey_alpha), "gevrey.alpha_rate", "alpha_rate must be >= 0");
    }
    for (int i = 1; i <= 11; ++i) {
      const double c = r.constants[i];
      require(c > 0 && std::isfinite(c), "bounds.C" + std::to_string(i), "constants must be positive");
    }
    if (r.beta) require(*r.beta > 0, "bounds.beta", "beta must be positive");
    if (r.m) {
      require(*r.m >= 1, "bounds.m", "m must be >= 1");
      if (grid_ok && r.L > 0 && *r.m >= 1) {
        const auto count = stokes_mode_count(build_grid(r.n, r.L));
        require(*r.m <= count, "bounds.m", "m exceeds the " + std::to_string(count) + " eigenvalues of the band");
      }
    }
    if (!is_sweep) return;
    for (double l : sweep.l_hyper) require(l >= 1 && std::isfinite(l), "sweep.l_hyper", "l_hyper >= 1 required");
    for (double e : sweep.eps_hyper) require(e >= 0 && std::isfinite(e), "sweep.eps_hyper", "eps_hyper >= 0 required");
    for (double a : sweep.amplitude) require(std::isfinite(a), "sweep.amplitude", "amplitude must be finite");
    require(sweep.workers >= 1, "sweep.workers", "workers must be >= 1");
    require(sweep.max_cells >= 1, "sweep.max_cells", "max_cells must be >= 1");
    const auto size = [](const std::vector<double>& v) { return std::max<std::size_t>(1, v.size()); };
    const std::size_t cells = size(sweep.l_hyper) * size(sweep.eps_hyper) * size(sweep.amplitude);
    require(cells <= std::size_t(std::max(1, sweep.max_cells)), "sweep.max_cells",
            "sweep has " + std::to_string(cells) + " cells, more than max_cells = " + std::to_string(sweep.max_cells));
  }
};

std::string join(const std::vector<double>& v) {
  std::string out;
  for (double x : v) out += (out.empty() ? "" : ", ") + fmt(x);
  return out;
}

}  // namespace

AnyConfig parse_config(std::string_view text) {
  Parser p;
  p.parse(text);
  if (!p.errors.empty()) throw ConfigError(p.errors);
  if (!p.is_sweep) return p.run;
  p.sweep.base = p.run;
  return p.sweep;
}

AnyConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read config file: " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

std::string format_config(const RunConfig& r) {
  const auto& s = r.solver;
  std::ostringstream os;
  os << "grid.n = " << r.n << "\n";
  os << "grid.L = " << fmt(r.L) << "\n";
  os << "fluid.nu = " << fmt(s.nu) << "\n";
  os << "hyper.eps = " << fmt(s.eps_hyper) << "\n";
  os << "hyper.l = " << fmt(s.l_hyper) << "\n";
  os << "time.dt = " << fmt(s.dt) << "\n";
  os << "time.T = " << fmt(s.T_end) << "\n";
  os << "time.cfl_safety = " << fmt(s.cfl_safety) << "\n";
  os << "time.adaptive = " << (s.adaptive ? "true" : "false") << "\n";
  os << "forcing.type = " << (s.forcing.type == ForcingSpec::Type::Kolmogorov ? "kolmogorov" : "none") << "\n";
  os << "forcing.amplitude = " << fmt(s.forcing.amplitude) << "\n";
  os << "forcing.k_f = " << s.forcing.k_f << "\n";
  os << "forcing.axis = " << s.forcing.axis << "\n";
  os << "forcing.scale = " << fmt(r.resolved_forcing_scale()) << "\n";
  const char* kind = r.init.kind == InitSpec::Kind::Random ? "random"
                     : r.init.kind == InitSpec::Kind::Shear ? "shear"
                                                            : "zero";
  os << "init.kind = " << kind << "\n";
  os << "init.seed = " << r.init.seed << "\n";
  os << "init.k0 = " << fmt(r.init.k0) << "\n";
  os << "init.energy = " << fmt(r.init.energy) << "\n";
  os << "output.dir = " << r.output.dir.string() << "\n";
  os << "output.diag_every = " << r.output.diag_every << "\n";
  os << "output.snapshot_every = " << r.output.snapshot_every << "\n";
  os << "output.nodal_every = " << r.output.nodal_every << "\n";
  os << "output.levels = " << r.output.levels << "\n";
  os << "output.magnitude = " << (r.output.magnitude ? "true" : "false") << "\n";
  os << "gevrey.alpha_rate = " << fmt(r.resolved_gevrey_alpha()) << "\n";
  for (int i = 1; i <= 11; ++i) os << "bounds.C" << i << " = " << fmt(r.constants[i]) << "\n";
  if (r.beta) os << "bounds.beta = " << fmt(*r.beta) << "\n";
  if (r.m) os << "bounds.m = " << *r.m << "\n";
  return os.str();
}

std::string format_config(const SweepConfig& c) {
  std::string out = format_config(c.base);
  if (!c.l_hyper.empty()) out += "sweep.l_hyper = " + join(c.l_hyper) + "\n";
  if (!c.eps_hyper.empty()) out += "sweep.eps_hyper = " + join(c.eps_hyper) + "\n";
  if (!c.amplitude.empty()) out += "sweep.amplitude = " + join(c.amplitude) + "\n";
  out += "sweep.workers = " + std::to_string(c.workers) + "\n";
  out += "sweep.max_cells = " + std::to_string(c.max_cells) + "\n";
  return out;
}

Field initial_field(const RunConfig& config) {
  const Grid g = config.grid();
  switch (config.init.kind) {
    case InitSpec::Kind::Random: {
      RandomFieldSpec spec;
      spec.seed = config.init.seed;
      spec.k0 = config.init.k0;
      spec.energy = config.init.energy;
      return random_field<double>(g, spec);
    }
    case InitSpec::Kind::Shear: {
      // (1/2) a^2 |Omega| / 2 = energy.
      const double a = std::sqrt(4 * config.init.energy / g.volume());
      std::vector<ModeSpec<double>> modes{{{0, 1, 0}, Field::ModeVector(std::complex<double>(0, -0.5 * a), 0, 0)}};
      Field u = synthesize_modes<double>(g, modes);
      u.set_solenoidal(true);
      return u;
    }
    case InitSpec::Kind::Zero: {
      Field u(g);
      u.set_solenoidal(true);
      return u;
    }
  }
  return Field(g);
}

}  // namespace hvns
