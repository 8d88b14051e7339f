#pragma once

#include <cstdint>
#include <filesystem>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hvns/bounds_lab.hpp"
#include "hvns/nse_solver.hpp"

namespace hvns {

struct InitSpec {
  enum class Kind { Random, Shear, Zero };
  Kind kind = Kind::Random;
  std::uint64_t seed = 1;
  double k0 = 2.0;
  /// Target (1/2)||u||^2; for shear it fixes the amplitude of sin(2 pi y / L).
  double energy = 0.5;
};

struct OutputSpec {
  std::filesystem::path dir = "out";
  std::int64_t diag_every = 10;
  /// 0 disables snapshots; the final state is always written.
  std::int64_t snapshot_every = 0;
  /// 0 measures nodal sets on the final state only.
  std::int64_t nodal_every = 0;
  int levels = 21;
  bool magnitude = false;
};

struct RunConfig {
  int n = 32;
  double L = 2 * std::numbers::pi;
  SolverParams solver;
  /// Forcing length in Re = U l / nu; defaults to L / k_f.
  std::optional<double> forcing_scale;
  InitSpec init;
  OutputSpec output;
  /// Default nu lambda1^{1/2} / 4.
  std::optional<double> gevrey_alpha;
  BoundConstants constants;
  std::optional<double> beta;
  std::optional<std::int64_t> m;

  Grid grid() const { return build_grid(n, L); }
  double resolved_forcing_scale() const;
  double resolved_gevrey_alpha() const;
};

struct SweepCell {
  int index = 0;
  std::string name;
  RunConfig config;
};

struct SweepConfig {
  RunConfig base;
  std::vector<double> l_hyper;
  std::vector<double> eps_hyper;
  std::vector<double> amplitude;
  int workers = 1;
  int max_cells = 64;

  /// Cartesian product of the axes, l_hyper slowest and amplitude fastest.
  /// An empty axis keeps the base value.
  std::vector<SweepCell> cells() const;
};

using AnyConfig = std::variant<RunConfig, SweepConfig>;

/// Parses "section.key = value" lines ('#' starts a comment). A file with any
/// sweep.* key is a sweep. Throws ConfigError listing every problem, each
/// prefixed with its line number.
AnyConfig parse_config(std::string_view text);
AnyConfig load_config(const std::filesystem::path& path);

/// Resolved text that parses back to the same configuration.
std::string format_config(const RunConfig& config);
std::string format_config(const SweepConfig& config);

/// Initial velocity described by config.init.
Field initial_field(const RunConfig& config);

}  // namespace hvns
