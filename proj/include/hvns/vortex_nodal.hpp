#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include "hvns/nse_solver.hpp"

namespace hvns {

/// Triangulated level set. Vertices are unwrapped box coordinates in [0, L]^3,
/// so surfaces crossing a periodic face are split there rather than closed.
struct TriangleSurface {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<int, 3>> triangles;
  double total_area = 0.0;
};

/// Collocation samples of omega = curl u.
VectorSamples<double> vorticity_samples(const Field& u);
VectorSamples<double> vorticity_samples(const SolverState& state);

/// Marching-cubes triangulation of {h = level} with periodic wraparound and
/// linear edge interpolation. Points with h < level count as inside.
/// Throws DegenerateLevelError when h is constant and equal to level.
TriangleSurface isosurface(const Samples& h, double level);

/// Area of isosurface(h, level) without keeping the mesh.
double isosurface_area(const Samples& h, double level);

/// Levels c = 0 plus the interior quantiles i/count (i = 1..count-1) of each
/// component's values, so count = 1 means c = 0 only.
struct LevelSpec {
  int count = 21;
  /// Also measure level sets of |omega|^2 (reported as component 3).
  bool include_magnitude = false;
};

std::vector<double> sample_levels(const Samples& h, const LevelSpec& spec);

struct ComponentAreas {
  int component = 0;
  std::vector<double> levels;
  std::vector<double> areas;
  /// Component uniformly below 1e-14 times the largest vorticity value; not measured.
  bool degenerate = false;
};

struct NodalReport {
  double t = 0.0;
  double l_hyper = 1.0;
  std::vector<ComponentAreas> components;
  /// Largest area over components and levels.
  double sup_measure = 0.0;
  int sup_component = -1;
  double sup_level = 0.0;
  bool degenerate = false;
};

NodalReport nodal_measure(const Field& u, const LevelSpec& spec = {}, double t = 0.0, double l_hyper = 1.0);
NodalReport nodal_measure(const SolverState& state, const LevelSpec& spec = {});

/// ASCII mesh: "v x y z" per vertex then "f i j k" per triangle, 1-based.
void write_mesh(const std::filesystem::path& path, const TriangleSurface& surface);

}  // namespace hvns
