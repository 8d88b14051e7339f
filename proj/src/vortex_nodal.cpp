#include "hvns/vortex_nodal.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <unordered_map>

#include "marching_cubes_tables.hpp"

namespace hvns {

namespace {

// Pairwise summation keeps the rounding error O(log N) and makes the result a
// fixed function of the input order.
double pairwise_sum(const double* x, std::size_t count) {
  if (count <= 8) {
    double s = 0;
    for (std::size_t i = 0; i < count; ++i) s += x[i];
    return s;
  }
  const std::size_t half = count / 2;
  return pairwise_sum(x, half) + pairwise_sum(x + half, count - half);
}

double triangle_area(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

struct EdgeVertex {
  Eigen::Vector3d position;
  std::int64_t key;
};

// Visit every triangle of the level set in cell order (x fastest).
template <typename Emit>
void march(const Samples& h, double level, Emit&& emit) {
  const auto& values = h.values();
  const double lo = values.minCoeff();
  const double hi = values.maxCoeff();
  if (lo == hi) {
    if (lo == level) throw DegenerateLevelError("constant samples equal to the requested level");
    return;
  }
  if (level < lo || level > hi) return;

  const int n = h.n();
  const double dx = h.grid().spacing();
  const std::int64_t side = n + 1;
  double v[8];
  int corner[8][3];
  EdgeVertex edge[12];
  for (int iz = 0; iz < n; ++iz) {
    for (int iy = 0; iy < n; ++iy) {
      for (int ix = 0; ix < n; ++ix) {
        int index = 0;
        for (int k = 0; k < 8; ++k) {
          const auto& o = detail::kCornerOffset[k];
          corner[k][0] = ix + o[0];
          corner[k][1] = iy + o[1];
          corner[k][2] = iz + o[2];
          v[k] = h(corner[k][0] % n, corner[k][1] % n, corner[k][2] % n);
          if (v[k] < level) index |= 1 << k;
        }
        if (index == 0 || index == 255) continue;
        const int* tri = detail::kTriangleTable[index];
        int needed = 0;
        for (int t = 0; tri[t] != -1; ++t) needed |= 1 << tri[t];
        for (int e = 0; e < 12; ++e) {
          if (!(needed & (1 << e))) continue;
          const int a = detail::kEdgeCorners[e][0];
          const int b = detail::kEdgeCorners[e][1];
          const double denom = v[b] - v[a];
          const double s = denom == 0 ? 0.5 : (level - v[a]) / denom;
          Eigen::Vector3d pa(corner[a][0], corner[a][1], corner[a][2]);
          Eigen::Vector3d pb(corner[b][0], corner[b][1], corner[b][2]);
          edge[e].position = dx * (pa + s * (pb - pa));
          int axis = 0;
          while (corner[a][axis] == corner[b][axis]) ++axis;
          const int* base = corner[a][axis] < corner[b][axis] ? corner[a] : corner[b];
          edge[e].key = ((base[0] * side + base[1]) * side + base[2]) * 3 + axis;
        }
        for (int t = 0; tri[t] != -1; t += 3) emit(edge[tri[t]], edge[tri[t + 1]], edge[tri[t + 2]]);
      }
    }
  }
}

}  // namespace

VectorSamples<double> vorticity_samples(const Field& u) { return to_physical(curl(u)); }

VectorSamples<double> vorticity_samples(const SolverState& state) { return vorticity_samples(state.u); }

TriangleSurface isosurface(const Samples& h, double level) {
  TriangleSurface surface;
  std::unordered_map<std::int64_t, int> index_of;
  std::vector<double> areas;
  auto vertex = [&](const EdgeVertex& ev) {
    auto [it, inserted] = index_of.try_emplace(ev.key, int(surface.vertices.size()));
    if (inserted) surface.vertices.push_back(ev.position);
    return it->second;
  };
  march(h, level, [&](const EdgeVertex& a, const EdgeVertex& b, const EdgeVertex& c) {
    surface.triangles.push_back({vertex(a), vertex(b), vertex(c)});
    areas.push_back(triangle_area(a.position, b.position, c.position));
  });
  surface.total_area = pairwise_sum(areas.data(), areas.size());
  return surface;
}

double isosurface_area(const Samples& h, double level) {
  std::vector<double> areas;
  march(h, level, [&](const EdgeVertex& a, const EdgeVertex& b, const EdgeVertex& c) {
    areas.push_back(triangle_area(a.position, b.position, c.position));
  });
  return pairwise_sum(areas.data(), areas.size());
}

std::vector<double> sample_levels(const Samples& h, const LevelSpec& spec) {
  if (spec.count < 1) throw DomainError("level count must be >= 1");
  std::vector<double> levels{0.0};
  if (spec.count == 1) return levels;
  std::vector<double> sorted(h.values().data(), h.values().data() + h.values().size());
  std::sort(sorted.begin(), sorted.end());
  const double last = double(sorted.size() - 1);
  for (int i = 1; i < spec.count; ++i) {
    const double pos = last * double(i) / double(spec.count);
    const auto lo = std::size_t(pos);
    const double frac = pos - double(lo);
    const double hi_value = lo + 1 < sorted.size() ? sorted[lo + 1] : sorted[lo];
    levels.push_back(sorted[lo] + frac * (hi_value - sorted[lo]));
  }
  return levels;
}

NodalReport nodal_measure(const Field& u, const LevelSpec& spec, double t, double l_hyper) {
  if (spec.count < 1) throw DomainError("level count must be >= 1");
  NodalReport report;
  report.t = t;
  report.l_hyper = l_hyper;
  const auto w = vorticity_samples(u);
  std::vector<Samples> scalars(w.begin(), w.end());
  if (spec.include_magnitude) {
    scalars.emplace_back(u.grid(), w[0].values().square() + w[1].values().square() + w[2].values().square());
  }
  double scale = 0;
  for (const auto& s : w) scale = std::max(scale, s.values().abs().maxCoeff());

  for (std::size_t c = 0; c < scalars.size(); ++c) {
    ComponentAreas entry;
    entry.component = int(c);
    const double peak = scalars[c].values().abs().maxCoeff();
    if (scale == 0 || peak < 1e-14 * scale) {
      entry.degenerate = true;
      report.degenerate = true;
      report.components.push_back(std::move(entry));
      continue;
    }
    entry.levels = sample_levels(scalars[c], spec);
    for (double level : entry.levels) {
      const double area = isosurface_area(scalars[c], level);
      entry.areas.push_back(area);
      if (area > report.sup_measure) {
        report.sup_measure = area;
        report.sup_component = int(c);
        report.sup_level = level;
      }
    }
    report.components.push_back(std::move(entry));
  }
  return report;
}

NodalReport nodal_measure(const SolverState& state, const LevelSpec& spec) {
  return nodal_measure(state.u, spec, state.t, state.params.l_hyper);
}

void write_mesh(const std::filesystem::path& path, const TriangleSurface& surface) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open mesh file for writing: " + path.string());
  char line[128];
  for (const auto& v : surface.vertices) {
    std::snprintf(line, sizeof line, "v %.17g %.17g %.17g\n", v[0], v[1], v[2]);
    os << line;
  }
  for (const auto& f : surface.triangles) os << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  if (!os) throw IoError("failed writing mesh file: " + path.string());
}

}  // namespace hvns
