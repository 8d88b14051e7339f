#include <fstream>
#include <sstream>

#include "doctest.h"
#include "hvns/vortex_nodal.hpp"
#include "test_support.hpp"

using namespace hvns;
using namespace hvns::test;

namespace {

Samples sphere_samples(int n, Eigen::Vector3d center, double radius) {
  const Grid g = build_grid(n, 2 * kPi);
  Samples h(g);
  for (int iz = 0; iz < n; ++iz)
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix) {
        const Eigen::Vector3d x(h.coordinate(ix), h.coordinate(iy), h.coordinate(iz));
        h(ix, iy, iz) = (x - center).squaredNorm() - radius * radius;
      }
  return h;
}

Samples roll(const Samples& h, int sx, int sy, int sz) {
  Samples out(h.grid());
  const int n = h.n();
  for (int iz = 0; iz < n; ++iz)
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix) out((ix + sx) % n, (iy + sy) % n, (iz + sz) % n) = h(ix, iy, iz);
  return out;
}

Samples random_scalar(int n, std::uint64_t seed) {
  const Grid g = build_grid(n, 2 * kPi);
  return to_physical(random_field<double>(g, RandomFieldSpec{seed, 2.0, 2.0, 1.0}))[0];
}

const double kSphereArea = 4 * kPi;
const double kPlanePairArea = 8 * kPi * kPi;

}  // namespace

TEST_CASE("vorticity samples of shear flow are -cos y on the third component") {
  const Grid g = build_grid(16, 2 * kPi);
  const auto w = vorticity_samples(shear_field(g));
  for (int iz = 0; iz < 16; ++iz)
    for (int iy = 0; iy < 16; ++iy)
      for (int ix = 0; ix < 16; ++ix) {
        CHECK(std::abs(w[2](ix, iy, iz) + std::cos(w[2].coordinate(iy))) < 1e-14);
        CHECK(std::abs(w[0](ix, iy, iz)) < 1e-15);
        CHECK(std::abs(w[1](ix, iy, iz)) < 1e-15);
      }
  const auto zero = vorticity_samples(Field(g));
  for (const auto& s : zero) CHECK(s.values().abs().maxCoeff() == 0.0);
}

TEST_CASE("vorticity sample quadrature matches the coefficient norm") {
  const Grid g = build_grid(16, 2 * kPi);
  const Field u = random_field<double>(g, RandomFieldSpec{8, 4.0, 2.0, 1.0});
  const auto w = vorticity_samples(u);
  double sum = 0;
  for (const auto& s : w) sum += s.values().square().sum();
  const double quadrature = std::sqrt(sum * g.volume() / double(g.physical_size()));
  CHECK(quadrature == doctest::Approx(norm(curl(u))).epsilon(1e-12));
}

TEST_CASE("sphere isosurface area converges to 4 pi") {
  const Eigen::Vector3d center(kPi, kPi, kPi);
  const double a32 = isosurface_area(sphere_samples(32, center, 1.0), 0.0);
  const double a64 = isosurface_area(sphere_samples(64, center, 1.0), 0.0);
  const double e32 = std::abs(a32 - kSphereArea) / kSphereArea;
  const double e64 = std::abs(a64 - kSphereArea) / kSphereArea;
  MESSAGE("sphere relative error n=32: " << e32 << ", n=64: " << e64);
  CHECK(e32 <= 0.03);
  CHECK(e64 <= 0.01);
  CHECK(e64 <= e32);
}

TEST_CASE("level set of -cos y at zero is two full planes") {
  const Grid g = build_grid(64, 2 * kPi);
  Samples h(g);
  for (int iz = 0; iz < 64; ++iz)
    for (int iy = 0; iy < 64; ++iy)
      for (int ix = 0; ix < 64; ++ix) h(ix, iy, iz) = -std::cos(h.coordinate(iy));
  const double area = isosurface_area(h, 0.0);
  CHECK(area == doctest::Approx(kPlanePairArea).epsilon(0.01));
  // Flat level sets are reproduced exactly by linear interpolation.
  CHECK(area == doctest::Approx(kPlanePairArea).epsilon(1e-12));
  CHECK(isosurface_area(h, 0.5) == doctest::Approx(kPlanePairArea).epsilon(1e-12));
}

TEST_CASE("constant samples give an empty surface or a degenerate level") {
  const Grid g = build_grid(8, 2 * kPi);
  Samples h(g);
  h.values().setConstant(3.0);
  const TriangleSurface s = isosurface(h, 0.0);
  CHECK(s.total_area == 0.0);
  CHECK(s.triangles.empty());
  CHECK_THROWS_AS(isosurface(h, 3.0), DegenerateLevelError);
  CHECK_THROWS_AS(isosurface_area(h, 3.0), DegenerateLevelError);
}

TEST_CASE("levels outside the sample range give empty surfaces") {
  const Samples h = random_scalar(16, 2);
  CHECK(isosurface_area(h, h.values().maxCoeff() + 1e-3) == 0.0);
  CHECK(isosurface_area(h, h.values().minCoeff() - 1e-3) == 0.0);
}

TEST_CASE("isosurface area is scale equivariant and translation invariant") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const Samples h = random_scalar(16, seed);
    const double c = 0.3 * h.values().maxCoeff();
    const double base = isosurface_area(h, c);
    REQUIRE(base > 0);

    Samples doubled(h.grid(), 2.0 * h.values());
    CHECK(isosurface_area(doubled, 2.0 * c) == base);
    Samples scaled(h.grid(), 3.7 * h.values());
    CHECK(std::abs(isosurface_area(scaled, 3.7 * c) - base) <= 1e-12 * base);

    const Samples shifted = roll(h, 5, 11, 3);
    CHECK(std::abs(isosurface_area(shifted, c) - base) <= 1e-12 * base);
  }
}

TEST_CASE("surfaces crossing the periodic boundary lose no area") {
  const Eigen::Vector3d center(kPi, kPi, kPi);
  const Samples inside = sphere_samples(32, center, 1.0);
  // A whole-box shift of 16 cells moves the sphere across every face.
  const Samples across = roll(inside, 16, 16, 16);
  const double a = isosurface_area(inside, 0.0);
  CHECK(std::abs(isosurface_area(across, 0.0) - a) <= 1e-12 * a);
}

TEST_CASE("mesh vertices stay in the box and faces index them") {
  const Samples h = random_scalar(12, 5);
  const TriangleSurface s = isosurface(h, 0.1);
  REQUIRE_FALSE(s.triangles.empty());
  const double L = h.grid().box_length();
  for (const auto& v : s.vertices) {
    CHECK(v.minCoeff() >= 0.0);
    CHECK(v.maxCoeff() <= L);
  }
  double sum = 0;
  for (const auto& t : s.triangles) {
    for (int k : t) CHECK((k >= 0 && k < int(s.vertices.size())));
    sum += 0.5 * (s.vertices[t[1]] - s.vertices[t[0]]).cross(s.vertices[t[2]] - s.vertices[t[0]]).norm();
  }
  CHECK(sum == doctest::Approx(s.total_area).epsilon(1e-12));
  CHECK(isosurface_area(h, 0.1) == s.total_area);
  // Shared edges are deduplicated: far fewer vertices than triangle corners.
  CHECK(s.vertices.size() < 3 * s.triangles.size() / 2);

  const auto path = std::filesystem::temp_directory_path() / "hvns_mesh_test.obj";
  write_mesh(path, s);
  std::ifstream is(path);
  std::string line;
  std::size_t nv = 0, nf = 0;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      ++nv;
      double x, y, z;
      CHECK(bool(ls >> x >> y >> z));
    } else if (tag == "f") {
      ++nf;
      int i, j, k;
      REQUIRE(bool(ls >> i >> j >> k));
      CHECK(std::min({i, j, k}) >= 1);
      CHECK(std::max({i, j, k}) <= int(s.vertices.size()));
    }
  }
  CHECK(nv == s.vertices.size());
  CHECK(nf == s.triangles.size());
  CHECK_THROWS_AS(write_mesh("/nonexistent-dir/m.obj", s), IoError);
}

TEST_CASE("level grid is zero plus interior quantiles") {
  const Samples h = random_scalar(8, 3);
  const auto levels = sample_levels(h, {5, false});
  REQUIRE(levels.size() == 5);
  CHECK(levels[0] == 0.0);
  for (std::size_t i = 2; i < levels.size(); ++i) CHECK(levels[i] >= levels[i - 1]);
  CHECK(levels[1] > h.values().minCoeff());
  CHECK(levels.back() < h.values().maxCoeff());
  CHECK(sample_levels(h, {1, false}) == std::vector<double>{0.0});
  CHECK_THROWS_AS(sample_levels(h, {0, false}), DomainError);
}

TEST_CASE("nodal measure of shear flow is 8 pi^2") {
  const Grid g = build_grid(64, 2 * kPi);
  const NodalReport r = nodal_measure(shear_field(g));
  CHECK(r.sup_measure == doctest::Approx(kPlanePairArea).epsilon(0.01));
  CHECK(r.sup_component == 2);
  CHECK(r.degenerate);
  REQUIRE(r.components.size() == 3);
  CHECK(r.components[0].degenerate);
  CHECK(r.components[1].degenerate);
  CHECK_FALSE(r.components[2].degenerate);
  CHECK(r.components[2].levels.size() == 21);
}

TEST_CASE("nodal measure of the zero field is degenerate with zero measure") {
  const Grid g = build_grid(16, 2 * kPi);
  const NodalReport r = nodal_measure(Field(g));
  CHECK(r.degenerate);
  CHECK(r.sup_measure == 0.0);
}

TEST_CASE("single-level nodal measure equals the zero-level isosurface per component") {
  const Grid g = build_grid(16, 2 * kPi);
  const Field u = random_field<double>(g, RandomFieldSpec{6, 4.0, 2.0, 1.0});
  const NodalReport r = nodal_measure(u, {1, false}, 0.5, 2.0);
  const auto w = vorticity_samples(u);
  double sup = 0;
  REQUIRE(r.components.size() == 3);
  for (int c = 0; c < 3; ++c) {
    REQUIRE(r.components[c].areas.size() == 1);
    CHECK(r.components[c].areas[0] == isosurface_area(w[c], 0.0));
    CHECK(r.sup_measure >= r.components[c].areas[0]);
    sup = std::max(sup, r.components[c].areas[0]);
  }
  CHECK(r.sup_measure == sup);
  CHECK(r.t == 0.5);
  CHECK(r.l_hyper == 2.0);
  CHECK_FALSE(r.degenerate);

  const NodalReport full = nodal_measure(u, {21, true});
  CHECK(full.components.size() == 4);
  CHECK(full.sup_measure >= r.sup_measure);
  for (const auto& comp : full.components) {
    for (double a : comp.areas) CHECK(a >= 0.0);
  }
}
