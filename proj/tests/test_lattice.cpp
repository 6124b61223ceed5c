#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dimerlab/lattice.hpp"

using namespace dimerlab;

TEST_CASE("zero-drift triangular disc has uniform weights") {
  auto dom = build_domain(LatticeKind::DirectedTriangular, Region::disc(0, 0, 1), 0.05,
                          DriftField::constant_drift({0, 0}));
  CHECK(dom.n_vertices() > 1000);
  for (int v = 0; v < dom.n_vertices(); ++v)
    for (int k = 0; k < 3; ++k) CHECK(dom.weight(v, k) == doctest::Approx(1.0).epsilon(1e-15));
  auto t = make_transitions(dom, WalkLaw::Drifted);
  for (int k = 0; k < 3; ++k) CHECK(t.prob[0][k] == doctest::Approx(1.0 / 3).epsilon(1e-15));
}

TEST_CASE("square weights from a constant drift") {
  // Delta = (c1 + c2 i)/2 with c1 = 2, c2 = 0
  auto dom = build_domain(LatticeKind::SquareZ2, Region::rect(0, 0, 1, 1), 0.01,
                          DriftField::constant_drift({1, 0}));
  for (int v = 0; v < dom.n_vertices(); ++v) {
    CHECK(dom.weight(v, 0) == doctest::Approx(1.02).epsilon(1e-15));
    CHECK(dom.weight(v, 1) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(dom.weight(v, 2) == doctest::Approx(0.98).epsilon(1e-15));
    CHECK(dom.weight(v, 3) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(dom.coeff[v][0] + dom.coeff[v][2] == 0.0);
    CHECK(dom.coeff[v][1] + dom.coeff[v][3] == 0.0);
  }
}

TEST_CASE("drift field round trip is exact") {
  auto field = DriftField::variable_drift(
      [](Complex z) { return Complex(0.3 + z.real(), z.imag() - 0.2); }, 2.0);
  for (auto kind : {LatticeKind::SquareZ2, LatticeKind::DirectedTriangular}) {
    auto dom = build_domain(kind, Region::disc(0, 0, 0.5), 0.02, field);
    for (int v = 0; v < dom.n_vertices(); ++v) {
      Complex want = field.eval(dom.pos[v]);
      Complex got = dom.drift_at(v);
      CHECK(std::abs(want - got) < 1e-14);
    }
  }
}

TEST_CASE("jump probabilities sum to one") {
  auto dom = build_domain(LatticeKind::DirectedTriangular, Region::disc(0, 0, 0.4), 0.02,
                          DriftField::constant_drift({0.7, -0.4}));
  auto t = make_transitions(dom, WalkLaw::Drifted);
  for (int v = 0; v < dom.n_vertices(); ++v) {
    double s = t.prob[v][0] + t.prob[v][1] + t.prob[v][2];
    CHECK(std::abs(s - 1.0) < 1e-14);
  }
  auto dm = build_domain(LatticeKind::DirectedTriangular, Region::disc(0, 0, 0.4), 0.02,
                         DriftField::constant_mass(1.5));
  auto tm = make_transitions(dm, WalkLaw::Massive);
  for (int v = 0; v < dm.n_vertices(); ++v) {
    double s = tm.prob[v][0] + tm.prob[v][1] + tm.prob[v][2] + tm.ghost[v];
    CHECK(std::abs(s - 1.0) < 1e-14);
  }
}

TEST_CASE("domain construction failure modes") {
  CHECK_THROWS_WITH_AS(build_domain(LatticeKind::DirectedTriangular, Region::disc(10, 10, 1e-4),
                                    0.5, DriftField::constant_drift({0, 0})),
                       doctest::Contains("EmptyDomain"), Error);
  CHECK_THROWS_WITH_AS(build_domain(LatticeKind::DirectedTriangular, Region::disc(0, 0, 1), 0.01,
                                    DriftField::constant_drift({-60, 0})),
                       doctest::Contains("WeightUnderflow"), Error);

  // Annulus traps a hole.
  std::vector<std::array<int, 2>> ring;
  for (int a = -3; a <= 3; ++a)
    for (int b = -3; b <= 3; ++b) {
      if (a == 0 && b == 0) continue;
      ring.push_back({a, b});
    }
  CHECK_THROWS_WITH_AS(build_domain(LatticeKind::SquareZ2, Region::explicit_vertices(ring), 0.1,
                                    DriftField::constant_drift({0, 0})),
                       doctest::Contains("NotSimplyConnected"), Error);
}

TEST_CASE("boundary edges have interior tails and exterior heads") {
  auto dom = build_domain(LatticeKind::DirectedTriangular, Region::disc(0, 0, 0.3), 0.05,
                          DriftField::constant_drift({0, 0}));
  CHECK(dom.boundary_edges.size() > 0);
  for (auto& be : dom.boundary_edges) {
    CHECK(be.from >= 0);
    CHECK(dom.out_nbr[be.from][be.dir] == -1);
    auto s = axial_step(dom.kind, be.dir);
    std::array<int, 2> out = {dom.axial[be.from][0] + s[0], dom.axial[be.from][1] + s[1]};
    CHECK(dom.find_vertex(out) == -1);
  }
}

TEST_CASE("lattice symmetry: rotation by 2pi/3 conjugates the drift") {
  auto dom = build_domain(LatticeKind::DirectedTriangular, Region::disc(0, 0, 0.5), 0.02,
                          DriftField::constant_drift({1, 0}));
  auto g = Symmetry::rotation_angle(LatticeKind::DirectedTriangular, 2 * kPi / 3);
  auto rot = lattice_symmetry_apply(dom, g);
  REQUIRE(rot.n_vertices() == dom.n_vertices());
  Complex expect = std::conj(tau());  // conj(g) * Delta = tau^2
  for (int v = 0; v < rot.n_vertices(); ++v) CHECK(std::abs(rot.drift_at(v) - expect) < 1e-14);

  auto idn = lattice_symmetry_apply(dom, Symmetry::identity());
  REQUIRE(idn.n_vertices() == dom.n_vertices());
  for (int v = 0; v < dom.n_vertices(); ++v) {
    VertexId w = idn.find_vertex(dom.axial[v]);
    REQUIRE(w >= 0);
    for (int k = 0; k < 3; ++k) CHECK(idn.coeff[w][k] == dom.coeff[v][k]);
  }

  CHECK_THROWS_WITH_AS(Symmetry::rotation_angle(LatticeKind::DirectedTriangular, kPi / 3),
                       doctest::Contains("UnsupportedSymmetry"), Error);
}

TEST_CASE("square rotation by pi/2 conjugates the drift") {
  auto dom = build_domain(LatticeKind::SquareZ2, Region::disc(0, 0, 0.5), 0.02,
                          DriftField::constant_drift({0.4, 0.3}));
  auto rot = lattice_symmetry_apply(dom, Symmetry::rotation_angle(LatticeKind::SquareZ2, kPi / 2));
  Complex expect = Complex(0, -1) * Complex(0.4, 0.3);
  for (int v = 0; v < rot.n_vertices(); ++v) CHECK(std::abs(rot.drift_at(v) - expect) < 1e-14);
}

TEST_CASE("mass mode stores the killing amplitude") {
  auto dom = build_domain(LatticeKind::SquareZ2, Region::rect(0, 0, 0.5, 0.5), 0.05,
                          DriftField::constant_mass(1.25));
  for (int v = 0; v < dom.n_vertices(); ++v) {
    CHECK(dom.mass_at(v) == doctest::Approx(1.25).epsilon(1e-15));
    CHECK(dom.weight(v, 0) ==
          doctest::Approx((1.0 - 1.25 * 1.25 * 0.05 * 0.05) / 4).epsilon(1e-15));
  }
}

TEST_CASE("biperiodic square weights accept the relaxed axis condition") {
  auto dom = build_square_biperiodic(Region::rect(0, 0, 0.4, 0.4), 0.02, {2, 1, -1, 0});
  for (int v = 0; v < dom.n_vertices(); ++v) {
    CHECK(dom.weight(v, 0) == doctest::Approx(1.04).epsilon(1e-15));
    CHECK(dom.weight(v, 3) == doctest::Approx(1.0).epsilon(1e-15));
  }
  CHECK_THROWS_AS(build_square_biperiodic(Region::rect(0, 0, 0.4, 0.4), 0.02, {2, 1, -1, 5}),
                  Error);
}
