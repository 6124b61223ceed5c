#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "dimerlab/errors.hpp"
#include "dimerlab/geometry.hpp"

namespace dimerlab {

enum class LatticeKind { SquareZ2, DirectedTriangular };

inline int out_degree(LatticeKind k) { return k == LatticeKind::SquareZ2 ? 4 : 3; }

// Unit axial step for outgoing direction k (0-based). Triangular axial coords
// (a, b) embed as delta * (a + b*tau); square as delta * (a + b*i).
std::array<int, 2> axial_step(LatticeKind kind, int dir);

// Embedded unit vector of direction k (1, i, -1, -i) or (1, tau, tau^2).
Complex dir_vector(LatticeKind kind, int dir);

enum class DriftMode { ConstantDrift, VariableDrift, ConstantMass, VariableMass };

// Drift vector field Delta(z), or in mass modes a killing amplitude m(z) >= 0
// returned in the real part.
struct DriftField {
  std::function<Complex(Complex)> eval;
  double bound = 0.0;
  DriftMode mode = DriftMode::ConstantDrift;

  static DriftField constant_drift(Complex delta);
  static DriftField variable_drift(std::function<Complex(Complex)> f, double bound);
  static DriftField constant_mass(double m);
  static DriftField variable_mass(std::function<double(Complex)> f, double bound);

  bool mass_mode() const {
    return mode == DriftMode::ConstantMass || mode == DriftMode::VariableMass;
  }
};

struct Region {
  enum class Shape { Rect, Disc, Explicit };
  Shape shape = Shape::Disc;
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // rect corners
  double cx = 0, cy = 0, radius = 0;      // disc
  std::vector<std::array<int, 2>> vertices;  // explicit axial coords

  static Region rect(double x0, double y0, double x1, double y1);
  static Region disc(double cx, double cy, double r);
  static Region explicit_vertices(std::vector<std::array<int, 2>> axial);

  bool contains(Complex z) const;
};

using VertexId = std::int32_t;

struct BoundaryEdge {
  VertexId from = -1;  // interior tail
  int dir = -1;        // outgoing direction index at `from`
  Complex out_pos;     // geometric coordinate of the exterior endpoint
  Complex midpoint() const;
};

struct AxialHash {
  std::size_t operator()(const std::array<int, 2>& a) const {
    return std::hash<std::uint64_t>()(
        (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a[0])) << 32) ^
        static_cast<std::uint32_t>(a[1]));
  }
};

// A finite piece of the delta-scaled lattice with near-critical weights.
// Immutable after construction; exterior endpoints of boundary edges are all
// identified with a single outer vertex for spanning-tree purposes.
class LatticeDomain {
 public:
  LatticeKind kind = LatticeKind::DirectedTriangular;
  double delta = 0.0;
  bool mass_mode = false;

  std::vector<std::array<int, 2>> axial;       // per vertex
  std::vector<Complex> pos;                    // per vertex
  std::vector<std::array<double, 4>> coeff;    // c_k per vertex (drift mode)
  std::vector<double> mass;                    // m(v) per vertex (mass mode)
  std::vector<std::array<VertexId, 4>> out_nbr;    // neighbor id or -1
  std::vector<std::array<std::int32_t, 4>> out_bedge;  // boundary edge id or -1
  std::vector<BoundaryEdge> boundary_edges;
  std::unordered_map<std::array<int, 2>, VertexId, AxialHash> index;

  int n_vertices() const { return static_cast<int>(axial.size()); }
  int deg() const { return out_degree(kind); }

  VertexId find_vertex(std::array<int, 2> a) const {
    auto it = index.find(a);
    return it == index.end() ? -1 : it->second;
  }
  VertexId nearest_vertex(Complex z) const;

  // Step weight a_k(v): 1 + c_k(v)*delta in drift mode, (1 - m^2 d^2)/deg in
  // mass mode.
  double weight(VertexId v, int dir) const;
  double log_weight(VertexId v, int dir) const;  // log1p-based
  double total_weight(VertexId v) const;

  // Killing amplitude associated with the vertex: stored mass in mass mode,
  // otherwise derived from the weights (zero for balanced weights is not
  // guaranteed; see girsanov::local_coefficients).
  double mass_at(VertexId v) const;

  // Drift vector recovered from the stored coefficients.
  Complex drift_at(VertexId v) const;
};

// Walk laws on a domain.
enum class WalkLaw { Drifted, Massive, Simple };

// Per-vertex jump probabilities for one (domain, law) pair, precomputed for
// sampling and matrix assembly. ghost[v] is the per-step death probability.
struct TransitionModel {
  const LatticeDomain* dom = nullptr;
  WalkLaw law = WalkLaw::Simple;
  std::vector<std::array<double, 4>> prob;
  std::vector<std::array<double, 4>> log_prob;
  std::vector<double> ghost;
  std::vector<double> log_ghost;

  int deg() const { return dom->deg(); }
};

TransitionModel make_transitions(const LatticeDomain& dom, WalkLaw law);

LatticeDomain build_domain(LatticeKind kind, const Region& region, double mesh,
                           const DriftField& field);

// Build a square-lattice domain with one fixed weight vector c at every
// vertex, subject only to the axis condition c1+c3 = c2+c4.
LatticeDomain build_square_biperiodic(const Region& region, double mesh,
                                      const std::array<double, 4>& c);

struct Symmetry {
  int turns = 0;                      // multiples of the lattice rotation angle
  std::array<int, 2> shift = {0, 0};  // axial translation

  static Symmetry identity() { return {}; }
  static Symmetry rotation_turns(int turns) { return Symmetry{turns, {0, 0}}; }
  // Throws UnsupportedSymmetry unless angle is a multiple of pi/2 (square)
  // or 2*pi/3 (triangular).
  static Symmetry rotation_angle(LatticeKind kind, double angle);
  static Symmetry translation(int ax, int ay) { return Symmetry{0, {ax, ay}}; }
};

// Domain with vertices mapped by g and weight indices permuted so the drift
// transforms as conj(g') * Delta.
LatticeDomain lattice_symmetry_apply(const LatticeDomain& dom, const Symmetry& g);

}  // namespace dimerlab
