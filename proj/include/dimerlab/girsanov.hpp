#pragma once

#include "dimerlab/lattice.hpp"
#include "dimerlab/walk.hpp"

namespace dimerlab {

struct GirsanovDecomposition {
  double M = 0.0;  // martingale part
  double V = 0.0;  // quadratic-variation part
  std::size_t n = 0;
  double log_rn() const { return M - V / 2; }
};

struct LocalCoefficients {
  Complex alpha;                      // alpha_1 + alpha_2 tau + ... as a vector
  std::array<double, 4> alpha_k = {0, 0, 0, 0};
  double beta2 = 0.0;                 // triangular: beta^2
  std::array<double, 2> beta2_axis = {0, 0};  // square: (beta_1^2, beta_2^2)
  double mass = 0.0;                  // m(v)
};

// alpha_k = log(a_k)/delta, beta and mass per the defining equations, all
// evaluated in log space.
LocalCoefficients local_coefficients(const LatticeDomain& dom, VertexId v);

// Exact Radon-Nikodym decomposition of the drifted law against the simple law
// along a fixed path: exp(M - V/2) = P^Delta(path) / P^0(path).
GirsanovDecomposition rn_decompose(const LatticeDomain& dom, const WalkPath& path);

// m(v)^2 - |Delta(v)|^2 per vertex.
std::vector<double> mass_drift_gap(const LatticeDomain& dom);

// |P^Delta(loop)/P^m(loop) - 1| for a cycle on a constant-weight domain.
double rn_loop_invariance_check(const LatticeDomain& dom, const WalkPath& loop);

}  // namespace dimerlab
