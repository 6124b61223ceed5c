#include "dimerlab/girsanov.hpp"

#include <cmath>

namespace dimerlab {

LocalCoefficients local_coefficients(const LatticeDomain& dom, VertexId v) {
  LocalCoefficients lc;
  const int deg = dom.deg();
  const double d = dom.delta;
  double log_a = std::log(dom.total_weight(v));
  double sum_log = 0.0;
  for (int k = 0; k < deg; ++k) {
    double lw = dom.log_weight(v, k);
    lc.alpha_k[k] = lw / d;
    sum_log += lw;
  }
  Complex alpha(0, 0);
  for (int k = 0; k < deg; ++k) alpha += lc.alpha_k[k] * dir_vector(dom.kind, k);
  lc.alpha = alpha;

  const double log_a_over_deg = log_a - std::log(static_cast<double>(deg));
  if (dom.kind == LatticeKind::DirectedTriangular) {
    // exp(-d^2 beta^2) = (a/3)^{-3} prod a_k
    lc.beta2 = (3.0 * log_a_over_deg - sum_log) / (d * d);
  } else {
    // exp(-d^2 beta_i^2) = a_k a_{k+2} / (a/4)^2
    for (int axis = 0; axis < 2; ++axis) {
      double num = dom.log_weight(v, axis) + dom.log_weight(v, axis + 2);
      lc.beta2_axis[axis] = (2.0 * log_a_over_deg - num) / (d * d);
    }
  }
  // (1/deg)(1 - m^2 d^2) = (prod a_k)^{1/deg} / a
  double m2 = -std::expm1(sum_log / deg - log_a_over_deg) / (d * d);
  lc.mass = m2 > 0 ? std::sqrt(m2) : 0.0;
  return lc;
}

GirsanovDecomposition rn_decompose(const LatticeDomain& dom, const WalkPath& path) {
  GirsanovDecomposition g;
  g.n = path.steps.size();
  CompensatedSum m_sum, v_sum;
  const double d = dom.delta;
  VertexId v = path.vertices.at(0);
  for (std::size_t s = 0; s < path.steps.size(); ++s) {
    int k = path.steps[s];
    if (k < 0 || k >= dom.deg()) fail(Errc::PathMismatch, "invalid step direction");
    LocalCoefficients lc = local_coefficients(dom, v);
    Complex dx = d * dir_vector(dom.kind, k);
    if (dom.kind == LatticeKind::DirectedTriangular) {
      m_sum.add((2.0 / 3.0) * dot(lc.alpha, dx));
      v_sum.add((2.0 / 3.0) * d * d * lc.beta2);
    } else {
      m_sum.add(0.5 * dot(lc.alpha, dx));
      int axis = k % 2;
      v_sum.add(d * d * lc.beta2_axis[axis]);
    }
    VertexId w = dom.out_nbr[v][k];
    if (w < 0) {
      if (s + 1 != path.steps.size()) fail(Errc::PathMismatch, "boundary step before path end");
      break;
    }
    v = w;
  }
  g.M = m_sum.value();
  g.V = v_sum.value();
  return g;
}

std::vector<double> mass_drift_gap(const LatticeDomain& dom) {
  if (dom.mass_mode) fail(Errc::ConfigInvalid, "mass-drift gap needs a drift-mode domain");
  std::vector<double> gap(dom.n_vertices());
  for (int v = 0; v < dom.n_vertices(); ++v) {
    LocalCoefficients lc = local_coefficients(dom, v);
    double m2 = lc.mass * lc.mass;
    gap[v] = m2 - std::norm(dom.drift_at(v));
  }
  return gap;
}

double rn_loop_invariance_check(const LatticeDomain& dom, const WalkPath& loop) {
  if (loop.vertices.empty() || loop.steps.empty() ||
      loop.terminal == WalkTerminal::ExitedBoundary)
    fail(Errc::NotALoop, "path must stay inside the domain");
  VertexId v = loop.vertices.front();
  for (std::size_t s = 0; s < loop.steps.size(); ++s) {
    VertexId w = dom.out_nbr[v][loop.steps[s]];
    if (w < 0) fail(Errc::NotALoop, "path leaves the domain");
    v = w;
  }
  if (v != loop.vertices.front()) fail(Errc::NotALoop, "path does not return to its start");

  TransitionModel drifted = make_transitions(dom, WalkLaw::Drifted);
  TransitionModel massive = make_transitions(dom, WalkLaw::Massive);
  double log_drift = path_log_prob(drifted, loop);
  double log_mass = path_log_prob(massive, loop);
  return std::abs(std::expm1(log_drift - log_mass));
}

}  // namespace dimerlab
