#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <vector>

#include "dimerlab/lattice.hpp"
#include "dimerlab/walk.hpp"

namespace dimerlab {

inline constexpr std::int32_t kHitAlive = -1;

struct GreenTable {
  VertexId source = -1;
  std::vector<double> values;  // Z(source, v) over all vertices
  bool mass_mode = false;
  double solver_residual = 0.0;
};

struct HittingTable {
  std::int32_t target_edge = kHitAlive;
  std::vector<double> values;  // h(v) over all vertices
  double solver_residual = 0.0;
};

// Exact linear solves for the absorbing chain of a (possibly slit) domain.
// Removed vertices act as absorbing states; transitions into them become part
// of the boundary.
class AbsorbingSolver {
 public:
  AbsorbingSolver(const LatticeDomain& dom, const TransitionModel& t,
                  const std::vector<std::uint8_t>* removed = nullptr);
  ~AbsorbingSolver();
  AbsorbingSolver(AbsorbingSolver&&) noexcept;
  AbsorbingSolver& operator=(AbsorbingSolver&&) noexcept;

  // x = (I-Q)^{-1} r, with r indexed by vertex id (inactive entries ignored).
  // One iterative refinement pass; writes the final residual if asked.
  std::vector<double> solve(const std::vector<double>& rhs, double* residual = nullptr) const;
  // g = (I-Q)^{-T} e_source: g[z] = Z(source, z).
  std::vector<double> solve_transposed_unit(VertexId source, double* residual = nullptr) const;

  bool active(VertexId v) const;
  int n_active() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

GreenTable green_solve(const LatticeDomain& dom, VertexId source, WalkLaw law);

HittingTable hitting_probability(const LatticeDomain& dom, WalkLaw law, std::int32_t target_edge);

// Exit probability per boundary edge, computed from one transposed solve.
std::vector<double> exit_distribution(const LatticeDomain& dom, VertexId start, WalkLaw law);

// |(1-m^2 d^2) Z^m(w,z) - Z(w,z) + m^2 d^2 sum_v Z^m(w,v) Z(v,z)| / Z(w,z)
// for interior z and constant mass.
double mystery_identity_residual(const LatticeDomain& dom, VertexId w, VertexId z);

// --- slit-domain primitives -------------------------------------------------

// Hitting probability of the absorbed vertex `tip` in dom minus `removed`.
std::vector<double> slit_hitting_vertex(const LatticeDomain& dom, const TransitionModel& t,
                                        const std::vector<std::uint8_t>& removed, VertexId tip,
                                        double* residual = nullptr);
// Hitting probability of a specific boundary edge in dom minus `removed`.
std::vector<double> slit_hitting_edge(const LatticeDomain& dom, const TransitionModel& t,
                                      const std::vector<std::uint8_t>& removed,
                                      std::int32_t bedge, double* residual = nullptr);
// Z(source, .) on dom minus `removed`.
std::vector<double> slit_green_from(const LatticeDomain& dom, const TransitionModel& t,
                                    const std::vector<std::uint8_t>& removed, VertexId source,
                                    double* residual = nullptr);

// --- massive martingale observable -------------------------------------------

struct ObservableTrace {
  std::vector<double> values;  // M_n for n = 0..size-1
  VertexId probe = -1;
  VertexId root = -1;
};

// Walks the curve backward from its boundary end toward the root and evaluates
// the ratio of hitting probabilities of the growing tip from probe and root.
// `curve` must be the loop-erasure of a walk from `root`.
ObservableTrace martingale_observable(const LatticeDomain& dom, const LoopErasedPath& curve,
                                      VertexId probe, VertexId root,
                                      std::size_t max_steps = SIZE_MAX);

// One-step conditional law of the reversed loop-erased walk: given the reversed
// prefix of length n (n >= 1 removed vertices, tip = last removed), returns
// P(next vertex = w) over candidates w with an edge into the tip.
std::map<VertexId, double> lerw_next_step_distribution(const LatticeDomain& dom,
                                                       const TransitionModel& t,
                                                       const std::vector<std::uint8_t>& removed,
                                                       VertexId tip, VertexId root);

}  // namespace dimerlab
