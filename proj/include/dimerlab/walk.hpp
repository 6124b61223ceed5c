#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dimerlab/lattice.hpp"
#include "dimerlab/rng.hpp"

namespace dimerlab {

enum class WalkTerminal { ExitedBoundary, Killed, Truncated };

struct WalkPath {
  std::vector<VertexId> vertices;  // interior vertices x_0..x_K
  std::vector<std::int8_t> steps;  // direction of each transition; when the
                                   // walk exits, the last step crosses the
                                   // boundary edge and steps.size() ==
                                   // vertices.size(); otherwise one less
  WalkTerminal terminal = WalkTerminal::Truncated;
  std::int32_t exit_edge = -1;  // boundary edge id when ExitedBoundary
  double log_weight = 0.0;      // sum of log transition probabilities

  std::size_t n_steps() const { return steps.size(); }
};

struct LoopErasedPath {
  std::vector<VertexId> vertices;  // simple path, respects edge orientation
  std::int32_t exit_edge = -1;
  std::size_t source_length = 0;  // steps of the generating walk
};

struct Arborescence {
  std::vector<std::int8_t> parent_dir;     // per interior vertex: out direction
  std::vector<std::int32_t> parent_bedge;  // boundary edge id when the parent
                                           // edge leaves the domain, else -1
  double log_weight = 0.0;                 // sum of log step weights a_k(v)
};

enum class TreeLaw { Drifted, MassiveConditionedAlive };

inline constexpr std::uint64_t kDefaultStepCap = 1000000000ULL;

WalkPath sample_walk(const LatticeDomain& dom, VertexId start, WalkLaw law,
                     std::uint64_t cap, RngStream& rng);
WalkPath sample_walk(const TransitionModel& t, VertexId start, std::uint64_t cap,
                     RngStream& rng);

LoopErasedPath loop_erase(const LatticeDomain& dom, const WalkPath& path);

// Conditioned sampling via an exact Doob h-transform. `h` must be the hitting
// table of the conditioning event (see green::hitting_probability); the
// returned model is a proper transition model of the conditioned chain where
// transitions into the target event are implicit (tracked by the sampler).
struct ConditionedModel {
  TransitionModel base;              // conditioned interior transitions
  std::vector<double> exit_prob;     // per vertex: probability of realizing the
                                     // target exit on the next step
  std::vector<double> h;             // conditioning function
  std::int32_t target_edge = -1;     // -1 means "exit alive" (any edge)
};

ConditionedModel make_conditioned(const LatticeDomain& dom, WalkLaw law,
                                  const std::vector<double>& h, std::int32_t target_edge);

WalkPath sample_conditioned_walk(const LatticeDomain& dom, const ConditionedModel& model,
                                 VertexId start, std::uint64_t cap, RngStream& rng);

Arborescence wilson_sample(const LatticeDomain& dom, TreeLaw law,
                           const std::vector<VertexId>& order, RngStream& rng);
// Convenience: natural vertex order.
Arborescence wilson_sample(const LatticeDomain& dom, TreeLaw law, RngStream& rng);

// Exact n-step transition probability of the simple walk on the infinite
// lattice, displacement in axial coordinates. Zero when unreachable.
double free_heat_kernel(LatticeKind kind, std::array<int, 2> displacement, std::int64_t n);

// Gaussian surrogate sqrt(27)/(2 pi n) exp(-|x|^2/n) for the triangular kernel
// (|x|^2 in lattice units).
double heat_kernel_surrogate(LatticeKind kind, std::array<int, 2> displacement, std::int64_t n);

// Recompute a path's probability under a law by direct per-step products
// (independent of the log_weight bookkeeping).
double path_log_prob(const TransitionModel& t, const WalkPath& path);

}  // namespace dimerlab
