#include "dimerlab/walk.hpp"

#include <algorithm>
#include <cmath>

#include "dimerlab/green.hpp"

namespace dimerlab {

namespace {

constexpr double kReachableFloor = 1e-300;

// Scan the cumulative step distribution; returns deg() for the ghost jump.
// Clamps rounding tails onto the last positive-probability option so the same
// uniforms always give the same choice across laws with equal probabilities.
int choose_move(const TransitionModel& t, VertexId v, double u, const double* extra_exit = nullptr) {
  const int deg = t.deg();
  double acc = 0.0;
  int last_positive = -1;
  for (int k = 0; k < deg; ++k) {
    double p = t.prob[v][k];
    if (p > 0) last_positive = k;
    acc += p;
    if (u < acc) return k;
  }
  double ghost = t.ghost[v] + (extra_exit ? *extra_exit : 0.0);
  if (ghost > 0) return deg;
  return last_positive;
}

}  // namespace

WalkPath sample_walk(const TransitionModel& t, VertexId start, std::uint64_t cap,
                     RngStream& rng) {
  const LatticeDomain& dom = *t.dom;
  WalkPath path;
  path.vertices.push_back(start);
  CompensatedSum logw;
  VertexId v = start;
  for (std::uint64_t s = 0; s < cap; ++s) {
    double u = rng.next_double();
    int mv = choose_move(t, v, u);
    if (mv == t.deg()) {
      path.terminal = WalkTerminal::Killed;
      logw.add(t.log_ghost[v]);
      path.log_weight = logw.value();
      return path;
    }
    logw.add(t.log_prob[v][mv]);
    path.steps.push_back(static_cast<std::int8_t>(mv));
    VertexId w = dom.out_nbr[v][mv];
    if (w < 0) {
      path.terminal = WalkTerminal::ExitedBoundary;
      path.exit_edge = dom.out_bedge[v][mv];
      path.log_weight = logw.value();
      return path;
    }
    path.vertices.push_back(w);
    v = w;
  }
  path.terminal = WalkTerminal::Truncated;
  path.log_weight = logw.value();
  return path;
}

WalkPath sample_walk(const LatticeDomain& dom, VertexId start, WalkLaw law, std::uint64_t cap,
                     RngStream& rng) {
  TransitionModel t = make_transitions(dom, law);
  return sample_walk(t, start, cap, rng);
}

LoopErasedPath loop_erase(const LatticeDomain& dom, const WalkPath& path) {
  if (path.terminal != WalkTerminal::ExitedBoundary)
    fail(Errc::NotExited, "loop erasure needs a boundary-exited path");
  std::vector<std::int32_t> stack_index(dom.n_vertices(), -1);
  LoopErasedPath out;
  out.vertices.reserve(64);
  for (VertexId v : path.vertices) {
    std::int32_t pos = stack_index[v];
    if (pos >= 0) {
      for (std::size_t i = pos + 1; i < out.vertices.size(); ++i)
        stack_index[out.vertices[i]] = -1;
      out.vertices.resize(pos + 1);
    } else {
      stack_index[v] = static_cast<std::int32_t>(out.vertices.size());
      out.vertices.push_back(v);
    }
  }
  out.exit_edge = path.exit_edge;
  out.source_length = path.n_steps();
  return out;
}

ConditionedModel make_conditioned(const LatticeDomain& dom, WalkLaw law,
                                  const std::vector<double>& h, std::int32_t target_edge) {
  ConditionedModel m;
  m.base = make_transitions(dom, law);
  m.h = h;
  m.target_edge = target_edge;
  const int n = dom.n_vertices();
  const int deg = dom.deg();
  m.exit_prob.assign(n, 0.0);
  for (int v = 0; v < n; ++v) {
    if (h[v] < kReachableFloor) {
      for (int k = 0; k < deg; ++k) {
        m.base.prob[v][k] = 0.0;
        m.base.log_prob[v][k] = -std::numeric_limits<double>::infinity();
      }
      m.base.ghost[v] = 0.0;
      continue;
    }
    double exit_mass = 0.0;
    for (int k = 0; k < deg; ++k) {
      VertexId w = dom.out_nbr[v][k];
      if (w >= 0) {
        m.base.prob[v][k] = m.base.prob[v][k] * h[w] / h[v];
        m.base.log_prob[v][k] =
            m.base.log_prob[v][k] + std::log(h[w]) - std::log(h[v]);
        if (h[w] < kReachableFloor) {
          m.base.prob[v][k] = 0.0;
          m.base.log_prob[v][k] = -std::numeric_limits<double>::infinity();
        }
      } else {
        std::int32_t be = dom.out_bedge[v][k];
        bool on_target = target_edge < 0 || be == target_edge;
        if (on_target) {
          exit_mass += m.base.prob[v][k] / h[v];
          m.base.log_prob[v][k] = m.base.log_prob[v][k] - std::log(h[v]);
        } else {
          m.base.log_prob[v][k] = -std::numeric_limits<double>::infinity();
        }
        m.base.prob[v][k] = 0.0;  // handled through exit_prob
      }
    }
    m.exit_prob[v] = exit_mass;
    m.base.ghost[v] = 0.0;  // conditioning kills the ghost transition
    m.base.log_ghost[v] = -std::numeric_limits<double>::infinity();
  }
  return m;
}

WalkPath sample_conditioned_walk(const LatticeDomain& dom, const ConditionedModel& model,
                                 VertexId start, std::uint64_t cap, RngStream& rng) {
  if (model.h[start] < kReachableFloor)
    fail(Errc::UnreachableTarget, "conditioning event unreachable from start");
  WalkPath path;
  path.vertices.push_back(start);
  CompensatedSum logw;
  VertexId v = start;
  const int deg = dom.deg();
  for (std::uint64_t s = 0; s < cap; ++s) {
    double u = rng.next_double();
    // Interior moves first, then the conditioned exit mass.
    double acc = 0.0;
    int mv = -1;
    int last_positive = -1;
    for (int k = 0; k < deg; ++k) {
      double p = model.base.prob[v][k];
      if (p > 0) last_positive = k;
      acc += p;
      if (u < acc) {
        mv = k;
        break;
      }
    }
    bool exits = false;
    if (mv < 0) {
      if (model.exit_prob[v] > 0) {
        exits = true;
      } else {
        mv = last_positive;  // rounding tail
      }
    }
    if (exits) {
      // Choose which target boundary edge (several when target is "alive").
      double acc2 = 0.0;
      double rest = u - acc;
      int chosen = -1;
      for (int k = 0; k < deg; ++k) {
        if (dom.out_nbr[v][k] >= 0) continue;
        std::int32_t be = dom.out_bedge[v][k];
        bool on_target = model.target_edge < 0 || be == model.target_edge;
        if (!on_target) continue;
        acc2 += std::exp(model.base.log_prob[v][k]);
        chosen = k;
        if (rest < acc2) break;
      }
      if (chosen < 0) fail(Errc::UnreachableTarget, "no target exit available");
      logw.add(model.base.log_prob[v][chosen]);
      path.steps.push_back(static_cast<std::int8_t>(chosen));
      path.terminal = WalkTerminal::ExitedBoundary;
      path.exit_edge = dom.out_bedge[v][chosen];
      path.log_weight = logw.value();
      return path;
    }
    logw.add(model.base.log_prob[v][mv]);
    path.steps.push_back(static_cast<std::int8_t>(mv));
    VertexId w = dom.out_nbr[v][mv];
    if (w < 0) fail(Errc::UnreachableTarget, "conditioned chain stepped onto a non-target edge");
    path.vertices.push_back(w);
    v = w;
  }
  path.terminal = WalkTerminal::Truncated;
  path.log_weight = logw.value();
  return path;
}

namespace {

struct WilsonSampler {
  const LatticeDomain& dom;
  const TransitionModel* plain = nullptr;
  const ConditionedModel* cond = nullptr;

  // Walk one step; returns direction, or deg() if the move is a conditioned
  // exit through a boundary edge.
  int step(VertexId v, RngStream& rng, std::int32_t& exit_edge) const {
    const int deg = dom.deg();
    double u = rng.next_double();
    if (plain) {
      int mv = choose_move(*plain, v, u);
      if (mv < deg && dom.out_nbr[v][mv] < 0) {
        exit_edge = dom.out_bedge[v][mv];
      }
      return mv;
    }
    double acc = 0.0;
    int last_positive = -1;
    for (int k = 0; k < deg; ++k) {
      double p = cond->base.prob[v][k];
      if (p > 0) last_positive = k;
      acc += p;
      if (u < acc) return k;
    }
    if (cond->exit_prob[v] > 0) {
      double rest = u - acc;
      double acc2 = 0.0;
      int chosen = -1;
      for (int k = 0; k < deg; ++k) {
        if (dom.out_nbr[v][k] >= 0) continue;
        std::int32_t be = dom.out_bedge[v][k];
        if (cond->target_edge >= 0 && be != cond->target_edge) continue;
        acc2 += std::exp(cond->base.log_prob[v][k]);
        chosen = k;
        if (rest < acc2) break;
      }
      if (chosen >= 0) {
        exit_edge = dom.out_bedge[v][chosen];
        return chosen;
      }
    }
    return last_positive;
  }
};

}  // namespace

Arborescence wilson_sample(const LatticeDomain& dom, TreeLaw law,
                           const std::vector<VertexId>& order, RngStream& rng) {
  const int n = dom.n_vertices();
  Arborescence tree;
  tree.parent_dir.assign(n, -1);
  tree.parent_bedge.assign(n, -1);

  TransitionModel plain;
  ConditionedModel cond;
  WilsonSampler sampler{dom};
  if (law == TreeLaw::Drifted) {
    plain = make_transitions(dom, WalkLaw::Drifted);
    sampler.plain = &plain;
  } else {
    std::vector<double> h = hitting_probability(dom, WalkLaw::Massive, kHitAlive).values;
    cond = make_conditioned(dom, WalkLaw::Massive, h, -1);
    sampler.cond = &cond;
  }

  std::vector<std::uint8_t> in_tree(n, 0);
  std::vector<std::int32_t> stack_index(n, -1);
  std::vector<VertexId> branch;
  std::vector<std::int8_t> branch_dirs;
  std::uint64_t branch_counter = 0;

  for (VertexId root : order) {
    if (in_tree[root]) continue;
    RngStream branch_rng = rng.derive(branch_counter++);
    branch.clear();
    branch_dirs.clear();
    VertexId v = root;
    branch.push_back(v);
    stack_index[v] = 0;
    std::int32_t exit_edge = -1;
    std::uint64_t steps = 0;
    while (true) {
      if (++steps > kDefaultStepCap) fail(Errc::NotExited, "wilson branch exceeded step cap");
      exit_edge = -1;
      int mv = sampler.step(v, branch_rng, exit_edge);
      if (exit_edge >= 0 || (mv >= 0 && mv < dom.deg() && dom.out_nbr[v][mv] < 0)) {
        branch_dirs.push_back(static_cast<std::int8_t>(mv));
        // Branch reaches the outer vertex.
        for (std::size_t i = 0; i + 1 < branch.size(); ++i)
          tree.parent_dir[branch[i]] = branch_dirs[i];
        tree.parent_dir[branch.back()] = branch_dirs.back();
        tree.parent_bedge[branch.back()] =
            exit_edge >= 0 ? exit_edge : dom.out_bedge[v][mv];
        for (VertexId b : branch) {
          in_tree[b] = 1;
          stack_index[b] = -1;
        }
        break;
      }
      VertexId w = dom.out_nbr[v][mv];
      if (in_tree[w]) {
        branch_dirs.push_back(static_cast<std::int8_t>(mv));
        for (std::size_t i = 0; i < branch.size(); ++i)
          tree.parent_dir[branch[i]] = branch_dirs[i];
        for (VertexId b : branch) {
          in_tree[b] = 1;
          stack_index[b] = -1;
        }
        break;
      }
      // Chronological loop erasure on the fly.
      std::int32_t pos = stack_index[w];
      if (pos >= 0) {
        for (std::size_t i = pos + 1; i < branch.size(); ++i) stack_index[branch[i]] = -1;
        branch.resize(pos + 1);
        branch_dirs.resize(pos);
        v = w;
      } else {
        branch_dirs.push_back(static_cast<std::int8_t>(mv));
        stack_index[w] = static_cast<std::int32_t>(branch.size());
        branch.push_back(w);
        v = w;
      }
    }
  }

  CompensatedSum logw;
  for (int v = 0; v < n; ++v) logw.add(dom.log_weight(v, tree.parent_dir[v]));
  tree.log_weight = logw.value();
  // Record boundary edges for branches that end on the boundary.
  for (int v = 0; v < n; ++v) {
    int k = tree.parent_dir[v];
    if (dom.out_nbr[v][k] < 0) tree.parent_bedge[v] = dom.out_bedge[v][k];
  }
  return tree;
}

Arborescence wilson_sample(const LatticeDomain& dom, TreeLaw law, RngStream& rng) {
  std::vector<VertexId> order(dom.n_vertices());
  for (int v = 0; v < dom.n_vertices(); ++v) order[v] = v;
  return wilson_sample(dom, law, order, rng);
}

namespace {

double log_binomial(std::int64_t n, std::int64_t k) {
  return std::lgamma(static_cast<double>(n + 1)) - std::lgamma(static_cast<double>(k + 1)) -
         std::lgamma(static_cast<double>(n - k + 1));
}

}  // namespace

double free_heat_kernel(LatticeKind kind, std::array<int, 2> d, std::int64_t n) {
  if (n < 0) return 0.0;
  const std::int64_t a = d[0], b = d[1];
  if (kind == LatticeKind::DirectedTriangular) {
    // Steps n1 in direction 1, n2 in tau, n3 in tau^2 are determined:
    // n1 - n3 = a, n2 - n3 = b, n1 + n2 + n3 = n.
    std::int64_t r = n - a - b;
    if (r % 3 != 0) return 0.0;
    std::int64_t n3 = r / 3;
    std::int64_t n1 = n3 + a;
    std::int64_t n2 = n3 + b;
    if (n1 < 0 || n2 < 0 || n3 < 0) return 0.0;
    double log_p = std::lgamma(static_cast<double>(n + 1)) -
                   std::lgamma(static_cast<double>(n1 + 1)) -
                   std::lgamma(static_cast<double>(n2 + 1)) -
                   std::lgamma(static_cast<double>(n3 + 1)) -
                   static_cast<double>(n) * std::log(3.0);
    return std::exp(log_p);
  }
  // Square lattice: sum over the number of horizontal steps.
  if ((((a + b) % 2 + 2) % 2) != (n % 2 + 2) % 2) return 0.0;
  double total = 0.0;
  for (std::int64_t j = std::abs(a); j <= n - std::abs(b); ++j) {
    if ((j - a) % 2 != 0) continue;
    std::int64_t m = n - j;
    if ((m - b) % 2 != 0) continue;
    double log_term = log_binomial(n, j) + log_binomial(j, (j + a) / 2) +
                      log_binomial(m, (m + b) / 2) -
                      static_cast<double>(n) * std::log(4.0);
    total += std::exp(log_term);
  }
  return total;
}

double heat_kernel_surrogate(LatticeKind kind, std::array<int, 2> d, std::int64_t n) {
  const double a = d[0], b = d[1];
  if (kind == LatticeKind::DirectedTriangular) {
    double r2 = a * a - a * b + b * b;
    return std::sqrt(27.0) / (2 * kPi * static_cast<double>(n)) * std::exp(-r2 / static_cast<double>(n));
  }
  double r2 = a * a + b * b;
  return 2.0 / (kPi * static_cast<double>(n)) * std::exp(-r2 / static_cast<double>(n));
}

double path_log_prob(const TransitionModel& t, const WalkPath& path) {
  const LatticeDomain& dom = *t.dom;
  CompensatedSum logw;
  VertexId v = path.vertices.at(0);
  for (std::size_t s = 0; s < path.steps.size(); ++s) {
    int k = path.steps[s];
    if (k < 0 || k >= t.deg()) fail(Errc::PathMismatch, "invalid step direction");
    logw.add(t.log_prob[v][k]);
    VertexId w = dom.out_nbr[v][k];
    if (w < 0) {
      if (s + 1 != path.steps.size()) fail(Errc::PathMismatch, "boundary step before path end");
      v = -1;
      break;
    }
    if (s + 1 < path.vertices.size() && path.vertices[s + 1] != w)
      fail(Errc::PathMismatch, "steps do not match vertices");
    v = w;
  }
  if (path.terminal == WalkTerminal::Killed) logw.add(t.log_ghost[path.vertices.back()]);
  return logw.value();
}

}  // namespace dimerlab
