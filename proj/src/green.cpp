#include "dimerlab/green.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>

namespace dimerlab {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

struct AbsorbingSolver::Impl {
  const LatticeDomain* dom = nullptr;
  const TransitionModel* trans = nullptr;
  std::vector<std::int32_t> dense_index;  // vertex id -> dense index or -1
  std::vector<VertexId> vertex_of;        // dense index -> vertex id
  SpMat A;                                // I - Q over active vertices
  Eigen::SparseLU<SpMat> lu;
  Eigen::SparseLU<SpMat> lu_t;
  bool lu_t_ready = false;
  SpMat At;

  void factor_transposed() {
    if (lu_t_ready) return;
    At = SpMat(A.transpose());
    lu_t.compute(At);
    if (lu_t.info() != Eigen::Success) fail(Errc::SingularSystem, "transposed LU failed");
    lu_t_ready = true;
  }
};

AbsorbingSolver::AbsorbingSolver(const LatticeDomain& dom, const TransitionModel& t,
                                 const std::vector<std::uint8_t>* removed)
    : impl_(std::make_unique<Impl>()) {
  impl_->dom = &dom;
  impl_->trans = &t;
  const int n = dom.n_vertices();
  impl_->dense_index.assign(n, -1);
  for (int v = 0; v < n; ++v) {
    if (removed && (*removed)[v]) continue;
    impl_->dense_index[v] = static_cast<std::int32_t>(impl_->vertex_of.size());
    impl_->vertex_of.push_back(v);
  }
  const int m = static_cast<int>(impl_->vertex_of.size());
  if (m == 0) fail(Errc::EmptyDomain, "no active vertex");
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(m) * (dom.deg() + 1));
  for (int i = 0; i < m; ++i) {
    VertexId v = impl_->vertex_of[i];
    trip.emplace_back(i, i, 1.0);
    for (int k = 0; k < dom.deg(); ++k) {
      VertexId w = dom.out_nbr[v][k];
      if (w < 0) continue;
      std::int32_t j = impl_->dense_index[w];
      if (j < 0) continue;  // absorbed by the slit
      trip.emplace_back(i, j, -t.prob[v][k]);
    }
  }
  impl_->A.resize(m, m);
  impl_->A.setFromTriplets(trip.begin(), trip.end());
  impl_->A.makeCompressed();
  impl_->lu.compute(impl_->A);
  if (impl_->lu.info() != Eigen::Success) fail(Errc::SingularSystem, "LU factorization failed");
}

AbsorbingSolver::~AbsorbingSolver() = default;
AbsorbingSolver::AbsorbingSolver(AbsorbingSolver&&) noexcept = default;
AbsorbingSolver& AbsorbingSolver::operator=(AbsorbingSolver&&) noexcept = default;

bool AbsorbingSolver::active(VertexId v) const { return impl_->dense_index[v] >= 0; }
int AbsorbingSolver::n_active() const { return static_cast<int>(impl_->vertex_of.size()); }

namespace {

double refine(const SpMat& A, const Eigen::SparseLU<SpMat>& lu, const Vec& b, Vec& x) {
  Vec r = b - A * x;
  double scale = std::max(b.lpNorm<Eigen::Infinity>(), 1.0);
  if (r.lpNorm<Eigen::Infinity>() > 1e-14 * scale) {
    x += lu.solve(r);
    r = b - A * x;
  }
  return r.lpNorm<Eigen::Infinity>() / scale;
}

}  // namespace

std::vector<double> AbsorbingSolver::solve(const std::vector<double>& rhs,
                                           double* residual) const {
  const int m = n_active();
  Vec b(m);
  for (int i = 0; i < m; ++i) b[i] = rhs[impl_->vertex_of[i]];
  Vec x = impl_->lu.solve(b);
  if (impl_->lu.info() != Eigen::Success) fail(Errc::SingularSystem, "solve failed");
  double res = refine(impl_->A, impl_->lu, b, x);
  if (residual) *residual = res;
  std::vector<double> out(impl_->dom->n_vertices(), 0.0);
  for (int i = 0; i < m; ++i) out[impl_->vertex_of[i]] = x[i];
  return out;
}

std::vector<double> AbsorbingSolver::solve_transposed_unit(VertexId source,
                                                           double* residual) const {
  impl_->factor_transposed();
  const int m = n_active();
  std::int32_t si = impl_->dense_index[source];
  if (si < 0) fail(Errc::ConfigInvalid, "source vertex is not active");
  Vec b = Vec::Zero(m);
  b[si] = 1.0;
  Vec x = impl_->lu_t.solve(b);
  if (impl_->lu_t.info() != Eigen::Success) fail(Errc::SingularSystem, "transposed solve failed");
  double res = refine(impl_->At, impl_->lu_t, b, x);
  if (residual) *residual = res;
  std::vector<double> out(impl_->dom->n_vertices(), 0.0);
  for (int i = 0; i < m; ++i) out[impl_->vertex_of[i]] = x[i];
  return out;
}

GreenTable green_solve(const LatticeDomain& dom, VertexId source, WalkLaw law) {
  TransitionModel t = make_transitions(dom, law);
  AbsorbingSolver solver(dom, t);
  GreenTable g;
  g.source = source;
  g.mass_mode = law == WalkLaw::Massive;
  g.values = solver.solve_transposed_unit(source, &g.solver_residual);
  return g;
}

namespace {

std::vector<double> boundary_rhs(const LatticeDomain& dom, const TransitionModel& t,
                                 std::int32_t target_edge) {
  std::vector<double> r(dom.n_vertices(), 0.0);
  if (target_edge == kHitAlive) {
    for (int v = 0; v < dom.n_vertices(); ++v)
      for (int k = 0; k < dom.deg(); ++k)
        if (dom.out_nbr[v][k] < 0) r[v] += t.prob[v][k];
  } else {
    const BoundaryEdge& be = dom.boundary_edges.at(target_edge);
    r[be.from] += t.prob[be.from][be.dir];
  }
  return r;
}

}  // namespace

HittingTable hitting_probability(const LatticeDomain& dom, WalkLaw law,
                                 std::int32_t target_edge) {
  TransitionModel t = make_transitions(dom, law);
  AbsorbingSolver solver(dom, t);
  HittingTable h;
  h.target_edge = target_edge;
  h.values = solver.solve(boundary_rhs(dom, t, target_edge), &h.solver_residual);
  return h;
}

std::vector<double> exit_distribution(const LatticeDomain& dom, VertexId start, WalkLaw law) {
  TransitionModel t = make_transitions(dom, law);
  AbsorbingSolver solver(dom, t);
  std::vector<double> z = solver.solve_transposed_unit(start);
  std::vector<double> out(dom.boundary_edges.size(), 0.0);
  for (std::size_t e = 0; e < dom.boundary_edges.size(); ++e) {
    const BoundaryEdge& be = dom.boundary_edges[e];
    out[e] = z[be.from] * t.prob[be.from][be.dir];
  }
  return out;
}

double mystery_identity_residual(const LatticeDomain& dom, VertexId w, VertexId z) {
  const double m = dom.mass_at(0);
  for (int v = 1; v < dom.n_vertices(); ++v)
    if (std::abs(dom.mass_at(v) - m) > 1e-12)
      fail(Errc::ConfigInvalid, "mystery identity needs constant mass");
  const double md2 = m * m * dom.delta * dom.delta;

  TransitionModel massive = make_transitions(dom, WalkLaw::Massive);
  TransitionModel simple = make_transitions(dom, WalkLaw::Simple);
  AbsorbingSolver sm(dom, massive);
  AbsorbingSolver s0(dom, simple);

  std::vector<double> zm_from_w = sm.solve_transposed_unit(w);  // Z^m(w, .)
  std::vector<double> e_z(dom.n_vertices(), 0.0);
  e_z[z] = 1.0;
  std::vector<double> z0_to_z = s0.solve(e_z);  // Z(., z)

  double corr = 0.0;
  for (int v = 0; v < dom.n_vertices(); ++v) corr += zm_from_w[v] * z0_to_z[v];
  double lhs = (1.0 - md2) * zm_from_w[z];
  double rhs = z0_to_z[w] - md2 * corr;
  return std::abs(lhs - rhs) / z0_to_z[w];
}

std::vector<double> slit_hitting_vertex(const LatticeDomain& dom, const TransitionModel& t,
                                        const std::vector<std::uint8_t>& removed, VertexId tip,
                                        double* residual) {
  AbsorbingSolver solver(dom, t, &removed);
  std::vector<double> r(dom.n_vertices(), 0.0);
  for (int v = 0; v < dom.n_vertices(); ++v) {
    if (removed[v]) continue;
    for (int k = 0; k < dom.deg(); ++k)
      if (dom.out_nbr[v][k] == tip) r[v] += t.prob[v][k];
  }
  return solver.solve(r, residual);
}

std::vector<double> slit_hitting_edge(const LatticeDomain& dom, const TransitionModel& t,
                                      const std::vector<std::uint8_t>& removed,
                                      std::int32_t bedge, double* residual) {
  AbsorbingSolver solver(dom, t, &removed);
  std::vector<double> r(dom.n_vertices(), 0.0);
  const BoundaryEdge& be = dom.boundary_edges.at(bedge);
  r[be.from] += t.prob[be.from][be.dir];
  return solver.solve(r, residual);
}

std::vector<double> slit_green_from(const LatticeDomain& dom, const TransitionModel& t,
                                    const std::vector<std::uint8_t>& removed, VertexId source,
                                    double* residual) {
  AbsorbingSolver solver(dom, t, &removed);
  return solver.solve_transposed_unit(source, residual);
}

ObservableTrace martingale_observable(const LatticeDomain& dom, const LoopErasedPath& curve,
                                      VertexId probe, VertexId root, std::size_t max_steps) {
  if (curve.vertices.empty() || curve.vertices.front() != root)
    fail(Errc::ConfigInvalid, "curve must start at the root vertex");
  if (curve.exit_edge < 0) fail(Errc::ConfigInvalid, "curve must end on the boundary");
  for (VertexId v : curve.vertices)
    if (v == probe) fail(Errc::ProbeSwallowed, "curve passes through the probe");

  TransitionModel t = make_transitions(dom, WalkLaw::Massive);
  ObservableTrace trace;
  trace.probe = probe;
  trace.root = root;

  const std::size_t len = curve.vertices.size();
  std::vector<std::uint8_t> removed(dom.n_vertices(), 0);

  // n = 0: plain domain, target = the exit boundary edge.
  {
    std::vector<double> h = slit_hitting_edge(dom, t, removed, curve.exit_edge);
    if (h[root] <= 0) fail(Errc::SingularSystem, "root cannot reach the curve start");
    trace.values.push_back(h[probe] / h[root]);
  }
  // n >= 1: remove the last n interior vertices; tip is the last removed one.
  std::size_t n_max = std::min(max_steps, len - 1);
  for (std::size_t n = 1; n <= n_max; ++n) {
    VertexId tip = curve.vertices[len - n];
    removed[tip] = 1;
    std::vector<double> h = slit_hitting_vertex(dom, t, removed, tip);
    if (h[probe] <= 0 && probe != tip)
      fail(Errc::ProbeSwallowed, "probe disconnected from the curve tip");
    if (h[root] <= 0) fail(Errc::SingularSystem, "root disconnected from the curve tip");
    trace.values.push_back(h[probe] / h[root]);
  }
  return trace;
}

std::map<VertexId, double> lerw_next_step_distribution(const LatticeDomain& dom,
                                                       const TransitionModel& t,
                                                       const std::vector<std::uint8_t>& removed,
                                                       VertexId tip, VertexId root) {
  std::vector<double> z = slit_green_from(dom, t, removed, root);  // Z(root, .) on the slit
  std::map<VertexId, double> law;
  double total = 0.0;
  for (int w = 0; w < dom.n_vertices(); ++w) {
    if (removed[w] || w == tip) continue;
    for (int k = 0; k < dom.deg(); ++k) {
      if (dom.out_nbr[w][k] == tip) {
        double p = t.prob[w][k] * z[w];
        if (p > 0) {
          law[w] += p;
          total += p;
        }
      }
    }
  }
  for (auto& [w, p] : law) p /= total;
  return law;
}

}  // namespace dimerlab
