#include "dimerlab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace dimerlab {

std::array<int, 2> axial_step(LatticeKind kind, int dir) {
  if (kind == LatticeKind::SquareZ2) {
    static const std::array<std::array<int, 2>, 4> steps = {{{1, 0}, {0, 1}, {-1, 0}, {0, -1}}};
    return steps[dir];
  }
  // tau^2 = -1 - tau
  static const std::array<std::array<int, 2>, 3> steps = {{{1, 0}, {0, 1}, {-1, -1}}};
  return steps[dir];
}

Complex dir_vector(LatticeKind kind, int dir) {
  if (kind == LatticeKind::SquareZ2) {
    static const Complex dirs[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    return dirs[dir];
  }
  const Complex t = tau();
  const Complex dirs[3] = {{1, 0}, t, t * t};
  return dirs[dir];
}

DriftField DriftField::constant_drift(Complex delta) {
  DriftField f;
  f.eval = [delta](Complex) { return delta; };
  f.bound = std::abs(delta);
  f.mode = DriftMode::ConstantDrift;
  return f;
}

DriftField DriftField::variable_drift(std::function<Complex(Complex)> fn, double bound) {
  DriftField f;
  f.eval = std::move(fn);
  f.bound = bound;
  f.mode = DriftMode::VariableDrift;
  return f;
}

DriftField DriftField::constant_mass(double m) {
  DriftField f;
  f.eval = [m](Complex) { return Complex(m, 0); };
  f.bound = m;
  f.mode = DriftMode::ConstantMass;
  return f;
}

DriftField DriftField::variable_mass(std::function<double(Complex)> fn, double bound) {
  DriftField f;
  f.eval = [fn = std::move(fn)](Complex z) { return Complex(fn(z), 0); };
  f.bound = bound;
  f.mode = DriftMode::VariableMass;
  return f;
}

Region Region::rect(double x0, double y0, double x1, double y1) {
  Region r;
  r.shape = Shape::Rect;
  r.x0 = std::min(x0, x1);
  r.y0 = std::min(y0, y1);
  r.x1 = std::max(x0, x1);
  r.y1 = std::max(y0, y1);
  return r;
}

Region Region::disc(double cx, double cy, double rad) {
  Region r;
  r.shape = Shape::Disc;
  r.cx = cx;
  r.cy = cy;
  r.radius = rad;
  return r;
}

Region Region::explicit_vertices(std::vector<std::array<int, 2>> axial) {
  Region r;
  r.shape = Shape::Explicit;
  r.vertices = std::move(axial);
  return r;
}

bool Region::contains(Complex z) const {
  switch (shape) {
    case Shape::Rect:
      return z.real() >= x0 && z.real() <= x1 && z.imag() >= y0 && z.imag() <= y1;
    case Shape::Disc:
      return std::norm(z - Complex(cx, cy)) <= radius * radius;
    case Shape::Explicit:
      return false;  // membership handled by vertex list
  }
  return false;
}

Complex BoundaryEdge::midpoint() const { return out_pos; }

namespace {

Complex embed(LatticeKind kind, std::array<int, 2> a, double delta) {
  if (kind == LatticeKind::SquareZ2) return Complex(a[0] * delta, a[1] * delta);
  return delta * (Complex(a[0], 0) + static_cast<double>(a[1]) * tau());
}

// Undirected skeleton steps: out directions plus their reverses.
std::vector<std::array<int, 2>> skeleton_steps(LatticeKind kind) {
  std::vector<std::array<int, 2>> s;
  for (int k = 0; k < out_degree(kind); ++k) {
    auto st = axial_step(kind, k);
    s.push_back(st);
    std::array<int, 2> rev = {-st[0], -st[1]};
    if (std::find(s.begin(), s.end(), rev) == s.end()) s.push_back(rev);
  }
  return s;
}

void assign_weights(LatticeDomain& dom, const DriftField& field) {
  const int n = dom.n_vertices();
  const int deg = dom.deg();
  dom.mass_mode = field.mass_mode();
  if (dom.mass_mode) {
    dom.mass.resize(n);
    for (int v = 0; v < n; ++v) {
      double m = field.eval(dom.pos[v]).real();
      if (m < 0) fail(Errc::ConfigInvalid, "negative mass amplitude");
      dom.mass[v] = m;
      if (1.0 - m * m * dom.delta * dom.delta <= 0.0)
        fail(Errc::WeightUnderflow, "killing probability >= 1");
    }
    dom.coeff.assign(n, {0, 0, 0, 0});
    return;
  }
  dom.coeff.resize(n);
  for (int v = 0; v < n; ++v) {
    Complex drift = field.eval(dom.pos[v]);
    std::array<double, 4> c = {0, 0, 0, 0};
    if (dom.kind == LatticeKind::SquareZ2) {
      c[0] = 2.0 * drift.real();
      c[1] = 2.0 * drift.imag();
      c[2] = -c[0];
      c[3] = -c[1];
    } else {
      for (int k = 0; k < 3; ++k) c[k] = 2.0 * dot(drift, dir_vector(dom.kind, k));
    }
    for (int k = 0; k < deg; ++k)
      if (1.0 + c[k] * dom.delta <= 0.0) fail(Errc::WeightUnderflow, "step weight <= 0");
    dom.coeff[v] = c;
  }
}

}  // namespace

VertexId LatticeDomain::nearest_vertex(Complex z) const {
  VertexId best = -1;
  double best_d = std::numeric_limits<double>::max();
  for (int v = 0; v < n_vertices(); ++v) {
    double d = std::norm(pos[v] - z);
    if (d < best_d) {
      best_d = d;
      best = v;
    }
  }
  return best;
}

double LatticeDomain::weight(VertexId v, int dir) const {
  if (mass_mode) {
    double m = mass[v];
    return (1.0 - m * m * delta * delta) / deg();
  }
  return 1.0 + coeff[v][dir] * delta;
}

double LatticeDomain::log_weight(VertexId v, int dir) const {
  if (mass_mode) return std::log(weight(v, dir));
  return std::log1p(coeff[v][dir] * delta);
}

double LatticeDomain::total_weight(VertexId v) const {
  double s = 0;
  for (int k = 0; k < deg(); ++k) s += weight(v, k);
  return s;
}

double LatticeDomain::mass_at(VertexId v) const {
  if (mass_mode) return mass[v];
  // (1 - m^2 d^2)/deg = (prod a_k)^(1/deg) / a, evaluated in log space
  double log_gm = 0;
  for (int k = 0; k < deg(); ++k) log_gm += log_weight(v, k);
  log_gm /= deg();
  double x = log_gm + std::log(static_cast<double>(deg())) - std::log(total_weight(v));
  double m2 = -std::expm1(x) / (delta * delta);
  return m2 > 0 ? std::sqrt(m2) : 0.0;
}

Complex LatticeDomain::drift_at(VertexId v) const {
  if (mass_mode) return Complex(0, 0);
  Complex d(0, 0);
  for (int k = 0; k < deg(); ++k) d += coeff[v][k] * dir_vector(kind, k);
  return d / static_cast<double>(deg());
}

TransitionModel make_transitions(const LatticeDomain& dom, WalkLaw law) {
  TransitionModel t;
  t.dom = &dom;
  t.law = law;
  const int n = dom.n_vertices();
  const int deg = dom.deg();
  t.prob.assign(n, {0, 0, 0, 0});
  t.log_prob.assign(n, {0, 0, 0, 0});
  t.ghost.assign(n, 0.0);
  t.log_ghost.assign(n, -std::numeric_limits<double>::infinity());
  for (int v = 0; v < n; ++v) {
    switch (law) {
      case WalkLaw::Simple: {
        for (int k = 0; k < deg; ++k) {
          t.prob[v][k] = 1.0 / deg;
          t.log_prob[v][k] = -std::log(static_cast<double>(deg));
        }
        break;
      }
      case WalkLaw::Drifted: {
        double a = dom.total_weight(v);
        for (int k = 0; k < deg; ++k) {
          t.prob[v][k] = dom.weight(v, k) / a;
          t.log_prob[v][k] = dom.log_weight(v, k) - std::log(a);
        }
        break;
      }
      case WalkLaw::Massive: {
        double m = dom.mass_at(v);
        double death = m * m * dom.delta * dom.delta;
        double step = (1.0 - death) / deg;
        for (int k = 0; k < deg; ++k) {
          t.prob[v][k] = step;
          t.log_prob[v][k] = std::log(step);
        }
        t.ghost[v] = death;
        t.log_ghost[v] = death > 0 ? std::log(death) : -std::numeric_limits<double>::infinity();
        break;
      }
    }
  }
  return t;
}

namespace {

LatticeDomain build_from_candidates(LatticeKind kind, double mesh,
                                    std::vector<std::array<int, 2>> candidates) {
  if (candidates.empty()) fail(Errc::EmptyDomain, "no lattice vertex inside region");

  std::unordered_map<std::array<int, 2>, int, AxialHash> cand_index;
  cand_index.reserve(candidates.size() * 2);
  for (std::size_t i = 0; i < candidates.size(); ++i)
    cand_index.emplace(candidates[i], static_cast<int>(i));

  auto steps = skeleton_steps(kind);

  // Largest connected component over the undirected skeleton.
  std::vector<int> comp(candidates.size(), -1);
  int n_comp = 0;
  std::vector<int> comp_size;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (comp[i] >= 0) continue;
    int size = 0;
    std::deque<int> queue = {static_cast<int>(i)};
    comp[i] = n_comp;
    while (!queue.empty()) {
      int u = queue.front();
      queue.pop_front();
      ++size;
      for (auto s : steps) {
        std::array<int, 2> a = {candidates[u][0] + s[0], candidates[u][1] + s[1]};
        auto it = cand_index.find(a);
        if (it != cand_index.end() && comp[it->second] < 0) {
          comp[it->second] = n_comp;
          queue.push_back(it->second);
        }
      }
    }
    comp_size.push_back(size);
    ++n_comp;
  }
  int best_comp =
      static_cast<int>(std::max_element(comp_size.begin(), comp_size.end()) - comp_size.begin());

  LatticeDomain dom;
  dom.kind = kind;
  dom.delta = mesh;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (comp[i] != best_comp) continue;
    VertexId id = static_cast<VertexId>(dom.axial.size());
    dom.axial.push_back(candidates[i]);
    dom.index.emplace(candidates[i], id);
  }
  dom.pos.resize(dom.axial.size());
  for (int v = 0; v < dom.n_vertices(); ++v) dom.pos[v] = embed(kind, dom.axial[v], mesh);

  // Simple connectivity: flood the complement within an enlarged bounding box;
  // every complement cell must reach the box frame.
  int lo_a = dom.axial[0][0], hi_a = lo_a, lo_b = dom.axial[0][1], hi_b = lo_b;
  for (auto& a : dom.axial) {
    lo_a = std::min(lo_a, a[0]);
    hi_a = std::max(hi_a, a[0]);
    lo_b = std::min(lo_b, a[1]);
    hi_b = std::max(hi_b, a[1]);
  }
  lo_a -= 2;
  lo_b -= 2;
  hi_a += 2;
  hi_b += 2;
  const int wa = hi_a - lo_a + 1, wb = hi_b - lo_b + 1;
  std::vector<std::uint8_t> state(static_cast<std::size_t>(wa) * wb, 0);  // 1 interior, 2 seen
  auto cell = [&](int a, int b) -> std::uint8_t& {
    return state[static_cast<std::size_t>(a - lo_a) * wb + (b - lo_b)];
  };
  for (auto& a : dom.axial) cell(a[0], a[1]) = 1;
  std::deque<std::array<int, 2>> queue;
  queue.push_back({lo_a, lo_b});
  cell(lo_a, lo_b) = 2;
  while (!queue.empty()) {
    auto [a, b] = queue.front();
    queue.pop_front();
    for (auto s : steps) {
      int na = a + s[0], nb = b + s[1];
      if (na < lo_a || na > hi_a || nb < lo_b || nb > hi_b) continue;
      auto& c = cell(na, nb);
      if (c == 0) {
        c = 2;
        queue.push_back({na, nb});
      }
    }
  }
  for (int a = lo_a; a <= hi_a; ++a)
    for (int b = lo_b; b <= hi_b; ++b)
      if (cell(a, b) == 0) fail(Errc::NotSimplyConnected, "region traps a hole");

  // Outgoing adjacency and boundary edges, enumerated in vertex-major order.
  const int deg = dom.deg();
  dom.out_nbr.assign(dom.n_vertices(), {-1, -1, -1, -1});
  dom.out_bedge.assign(dom.n_vertices(), {-1, -1, -1, -1});
  for (int v = 0; v < dom.n_vertices(); ++v) {
    for (int k = 0; k < deg; ++k) {
      auto s = axial_step(kind, k);
      std::array<int, 2> a = {dom.axial[v][0] + s[0], dom.axial[v][1] + s[1]};
      VertexId w = dom.find_vertex(a);
      if (w >= 0) {
        dom.out_nbr[v][k] = w;
      } else {
        BoundaryEdge be;
        be.from = v;
        be.dir = k;
        be.out_pos = embed(kind, a, mesh);
        dom.out_bedge[v][k] = static_cast<std::int32_t>(dom.boundary_edges.size());
        dom.boundary_edges.push_back(be);
      }
    }
  }
  return dom;
}

}  // namespace

LatticeDomain build_domain(LatticeKind kind, const Region& region, double mesh,
                           const DriftField& field) {
  if (mesh <= 0) fail(Errc::ConfigInvalid, "mesh must be positive");

  std::vector<std::array<int, 2>> candidates;
  if (region.shape == Region::Shape::Explicit) {
    candidates = region.vertices;
  } else {
    // Conservative axial bounding box around the region.
    double x0, y0, x1, y1;
    if (region.shape == Region::Shape::Rect) {
      x0 = region.x0;
      y0 = region.y0;
      x1 = region.x1;
      y1 = region.y1;
    } else {
      x0 = region.cx - region.radius;
      y0 = region.cy - region.radius;
      x1 = region.cx + region.radius;
      y1 = region.cy + region.radius;
    }
    long lo_a, hi_a, lo_b, hi_b;
    if (kind == LatticeKind::SquareZ2) {
      lo_a = static_cast<long>(std::floor(x0 / mesh)) - 1;
      hi_a = static_cast<long>(std::ceil(x1 / mesh)) + 1;
      lo_b = static_cast<long>(std::floor(y0 / mesh)) - 1;
      hi_b = static_cast<long>(std::ceil(y1 / mesh)) + 1;
    } else {
      // z = delta*(a + b*tau): y = delta*b*sin(2pi/3), x = delta*(a - b/2).
      const double sy = tau().imag();
      lo_b = static_cast<long>(std::floor(y0 / (mesh * sy))) - 1;
      hi_b = static_cast<long>(std::ceil(y1 / (mesh * sy))) + 1;
      lo_a = static_cast<long>(std::floor(x0 / mesh + static_cast<double>(lo_b) / 2)) - 2;
      hi_a = static_cast<long>(std::ceil(x1 / mesh + static_cast<double>(hi_b) / 2)) + 2;
    }
    for (long b = lo_b; b <= hi_b; ++b)
      for (long a = lo_a; a <= hi_a; ++a) {
        std::array<int, 2> ax = {static_cast<int>(a), static_cast<int>(b)};
        if (region.contains(embed(kind, ax, mesh))) candidates.push_back(ax);
      }
  }

  LatticeDomain dom = build_from_candidates(kind, mesh, std::move(candidates));
  assign_weights(dom, field);
  return dom;
}

LatticeDomain build_square_biperiodic(const Region& region, double mesh,
                                      const std::array<double, 4>& c) {
  if (std::abs((c[0] + c[2]) - (c[1] + c[3])) > 1e-12)
    fail(Errc::ConfigInvalid, "axis condition c1+c3 = c2+c4 violated");
  LatticeDomain dom = build_domain(LatticeKind::SquareZ2, region, mesh,
                                   DriftField::constant_drift(Complex(0, 0)));
  for (int v = 0; v < dom.n_vertices(); ++v) {
    for (int k = 0; k < 4; ++k) {
      if (1.0 + c[k] * mesh <= 0.0) fail(Errc::WeightUnderflow, "step weight <= 0");
      dom.coeff[v][k] = c[k];
    }
  }
  return dom;
}

Symmetry Symmetry::rotation_angle(LatticeKind kind, double angle) {
  const double unit = kind == LatticeKind::SquareZ2 ? kPi / 2 : 2 * kPi / 3;
  double t = angle / unit;
  double rounded = std::round(t);
  if (std::abs(t - rounded) > 1e-9)
    fail(Errc::UnsupportedSymmetry, "rotation angle is not a lattice symmetry");
  int n = kind == LatticeKind::SquareZ2 ? 4 : 3;
  int turns = static_cast<int>(rounded) % n;
  if (turns < 0) turns += n;
  return rotation_turns(turns);
}

LatticeDomain lattice_symmetry_apply(const LatticeDomain& dom, const Symmetry& g) {
  const int n_dirs = dom.deg();
  int turns = g.turns % n_dirs;
  if (turns < 0) turns += n_dirs;

  auto rotate_axial = [&](std::array<int, 2> a) {
    for (int t = 0; t < turns; ++t) {
      if (dom.kind == LatticeKind::SquareZ2) {
        a = {-a[1], a[0]};
      } else {
        // tau * (a + b*tau) = -b + (a - b)*tau
        a = {-a[1], a[0] - a[1]};
      }
    }
    return std::array<int, 2>{a[0] + g.shift[0], a[1] + g.shift[1]};
  };

  std::vector<std::array<int, 2>> new_axial(dom.n_vertices());
  for (int v = 0; v < dom.n_vertices(); ++v) new_axial[v] = rotate_axial(dom.axial[v]);

  LatticeDomain out = build_from_candidates(dom.kind, dom.delta, new_axial);
  if (out.n_vertices() != dom.n_vertices())
    fail(Errc::UnsupportedSymmetry, "symmetry image is not connected");

  out.mass_mode = dom.mass_mode;
  out.coeff.assign(out.n_vertices(), {0, 0, 0, 0});
  if (dom.mass_mode) out.mass.assign(out.n_vertices(), 0.0);
  for (int v = 0; v < dom.n_vertices(); ++v) {
    VertexId w = out.find_vertex(new_axial[v]);
    if (dom.mass_mode) {
      out.mass[w] = dom.mass[v];
    } else {
      // Direction k of the image graph is the rotation of direction k - turns,
      // so new c_k = old c_{k+turns}: the recovered drift becomes conj(g)*Delta.
      for (int k = 0; k < n_dirs; ++k) out.coeff[w][k] = dom.coeff[v][(k + turns) % n_dirs];
    }
  }
  return out;
}

}  // namespace dimerlab
