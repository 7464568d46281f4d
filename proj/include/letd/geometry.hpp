// Problem data, uniform grids and overlapping decompositions with interface
// bookkeeping, in one and two space dimensions.
#pragma once

#include "letd/matfunc.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace letd {

template <std::size_t Dim>
using Point = std::array<double, Dim>;

template <std::size_t Dim>
using Index = std::array<int, Dim>;

/// Diffusion problem u_t = nu Laplace(u) + f on an axis-aligned box with
/// Dirichlet data. `boundary` is evaluated at boundary nodes only.
template <std::size_t Dim>
struct ProblemSpec {
  using Field = std::function<double(const Point<Dim>&, double)>;

  std::string name;
  double nu = 1.0;
  Point<Dim> origin{};
  Point<Dim> length{};
  double horizon = 1.0;
  Field source;
  Field boundary;
  std::function<double(const Point<Dim>&)> initial;
  Field exact;  // empty when no closed form is known

  bool has_exact() const { return static_cast<bool>(exact); }
};

template <std::size_t Dim>
void validate(const ProblemSpec<Dim>& p) {
  if (!(p.nu > 0.0)) throw std::invalid_argument("ProblemSpec: nu must be positive");
  if (!(p.horizon > 0.0)) throw std::invalid_argument("ProblemSpec: horizon must be positive");
  for (double l : p.length) {
    if (!(l > 0.0)) throw std::invalid_argument("ProblemSpec: domain lengths must be positive");
  }
  if (!p.source || !p.boundary || !p.initial) {
    throw std::invalid_argument("ProblemSpec: source, boundary and initial data are required");
  }
}

/// Largest mismatch between the exact solution and the boundary/initial data
/// over `samples` points per boundary component and time. Zero without exact.
template <std::size_t Dim>
double exact_data_mismatch(const ProblemSpec<Dim>& p, int samples = 17) {
  if (!p.has_exact()) return 0.0;
  double worst = 0.0;
  for (int it = 0; it < samples; ++it) {
    const double t = p.horizon * it / (samples - 1);
    for (std::size_t a = 0; a < Dim; ++a) {
      for (int side = 0; side < 2; ++side) {
        for (int k = 0; k < samples; ++k) {
          Point<Dim> x = p.origin;
          for (std::size_t b = 0; b < Dim; ++b) {
            x[b] = p.origin[b] + p.length[b] * (k + 0.5) / samples;
          }
          x[a] = p.origin[a] + side * p.length[a];
          worst = std::max(worst, std::abs(p.boundary(x, t) - p.exact(x, t)));
        }
      }
    }
  }
  for (int k = 0; k < samples; ++k) {
    Point<Dim> x;
    for (std::size_t b = 0; b < Dim; ++b) x[b] = p.origin[b] + p.length[b] * k / (samples - 1);
    worst = std::max(worst, std::abs(p.initial(x) - p.exact(x, 0.0)));
  }
  return worst;
}

/// One-dimensional problem on [a, a + L] with boundary functions psi1 (left)
/// and psi2 (right).
inline ProblemSpec<1> make_problem_1d(std::string name, double nu, double a, double length,
                                      double horizon, std::function<double(double, double)> f,
                                      std::function<double(double)> psi1,
                                      std::function<double(double)> psi2,
                                      std::function<double(double)> u0,
                                      std::function<double(double, double)> exact = {}) {
  ProblemSpec<1> p;
  p.name = std::move(name);
  p.nu = nu;
  p.origin = {a};
  p.length = {length};
  p.horizon = horizon;
  p.source = [f](const Point<1>& x, double t) { return f(x[0], t); };
  const double mid = a + 0.5 * length;
  p.boundary = [psi1, psi2, mid](const Point<1>& x, double t) {
    return x[0] < mid ? psi1(t) : psi2(t);
  };
  p.initial = [u0](const Point<1>& x) { return u0(x[0]); };
  if (exact) p.exact = [exact](const Point<1>& x, double t) { return exact(x[0], t); };
  validate(p);
  return p;
}

// ---------------------------------------------------------------------------
// Grids
// ---------------------------------------------------------------------------

/// Uniform vertex grid: node j sits at origin + j h, j = 0..n+1, with nodes
/// 0 and n+1 on the boundary and h = L/(n+1).
template <std::size_t Dim>
struct Grid {
  Point<Dim> origin{};
  Point<Dim> length{};
  Index<Dim> n{};
  Point<Dim> h{};

  Point<Dim> node(const Index<Dim>& g) const {
    Point<Dim> x;
    for (std::size_t a = 0; a < Dim; ++a) x[a] = origin[a] + g[a] * h[a];
    return x;
  }

  std::size_t interior_size() const {
    std::size_t s = 1;
    for (int k : n) s *= static_cast<std::size_t>(k);
    return s;
  }
};

using Grid1D = Grid<1>;
using Grid2D = Grid<2>;

template <std::size_t Dim>
Grid<Dim> make_grid(const Point<Dim>& origin, const Point<Dim>& length, const Index<Dim>& n) {
  Grid<Dim> g;
  g.origin = origin;
  g.length = length;
  g.n = n;
  for (std::size_t a = 0; a < Dim; ++a) {
    if (n[a] < 3) {
      throw std::invalid_argument("make_grid: need at least 3 interior points per axis, got " +
                                  std::to_string(n[a]));
    }
    if (!(length[a] > 0.0)) throw std::invalid_argument("make_grid: length must be positive");
    g.h[a] = length[a] / (n[a] + 1);
  }
  return g;
}

inline Grid1D make_grid_1d(double length, int n, double origin = 0.0) {
  return make_grid<1>({origin}, {length}, {n});
}

template <std::size_t Dim>
Grid<Dim> make_grid(const ProblemSpec<Dim>& p, const Index<Dim>& n) {
  return make_grid<Dim>(p.origin, p.length, n);
}

// ---------------------------------------------------------------------------
// Index boxes
// ---------------------------------------------------------------------------

/// Inclusive range of global interior node indices (1-based per axis).
template <std::size_t Dim>
struct Box {
  Index<Dim> lo{};
  Index<Dim> hi{};

  int extent(std::size_t a) const { return hi[a] - lo[a] + 1; }

  Index<Dim> shape() const {
    Index<Dim> s;
    for (std::size_t a = 0; a < Dim; ++a) s[a] = extent(a);
    return s;
  }

  std::size_t size() const {
    std::size_t s = 1;
    for (std::size_t a = 0; a < Dim; ++a) s *= static_cast<std::size_t>(extent(a));
    return s;
  }

  bool contains(const Index<Dim>& g) const {
    for (std::size_t a = 0; a < Dim; ++a) {
      if (g[a] < lo[a] || g[a] > hi[a]) return false;
    }
    return true;
  }

  /// Row-major local index, last axis fastest.
  std::size_t local(const Index<Dim>& g) const {
    std::size_t idx = 0;
    for (std::size_t a = 0; a < Dim; ++a) {
      idx = idx * static_cast<std::size_t>(extent(a)) + static_cast<std::size_t>(g[a] - lo[a]);
    }
    return idx;
  }

  Index<Dim> global(std::size_t idx) const {
    Index<Dim> g;
    for (std::size_t a = Dim; a-- > 0;) {
      const auto e = static_cast<std::size_t>(extent(a));
      g[a] = lo[a] + static_cast<int>(idx % e);
      idx /= e;
    }
    return g;
  }
};

/// One face of a subdomain that borders a neighbor. `local_nodes[k]` is the
/// node of this subdomain adjacent to the face, `neighbor_nodes[k]` the
/// neighbor's local index of the boundary node it reads.
struct InterfaceFace {
  std::size_t axis = 0;
  int side = 0;  // 0 = low, 1 = high
  std::size_t neighbor = 0;
  std::size_t offset = 0;  // position within the subdomain's trace vector
  std::vector<std::size_t> local_nodes;
  std::vector<std::size_t> neighbor_nodes;
};

template <std::size_t Dim>
struct Subdomain {
  Box<Dim> box;
  Index<Dim> position{};  // coordinates in the subdomain grid
  std::vector<InterfaceFace> interfaces;
  std::size_t trace_size = 0;
};

/// Interface node positions along one axis: subdomain i spans interior nodes
/// left[i]+1 .. right[i]-1; left/right are the nodes where it takes
/// Dirichlet values (0 and n+1 are physical boundary).
struct AxisSplit {
  std::vector<int> left;
  std::vector<int> right;
};

enum class OverlapConvention {
  half,  // each subdomain grows by `cells` past every interior break: strip 2*cells wide
  full,  // shared strip is `cells` wide in total
};

inline std::string to_string(OverlapConvention c) {
  return c == OverlapConvention::half ? "half" : "full";
}

namespace detail {

inline AxisSplit split_axis(int n, int parts, int grow_left, int grow_right,
                            const std::string& axis_name) {
  if (parts < 1) throw std::invalid_argument("decompose: subdomain count must be positive");
  if (2 * parts > n + 1) {
    throw std::invalid_argument("decompose: too many subdomains along " + axis_name);
  }
  std::vector<int> breaks(parts + 1);
  for (int i = 0; i <= parts; ++i) {
    breaks[i] = static_cast<int>(std::lround(static_cast<double>(i) * (n + 1) / parts));
  }
  AxisSplit split;
  split.left.resize(parts);
  split.right.resize(parts);
  for (int i = 0; i < parts; ++i) {
    split.left[i] = i == 0 ? 0 : breaks[i] - grow_left;
    split.right[i] = i == parts - 1 ? n + 1 : breaks[i + 1] + grow_right;
  }
  for (int i = 0; i + 1 < parts; ++i) {
    const std::string where = axis_name + " interface " + std::to_string(i) + " (between subdomains " +
                              std::to_string(i) + " and " + std::to_string(i + 1) + ")";
    // Nodes strictly between left[i+1] and right[i] are shared.
    if (split.right[i] - split.left[i + 1] < 2) {
      throw std::invalid_argument("decompose: infeasible overlap at " + where +
                                  ": beta <= alpha, no shared grid point");
    }
    if (split.left[i + 1] <= split.left[i] + (i == 0 ? 1 : 0)) {
      throw std::invalid_argument("decompose: infeasible overlap at " + where +
                                  ": interface leaves the left subdomain");
    }
    if (split.right[i] >= split.right[i + 1] - (i + 1 == parts - 1 ? 1 : 0)) {
      throw std::invalid_argument("decompose: infeasible overlap at " + where +
                                  ": interface leaves the right subdomain");
    }
  }
  for (int i = 1; i + 1 < parts; ++i) {
    if (split.right[i - 1] > split.left[i + 1]) {
      throw std::invalid_argument("decompose: overlaps swallow subdomain " + std::to_string(i) +
                                  " along " + axis_name);
    }
  }
  return split;
}

}  // namespace detail

/// Overlapping decomposition of a grid into a tensor arrangement of boxes.
template <std::size_t Dim>
struct Layout {
  Grid<Dim> grid;
  Index<Dim> parts{};
  std::array<AxisSplit, Dim> splits;
  std::vector<Subdomain<Dim>> subdomains;

  std::size_t count() const { return subdomains.size(); }

  std::size_t trace_size() const {
    std::size_t s = 0;
    for (const auto& sd : subdomains) s += sd.trace_size;
    return s;
  }

  std::size_t id(const Index<Dim>& pos) const {
    std::size_t idx = 0;
    for (std::size_t a = 0; a < Dim; ++a) {
      idx = idx * static_cast<std::size_t>(parts[a]) + static_cast<std::size_t>(pos[a]);
    }
    return idx;
  }
};

using DecompositionLayout1D = Layout<1>;
using DecompositionLayout2D = Layout<2>;

/// Builds the layout from per-axis splits: every interior face reads the
/// boundary row/column from the adjacent subdomain along that axis.
template <std::size_t Dim>
Layout<Dim> build_layout(const Grid<Dim>& grid, const Index<Dim>& parts,
                         const std::array<AxisSplit, Dim>& splits) {
  Layout<Dim> layout;
  layout.grid = grid;
  layout.parts = parts;
  layout.splits = splits;

  std::size_t total = 1;
  for (int p : parts) total *= static_cast<std::size_t>(p);
  layout.subdomains.resize(total);

  for (std::size_t s = 0; s < total; ++s) {
    Index<Dim> pos;
    std::size_t rem = s;
    for (std::size_t a = Dim; a-- > 0;) {
      pos[a] = static_cast<int>(rem % static_cast<std::size_t>(parts[a]));
      rem /= static_cast<std::size_t>(parts[a]);
    }
    Subdomain<Dim>& sd = layout.subdomains[s];
    sd.position = pos;
    for (std::size_t a = 0; a < Dim; ++a) {
      sd.box.lo[a] = splits[a].left[pos[a]] + 1;
      sd.box.hi[a] = splits[a].right[pos[a]] - 1;
    }
  }

  for (std::size_t s = 0; s < total; ++s) {
    Subdomain<Dim>& sd = layout.subdomains[s];
    std::size_t offset = 0;
    for (std::size_t a = 0; a < Dim; ++a) {
      for (int side = 0; side < 2; ++side) {
        const int plane = side == 0 ? sd.box.lo[a] - 1 : sd.box.hi[a] + 1;
        if (plane == 0 || plane == grid.n[a] + 1) continue;
        Index<Dim> npos = sd.position;
        npos[a] += side == 0 ? -1 : 1;
        InterfaceFace face;
        face.axis = a;
        face.side = side;
        face.neighbor = layout.id(npos);
        face.offset = offset;
        const Box<Dim>& nbox = layout.subdomains[face.neighbor].box;
        for (std::size_t idx = 0; idx < sd.box.size(); ++idx) {
          Index<Dim> g = sd.box.global(idx);
          const int adjacent = side == 0 ? sd.box.lo[a] : sd.box.hi[a];
          if (g[a] != adjacent) continue;
          Index<Dim> bnode = g;
          bnode[a] = plane;
          if (!nbox.contains(bnode)) {
            throw std::logic_error("build_layout: neighbor does not own an interface node");
          }
          face.local_nodes.push_back(idx);
          face.neighbor_nodes.push_back(nbox.local(bnode));
        }
        offset += face.local_nodes.size();
        sd.interfaces.push_back(std::move(face));
      }
    }
    sd.trace_size = offset;
  }
  return layout;
}

/// Single-box layout (monodomain).
template <std::size_t Dim>
Layout<Dim> monodomain_layout(const Grid<Dim>& grid) {
  std::array<AxisSplit, Dim> splits;
  Index<Dim> parts;
  for (std::size_t a = 0; a < Dim; ++a) {
    parts[a] = 1;
    splits[a].left = {0};
    splits[a].right = {grid.n[a] + 1};
  }
  return build_layout(grid, parts, splits);
}

/// P uniform non-overlapping pieces, each interior break widened by
/// `delta_cells` cells on both sides (overlap 2 delta).
inline DecompositionLayout1D decompose_1d(const Grid1D& grid, int p, int delta_cells) {
  if (p < 1) throw std::invalid_argument("decompose_1d: subdomain count must be positive");
  if (p == 1) return monodomain_layout(grid);
  if (delta_cells < 0) throw std::invalid_argument("decompose_1d: overlap cells must be non-negative");
  return build_layout<1>(grid, {p},
                         {detail::split_axis(grid.n[0], p, delta_cells, delta_cells, "x")});
}

/// px-by-py rectangles; see OverlapConvention for the meaning of
/// `overlap_cells`.
inline DecompositionLayout2D decompose_2d(const Grid2D& grid, int px, int py, int overlap_cells,
                                          OverlapConvention convention = OverlapConvention::full) {
  if (overlap_cells < 0) throw std::invalid_argument("decompose_2d: overlap cells must be non-negative");
  int grow_left = overlap_cells;
  int grow_right = overlap_cells;
  if (convention == OverlapConvention::full) {
    grow_left = overlap_cells / 2;
    grow_right = overlap_cells - grow_left;
  }
  std::array<AxisSplit, 2> splits;
  const std::array<int, 2> parts = {px, py};
  const std::array<std::string, 2> names = {"x", "y"};
  for (std::size_t a = 0; a < 2; ++a) {
    if (parts[a] == 1) {
      splits[a].left = {0};
      splits[a].right = {grid.n[a] + 1};
    } else {
      splits[a] = detail::split_axis(grid.n[a], parts[a], grow_left, grow_right, names[a]);
    }
  }
  return build_layout<2>(grid, {px, py}, splits);
}

/// Two-subdomain bookkeeping: subdomain 1 covers 1..N_beta-1, subdomain 2
/// covers N_alpha+1..N, with alpha L = N_alpha h and beta L = N_beta h.
struct TwoSubdomainIndices {
  int n = 0;
  int n_alpha = 0;
  int n_beta = 0;
  int n1 = 0;
  int n2 = 0;
  int n_beta_alpha = 0;
  double alpha = 0.0;
  double beta = 0.0;
};

inline TwoSubdomainIndices two_subdomain_indices(const DecompositionLayout1D& layout) {
  if (layout.count() != 2) throw std::invalid_argument("two_subdomain_indices: layout must have 2 subdomains");
  TwoSubdomainIndices t;
  t.n = layout.grid.n[0];
  t.n_alpha = layout.splits[0].left[1];
  t.n_beta = layout.splits[0].right[0];
  t.n1 = t.n_beta - 1;
  t.n2 = t.n - t.n_alpha;
  t.n_beta_alpha = t.n_beta - t.n_alpha;
  t.alpha = static_cast<double>(t.n_alpha) / (t.n + 1);
  t.beta = static_cast<double>(t.n_beta) / (t.n + 1);
  return t;
}

/// (alpha, beta) for every interior interface of a 1D layout, as fractions of L.
inline std::vector<std::pair<double, double>> interface_fractions(const DecompositionLayout1D& layout) {
  std::vector<std::pair<double, double>> out;
  const auto& sp = layout.splits[0];
  const double np1 = layout.grid.n[0] + 1;
  for (std::size_t i = 0; i + 1 < sp.left.size(); ++i) {
    out.emplace_back(sp.left[i + 1] / np1, sp.right[i] / np1);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Forcing assembly
// ---------------------------------------------------------------------------

/// F on grid nodes lo..hi: f(x_j, t), plus (nu/h^2) left on the first entry
/// and (nu/h^2) right on the last.
inline Vector assemble_forcing(const ProblemSpec<1>& problem, const Grid1D& grid, int lo, int hi,
                               double t, double left, double right) {
  if (lo < 1 || hi > grid.n[0] || lo > hi) {
    throw std::out_of_range("assemble_forcing: segment outside the grid");
  }
  const double c = problem.nu / (grid.h[0] * grid.h[0]);
  Vector f(static_cast<std::size_t>(hi - lo + 1));
  for (int j = lo; j <= hi; ++j) f[j - lo] = problem.source(grid.node({j}), t);
  f.front() += c * left;
  f.back() += c * right;
  return f;
}

/// Trace-independent part of the forcing of subdomain `s` at time t: source
/// on every node plus physical Dirichlet data on outer faces.
template <std::size_t Dim>
Vector static_forcing(const ProblemSpec<Dim>& problem, const Layout<Dim>& layout, std::size_t s, double t) {
  const Subdomain<Dim>& sd = layout.subdomains.at(s);
  const Grid<Dim>& grid = layout.grid;
  Vector f(sd.box.size());
  for (std::size_t idx = 0; idx < f.size(); ++idx) {
    f[idx] = problem.source(grid.node(sd.box.global(idx)), t);
  }
  for (std::size_t a = 0; a < Dim; ++a) {
    const double c = problem.nu / (grid.h[a] * grid.h[a]);
    for (int side = 0; side < 2; ++side) {
      const int plane = side == 0 ? sd.box.lo[a] - 1 : sd.box.hi[a] + 1;
      if (plane != 0 && plane != grid.n[a] + 1) continue;
      const int adjacent = side == 0 ? sd.box.lo[a] : sd.box.hi[a];
      for (std::size_t idx = 0; idx < f.size(); ++idx) {
        Index<Dim> g = sd.box.global(idx);
        if (g[a] != adjacent) continue;
        g[a] = plane;
        f[idx] += c * problem.boundary(grid.node(g), t);
      }
    }
  }
  return f;
}

/// Adds (nu/h^2) times the neighbor trace on every interior face of `s`.
template <std::size_t Dim>
void add_interface_forcing(const Layout<Dim>& layout, std::size_t s, double nu, std::span<const double> trace,
                           std::span<double> f) {
  const Subdomain<Dim>& sd = layout.subdomains.at(s);
  if (trace.size() != sd.trace_size) {
    throw std::invalid_argument("subdomain forcing: expected " + std::to_string(sd.trace_size) +
                                " trace values, got " + std::to_string(trace.size()));
  }
  for (const InterfaceFace& face : sd.interfaces) {
    const double c = nu / (layout.grid.h[face.axis] * layout.grid.h[face.axis]);
    for (std::size_t k = 0; k < face.local_nodes.size(); ++k) {
      f[face.local_nodes[k]] += c * trace[face.offset + k];
    }
  }
}

/// Forcing of subdomain `s` at time t, with `trace` (ordered as the
/// subdomain's interface faces) on interior faces.
template <std::size_t Dim>
Vector subdomain_forcing(const ProblemSpec<Dim>& problem, const Layout<Dim>& layout, std::size_t s,
                         double t, std::span<const double> trace) {
  Vector f = static_forcing(problem, layout, s, t);
  add_interface_forcing(layout, s, problem.nu, trace, f);
  return f;
}

/// Values subdomain `s` reads from its neighbors' states.
template <std::size_t Dim>
Vector gather_trace(const Layout<Dim>& layout, std::size_t s, std::span<const Vector> states) {
  const Subdomain<Dim>& sd = layout.subdomains.at(s);
  Vector trace(sd.trace_size);
  for (const InterfaceFace& face : sd.interfaces) {
    const Vector& nb = states[face.neighbor];
    for (std::size_t k = 0; k < face.neighbor_nodes.size(); ++k) {
      trace[face.offset + k] = nb[face.neighbor_nodes[k]];
    }
  }
  return trace;
}

/// Samples g at every node of subdomain `s`.
template <std::size_t Dim, class Fn>
Vector sample_subdomain(const Layout<Dim>& layout, std::size_t s, Fn&& g) {
  const Subdomain<Dim>& sd = layout.subdomains.at(s);
  Vector v(sd.box.size());
  for (std::size_t idx = 0; idx < v.size(); ++idx) v[idx] = g(layout.grid.node(sd.box.global(idx)));
  return v;
}

}  // namespace letd
