// ETD1/ETD2 steps on a box with Dirichlet data, the monodomain reference
// solve, and the exactly coupled multidomain step.
#pragma once

#include "letd/geometry.hpp"
#include "letd/matfunc.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace letd {

enum class Scheme { etd1, etd2 };

inline std::string to_string(Scheme s) { return s == Scheme::etd1 ? "etd1" : "etd2"; }

inline Scheme parse_scheme(const std::string& s) {
  if (s == "etd1" || s == "ETD1") return Scheme::etd1;
  if (s == "etd2" || s == "ETD2") return Scheme::etd2;
  throw std::invalid_argument("unknown scheme '" + s + "' (expected etd1 or etd2)");
}

struct TimeGrid {
  double horizon = 1.0;
  int steps = 1;

  double dt() const { return horizon / steps; }
  double t(int m) const { return horizon * m / steps; }
};

inline TimeGrid make_time_grid(double horizon, int steps) {
  if (!(horizon > 0.0)) throw std::invalid_argument("TimeGrid: horizon must be positive");
  if (steps < 1) throw std::invalid_argument("TimeGrid: need at least one step");
  return {horizon, steps};
}

/// Grid with step dt; T/dt must be an integer up to rounding.
inline TimeGrid time_grid_from_dt(double horizon, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("TimeGrid: dt must be positive");
  const double ratio = horizon / dt;
  const long steps = std::lround(ratio);
  if (steps < 1 || std::abs(ratio - static_cast<double>(steps)) > 1e-9 * std::max(1.0, ratio)) {
    throw std::invalid_argument("TimeGrid: T/dt is not an integer");
  }
  return make_time_grid(horizon, static_cast<int>(steps));
}

/// Per-mode multipliers of e^{dt A}, dt phi1(dt A) and dt phi2(dt A) for one
/// box operator and one step size.
template <std::size_t Dim>
class StepWorkspace {
 public:
  StepWorkspace(std::shared_ptr<const SpectralFactorization<Dim>> fact, double dt)
      : fact_(std::move(fact)), dt_(dt) {
    if (!fact_) throw std::invalid_argument("StepWorkspace: null factorization");
    if (!(dt > 0.0)) throw std::invalid_argument("StepWorkspace: dt must be positive");
    const Vector& lam = fact_->eigenvalues();
    exp_.resize(lam.size());
    phi1_.resize(lam.size());
    phi2_.resize(lam.size());
    for (std::size_t i = 0; i < lam.size(); ++i) {
      const double z = dt * lam[i];
      exp_[i] = std::exp(z);
      phi1_[i] = dt * phi_scalar(1, z);
      phi2_[i] = dt * phi_scalar(2, z);
    }
  }

  std::size_t size() const { return exp_.size(); }
  double dt() const { return dt_; }
  const SpectralFactorization<Dim>& factorization() const { return *fact_; }

  /// e^{dt A} u + dt phi1(dt A) f.
  Vector etd1(std::span<const double> u, std::span<const double> f) const {
    check(u, "state");
    check(f, "forcing");
    const auto& S = fact_->transform();
    Vector a = S.apply(u);
    Vector b = S.apply(f);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = exp_[i] * a[i] + phi1_[i] * b[i];
    return S.apply(a);
  }

  /// e^{dt A} u + dt phi1(dt A) f_now + dt phi2(dt A)(f_next - f_now).
  Vector etd2(std::span<const double> u, std::span<const double> f_now,
              std::span<const double> f_next) const {
    check(u, "state");
    check(f_now, "forcing");
    check(f_next, "forcing");
    const auto& S = fact_->transform();
    Vector diff(f_next.begin(), f_next.end());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= f_now[i];
    Vector a = S.apply(u);
    Vector b = S.apply(f_now);
    Vector c = S.apply(diff);
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = exp_[i] * a[i] + phi1_[i] * b[i] + phi2_[i] * c[i];
    }
    return S.apply(a);
  }

 private:
  void check(std::span<const double> v, const char* what) const {
    if (v.size() != size()) {
      throw std::invalid_argument(std::string("StepWorkspace: ") + what + " has " +
                                  std::to_string(v.size()) + " entries, expected " +
                                  std::to_string(size()));
    }
  }

  std::shared_ptr<const SpectralFactorization<Dim>> fact_;
  double dt_;
  Vector exp_;
  Vector phi1_;
  Vector phi2_;
};

inline Vector etd1_step(const StepWorkspace<1>& ws, std::span<const double> u,
                        std::span<const double> f_next) {
  return ws.etd1(u, f_next);
}

inline Vector etd2_step(const StepWorkspace<1>& ws, std::span<const double> u,
                        std::span<const double> f_now, std::span<const double> f_next) {
  return ws.etd2(u, f_now, f_next);
}

/// A problem on a decomposition with a fixed time grid: the shared context
/// for the localized steps and both Schwarz methods.
template <std::size_t Dim>
class LocalizedSystem {
 public:
  LocalizedSystem(ProblemSpec<Dim> problem, Layout<Dim> layout, TimeGrid time)
      : problem_(std::move(problem)), layout_(std::move(layout)), time_(time) {
    validate(problem_);
    std::map<Index<Dim>, std::shared_ptr<const StepWorkspace<Dim>>> by_shape;
    for (const auto& sd : layout_.subdomains) {
      const Index<Dim> shape = sd.box.shape();
      auto it = by_shape.find(shape);
      if (it == by_shape.end()) {
        KroneckerLaplacian<Dim> op;
        for (std::size_t a = 0; a < Dim; ++a) {
          op.axes[a] = build_laplacian_1d(shape[a], problem_.nu, layout_.grid.h[a]);
        }
        auto fact = std::make_shared<const SpectralFactorization<Dim>>(op);
        it = by_shape.emplace(shape, std::make_shared<const StepWorkspace<Dim>>(fact, time_.dt())).first;
      }
      workspaces_.push_back(it->second);
    }
    static_.resize(static_cast<std::size_t>(time_.steps) + 1);
    for (int m = 0; m <= time_.steps; ++m) {
      for (std::size_t s = 0; s < layout_.count(); ++s) {
        static_[m].push_back(static_forcing(problem_, layout_, s, time_.t(m)));
      }
    }
  }

  const ProblemSpec<Dim>& problem() const { return problem_; }
  const Layout<Dim>& layout() const { return layout_; }
  const TimeGrid& time() const { return time_; }
  std::size_t count() const { return layout_.count(); }
  const StepWorkspace<Dim>& workspace(std::size_t s) const { return *workspaces_.at(s); }

  std::vector<Vector> initial_states() const {
    std::vector<Vector> out;
    for (std::size_t s = 0; s < count(); ++s) {
      out.push_back(sample_subdomain(layout_, s, [this](const Point<Dim>& x) { return problem_.initial(x); }));
    }
    return out;
  }

  std::vector<Vector> gather(std::span<const Vector> states) const {
    std::vector<Vector> out;
    for (std::size_t s = 0; s < count(); ++s) out.push_back(gather_trace(layout_, s, states));
    return out;
  }

  Vector forcing(std::size_t s, int m, std::span<const double> trace) const {
    Vector f = static_.at(static_cast<std::size_t>(m)).at(s);
    add_interface_forcing(layout_, s, problem_.nu, trace, f);
    return f;
  }

  /// One step t_m -> t_{m+1} on subdomain s. ETD2 needs the traces at both
  /// levels; ETD1 ignores `trace_now`.
  Vector local_step(std::size_t s, Scheme scheme, int m, std::span<const double> u,
                    std::span<const double> trace_now, std::span<const double> trace_next) const {
    if (m < 0 || m >= time_.steps) throw std::out_of_range("local_step: time level out of range");
    const StepWorkspace<Dim>& ws = workspace(s);
    const Vector f_next = forcing(s, m + 1, trace_next);
    if (scheme == Scheme::etd1) return ws.etd1(u, f_next);
    if (trace_now.size() != layout_.subdomains[s].trace_size) {
      throw std::invalid_argument("local_step: missing trace values at t_m for ETD2 on subdomain " +
                                  std::to_string(s));
    }
    return ws.etd2(u, forcing(s, m, trace_now), f_next);
  }

  /// ETD1-type predictor with the frozen forcing F(t_m).
  Vector predictor(std::size_t s, int m, std::span<const double> u,
                   std::span<const double> trace_now) const {
    return workspace(s).etd1(u, forcing(s, m, trace_now));
  }

 private:
  ProblemSpec<Dim> problem_;
  Layout<Dim> layout_;
  TimeGrid time_;
  std::vector<std::shared_ptr<const StepWorkspace<Dim>>> workspaces_;
  std::vector<std::vector<Vector>> static_;  // [m][s]
};

/// States of every subdomain at every time level: [m][s].
using Trajectory = std::vector<std::vector<Vector>>;

/// Monodomain solve on a single-box system; returns levels 0..M.
template <std::size_t Dim>
Trajectory monodomain_solve(const LocalizedSystem<Dim>& sys, Scheme scheme) {
  if (sys.count() != 1) throw std::invalid_argument("monodomain_solve: system must have one subdomain");
  Trajectory traj;
  traj.push_back(sys.initial_states());
  const Vector none;
  for (int m = 0; m < sys.time().steps; ++m) {
    traj.push_back({sys.local_step(0, scheme, m, traj.back()[0], none, none)});
  }
  return traj;
}

template <std::size_t Dim>
Trajectory monodomain_solve(const ProblemSpec<Dim>& problem, const Index<Dim>& n, const TimeGrid& time,
                            Scheme scheme) {
  LocalizedSystem<Dim> sys(problem, monodomain_layout(make_grid(problem, n)), time);
  return monodomain_solve(sys, scheme);
}

/// Largest interface-system size accepted by `coupled_step_direct`.
inline constexpr std::size_t kMaxDirectTraceSize = 1024;

/// Exactly coupled step: the local steps are affine in the traces at
/// t_{m+1}, so the interface fixed point is found by probing the affine map
/// and solving (I - B) tau = c directly.
template <std::size_t Dim>
std::vector<Vector> coupled_step_direct(const LocalizedSystem<Dim>& sys, Scheme scheme, int m,
                                        std::span<const Vector> states) {
  const std::size_t p = sys.count();
  if (states.size() != p) throw std::invalid_argument("coupled_step_direct: wrong number of states");
  const std::vector<Vector> now = sys.gather(states);
  std::vector<std::size_t> offset(p + 1, 0);
  for (std::size_t s = 0; s < p; ++s) offset[s + 1] = offset[s] + sys.layout().subdomains[s].trace_size;
  const std::size_t q = offset[p];
  if (q > kMaxDirectTraceSize) {
    throw std::invalid_argument("coupled_step_direct: interface system too large (" + std::to_string(q) + ")");
  }

  auto split = [&](std::span<const double> tau) {
    std::vector<Vector> t(p);
    for (std::size_t s = 0; s < p; ++s) t[s].assign(tau.begin() + offset[s], tau.begin() + offset[s + 1]);
    return t;
  };
  auto advance = [&](std::span<const double> tau) {
    const std::vector<Vector> t = split(tau);
    std::vector<Vector> next(p);
    for (std::size_t s = 0; s < p; ++s) next[s] = sys.local_step(s, scheme, m, states[s], now[s], t[s]);
    return next;
  };
  auto map = [&](std::span<const double> tau) {
    const std::vector<Vector> g = sys.gather(advance(tau));
    Vector out;
    out.reserve(q);
    for (const Vector& v : g) out.insert(out.end(), v.begin(), v.end());
    return out;
  };

  const Vector zero(q, 0.0);
  const Vector c = map(zero);
  DenseMatrix system = DenseMatrix::identity(q);
  Vector probe(q, 0.0);
  for (std::size_t j = 0; j < q; ++j) {
    probe[j] = 1.0;
    const Vector col = map(probe);
    probe[j] = 0.0;
    for (std::size_t i = 0; i < q; ++i) system(i, j) -= col[i] - c[i];
  }
  const double norm = system.norm1();
  const LuFactorization lu(system);
  const double cond = norm * lu.inverse().norm1();
  if (!(cond < 1e12)) {
    throw std::domain_error("coupled_step_direct: interface system is ill-conditioned (cond1 = " +
                            std::to_string(cond) + ")");
  }
  return advance(lu.solve(c));
}

/// Full coupled trajectory, levels 0..M.
template <std::size_t Dim>
Trajectory coupled_solve_direct(const LocalizedSystem<Dim>& sys, Scheme scheme) {
  Trajectory traj;
  traj.push_back(sys.initial_states());
  for (int m = 0; m < sys.time().steps; ++m) traj.push_back(coupled_step_direct(sys, scheme, m, traj.back()));
  return traj;
}

}  // namespace letd
