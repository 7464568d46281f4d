// Discrete max norms, errors against exact solutions, contraction-rate and
// temporal-order estimates.
#pragma once

#include "letd/geometry.hpp"
#include "letd/steppers.hpp"

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace letd {

struct ErrorReport {
  std::vector<double> linf_space;  // per time level
  double linf_spacetime = 0.0;
};

/// Max-abs differences between a field history and a reference, level by
/// level. Both are indexed [level][node].
inline ErrorReport linf_norms(std::span<const Vector> history, std::span<const Vector> reference) {
  if (history.size() != reference.size()) {
    throw std::invalid_argument("linf_norms: history has " + std::to_string(history.size()) +
                                " levels, reference has " + std::to_string(reference.size()));
  }
  ErrorReport r;
  for (std::size_t m = 0; m < history.size(); ++m) {
    if (history[m].size() != reference[m].size()) {
      throw std::invalid_argument("linf_norms: shape mismatch at level " + std::to_string(m));
    }
    double worst = 0.0;
    for (std::size_t j = 0; j < history[m].size(); ++j) {
      const double a = history[m][j];
      const double b = reference[m][j];
      if (std::isnan(a) || std::isnan(b)) {
        throw std::domain_error("linf_norms: NaN at level " + std::to_string(m) + ", node " + std::to_string(j));
      }
      worst = std::max(worst, std::abs(a - b));
    }
    r.linf_space.push_back(worst);
    r.linf_spacetime = std::max(r.linf_spacetime, worst);
  }
  return r;
}

/// Geometric mean of e[k+2]/e[k] over iterates 3..K-1 (1-based) of a decay
/// curve of K entries: the contraction per two iterations.
inline double estimate_contraction(std::span<const double> curve) {
  if (curve.size() < 6) {
    throw std::invalid_argument("estimate_contraction: need at least 6 entries, got " +
                                std::to_string(curve.size()));
  }
  for (double e : curve) {
    if (!(e > 0.0) || !std::isfinite(e)) {
      throw std::invalid_argument("estimate_contraction: entries must be positive and finite");
    }
  }
  const std::size_t k_last = curve.size();
  double sum = 0.0;
  int count = 0;
  for (std::size_t k = 3; k + 2 <= k_last - 1; ++k) {
    sum += std::log(curve[k + 1] / curve[k - 1]);
    ++count;
  }
  return std::exp(sum / count);
}

/// Per-iteration factor: square root of the two-step contraction.
inline double per_iteration_rate(std::span<const double> curve) {
  return std::sqrt(estimate_contraction(curve));
}

/// log(e_{i-1}/e_i) / log(dt_{i-1}/dt_i) for successive refinements.
inline std::vector<double> observed_order(std::span<const double> errors, std::span<const double> dts) {
  if (errors.size() != dts.size()) throw std::invalid_argument("observed_order: length mismatch");
  if (errors.size() < 2) throw std::invalid_argument("observed_order: need at least two levels");
  std::vector<double> rates;
  for (std::size_t i = 1; i < errors.size(); ++i) {
    if (!(dts[i] < dts[i - 1]) || !(dts[i] > 0.0)) {
      throw std::invalid_argument("observed_order: dts must be positive and strictly decreasing");
    }
    if (!(errors[i] > 0.0) || !(errors[i - 1] > 0.0)) {
      throw std::invalid_argument("observed_order: errors must be positive");
    }
    rates.push_back(std::log(errors[i - 1] / errors[i]) / std::log(dts[i - 1] / dts[i]));
  }
  return rates;
}

/// Exact solution sampled on subdomain s at level m.
template <std::size_t Dim>
Vector exact_on_subdomain(const LocalizedSystem<Dim>& sys, std::size_t s, int m) {
  const ProblemSpec<Dim>& p = sys.problem();
  if (!p.has_exact()) throw std::invalid_argument("problem '" + p.name + "' has no exact solution");
  const double t = sys.time().t(m);
  return sample_subdomain(sys.layout(), s, [&](const Point<Dim>& x) { return p.exact(x, t); });
}

/// Space-time max error over every subdomain node and levels 1..M, divided by
/// the space-time max of the exact solution over the grid at those levels.
template <std::size_t Dim>
double relative_spacetime_error(const LocalizedSystem<Dim>& sys, const Trajectory& traj) {
  const int steps = sys.time().steps;
  if (traj.size() != static_cast<std::size_t>(steps) + 1) {
    throw std::invalid_argument("relative_spacetime_error: trajectory length mismatch");
  }
  const Grid<Dim>& grid = sys.layout().grid;
  const Box<Dim> all = [&] {
    Box<Dim> b;
    for (std::size_t a = 0; a < Dim; ++a) {
      b.lo[a] = 1;
      b.hi[a] = grid.n[a];
    }
    return b;
  }();
  double num = 0.0;
  double den = 0.0;
  for (int m = 1; m <= steps; ++m) {
    const double t = sys.time().t(m);
    for (std::size_t idx = 0; idx < all.size(); ++idx) {
      den = std::max(den, std::abs(sys.problem().exact(grid.node(all.global(idx)), t)));
    }
    for (std::size_t s = 0; s < sys.count(); ++s) {
      const Vector ex = exact_on_subdomain(sys, s, m);
      num = std::max(num, linf_norms(std::span(&traj[m][s], 1), std::span(&ex, 1)).linf_spacetime);
    }
  }
  if (!(den > 0.0)) throw std::domain_error("relative_spacetime_error: exact solution vanishes");
  return num / den;
}

/// Max error over every subdomain node at the final level.
template <std::size_t Dim>
double final_time_error(const LocalizedSystem<Dim>& sys, const Trajectory& traj) {
  const int steps = sys.time().steps;
  if (traj.size() != static_cast<std::size_t>(steps) + 1) {
    throw std::invalid_argument("final_time_error: trajectory length mismatch");
  }
  double worst = 0.0;
  for (std::size_t s = 0; s < sys.count(); ++s) {
    const Vector ex = exact_on_subdomain(sys, s, steps);
    worst = std::max(worst, linf_norms(std::span(&traj[steps][s], 1), std::span(&ex, 1)).linf_spacetime);
  }
  return worst;
}

/// Space-time max difference between two trajectories on the same layout.
inline double trajectory_distance(const Trajectory& a, const Trajectory& b) {
  if (a.size() != b.size()) throw std::invalid_argument("trajectory_distance: level count mismatch");
  double worst = 0.0;
  for (std::size_t m = 0; m < a.size(); ++m) {
    worst = std::max(worst, linf_norms(a[m], b[m]).linf_spacetime);
  }
  return worst;
}

}  // namespace letd
