// Schwarz drivers: per-step iteration (method 1) and waveform relaxation over
// the whole time grid or a sequence of windows (method 2).
#pragma once

#include "letd/geometry.hpp"
#include "letd/steppers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace letd {

/// Interface values, indexed [level][subdomain][trace entry]. Method 1 uses
/// a single level; method 2 stores levels 0..M with level 0 pinned to the
/// initial data by the solver.
struct TraceSet {
  std::vector<std::vector<Vector>> levels;

  std::size_t level_count() const { return levels.size(); }
};

enum class TraceShape { per_step, time_history };

template <std::size_t Dim>
TraceSet zero_trace_set(const Layout<Dim>& layout, std::size_t level_count) {
  TraceSet t;
  t.levels.assign(level_count, {});
  for (auto& lv : t.levels) {
    for (const auto& sd : layout.subdomains) lv.emplace_back(sd.trace_size, 0.0);
  }
  return t;
}

/// Uniform draws strictly inside (0, 1), reproducible across platforms.
template <std::size_t Dim>
TraceSet random_trace_guess(const Layout<Dim>& layout, TraceShape shape, std::uint64_t seed,
                            int steps = 0) {
  if (shape == TraceShape::time_history && steps < 1) {
    throw std::invalid_argument("random_trace_guess: time history needs at least one step");
  }
  const std::size_t levels = shape == TraceShape::per_step ? 1 : static_cast<std::size_t>(steps) + 1;
  TraceSet t = zero_trace_set(layout, levels);
  std::mt19937_64 rng(seed);
  for (auto& lv : t.levels) {
    for (Vector& v : lv) {
      for (double& x : v) x = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
    }
  }
  return t;
}

/// Traces of a trajectory at every level.
template <std::size_t Dim>
TraceSet traces_of(const LocalizedSystem<Dim>& sys, const Trajectory& traj) {
  TraceSet t;
  for (const auto& states : traj) t.levels.push_back(sys.gather(states));
  return t;
}

struct SolverConfig {
  Scheme scheme = Scheme::etd1;
  double tolerance = 1e-4;
  int max_iterations = 100;
  std::optional<int> fixed_iterations;
  std::optional<int> window_steps;

  void validate() const {
    if (!(tolerance > 0.0)) throw std::invalid_argument("SolverConfig: tolerance must be positive");
    if (max_iterations < 1) throw std::invalid_argument("SolverConfig: max_iterations must be positive");
    if (fixed_iterations && *fixed_iterations < 1) {
      throw std::invalid_argument("SolverConfig: fixed_iterations must be at least 1");
    }
    if (window_steps && *window_steps < 1) {
      throw std::invalid_argument("SolverConfig: window_steps must be positive");
    }
  }

  int budget() const { return fixed_iterations ? *fixed_iterations : max_iterations; }
};

/// Interface faces are numbered in subdomain order, then face order.
struct FaceId {
  std::size_t subdomain = 0;
  std::size_t face = 0;
};

template <std::size_t Dim>
std::vector<FaceId> interface_faces(const Layout<Dim>& layout) {
  std::vector<FaceId> out;
  for (std::size_t s = 0; s < layout.count(); ++s) {
    for (std::size_t f = 0; f < layout.subdomains[s].interfaces.size(); ++f) out.push_back({s, f});
  }
  return out;
}

/// Entry k-1 describes iterate k. Errors are filled only when a reference
/// is supplied; `normalized` divides by the first logged error.
struct IterationLog {
  std::vector<std::vector<double>> face_update;
  std::vector<double> update;
  std::vector<double> initial_face_error;
  double initial_error = 0.0;
  std::vector<std::vector<double>> face_error;
  std::vector<double> error;
  std::vector<double> normalized;
  bool converged = false;
  int iterations = 0;

  bool has_reference() const { return !initial_face_error.empty(); }

  void append(const IterationLog& other) {
    face_update.insert(face_update.end(), other.face_update.begin(), other.face_update.end());
    update.insert(update.end(), other.update.begin(), other.update.end());
    face_error.insert(face_error.end(), other.face_error.begin(), other.face_error.end());
    error.insert(error.end(), other.error.begin(), other.error.end());
    normalized.insert(normalized.end(), other.normalized.begin(), other.normalized.end());
    iterations += other.iterations;
    converged = converged && other.converged;
  }
};

/// Below this magnitude the stopping criterion uses the absolute update.
inline constexpr double kDenominatorFloor = 1e-14;

namespace detail {

/// Max |a - b| per interface face over the levels [first, last].
template <std::size_t Dim>
std::vector<double> face_max_diff(const Layout<Dim>& layout, const std::vector<std::vector<Vector>>& a,
                                  const std::vector<std::vector<Vector>>* b, std::size_t first,
                                  std::size_t last) {
  std::vector<double> out;
  for (std::size_t s = 0; s < layout.count(); ++s) {
    for (const InterfaceFace& face : layout.subdomains[s].interfaces) {
      double worst = 0.0;
      for (std::size_t m = first; m <= last; ++m) {
        for (std::size_t k = 0; k < face.local_nodes.size(); ++k) {
          const double x = a[m][s][face.offset + k];
          const double y = b ? (*b)[m][s][face.offset + k] : 0.0;
          worst = std::max(worst, std::abs(x - y));
        }
      }
      out.push_back(worst);
    }
  }
  return out;
}

inline double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

/// Records one iterate and returns true when every face meets the criterion.
inline bool record(IterationLog& log, std::vector<double> update, const std::vector<double>& denom,
                   std::optional<std::vector<double>> error, double tol) {
  bool ok = true;
  for (std::size_t i = 0; i < update.size(); ++i) {
    const double crit = denom[i] < kDenominatorFloor ? update[i] : update[i] / denom[i];
    if (!(crit < tol)) ok = false;
  }
  log.update.push_back(max_of(update));
  log.face_update.push_back(std::move(update));
  if (error) {
    const double e = max_of(*error);
    log.error.push_back(e);
    const double first = log.error.front();
    log.normalized.push_back(first > 0.0 ? e / first : (e == 0.0 ? 1.0 : e));
    log.face_error.push_back(std::move(*error));
  }
  ++log.iterations;
  return ok;
}

}  // namespace detail

struct Method1Step {
  std::vector<Vector> states;
  IterationLog log;
};

/// Default first guess at t_{m+1}: the ETD1-type predictor at the interface
/// for ETD2, the traces at t_m for ETD1.
template <std::size_t Dim>
std::vector<Vector> method1_default_guess(const LocalizedSystem<Dim>& sys, Scheme scheme, int m,
                                          std::span<const Vector> states) {
  std::vector<Vector> now = sys.gather(states);
  if (scheme == Scheme::etd1) return now;
  std::vector<Vector> pred(sys.count());
  for (std::size_t s = 0; s < sys.count(); ++s) pred[s] = sys.predictor(s, m, states[s], now[s]);
  return sys.gather(pred);
}

/// Schwarz iteration for the step t_m -> t_{m+1}. `guess` and `reference`
/// are single-level trace sets.
template <std::size_t Dim>
Method1Step method1_advance(const LocalizedSystem<Dim>& sys, int m, std::span<const Vector> states,
                            const SolverConfig& config, const TraceSet* guess = nullptr,
                            const TraceSet* reference = nullptr) {
  config.validate();
  const Layout<Dim>& layout = sys.layout();
  if (states.size() != sys.count()) throw std::invalid_argument("method1_advance: wrong number of states");
  if (guess && guess->level_count() != 1) throw std::invalid_argument("method1_advance: guess must have one level");
  if (reference && reference->level_count() != 1) {
    throw std::invalid_argument("method1_advance: reference must have one level");
  }

  const std::vector<Vector> now = sys.gather(states);
  std::vector<std::vector<Vector>> trace(1);
  trace[0] = guess ? guess->levels[0] : method1_default_guess(sys, config.scheme, m, states);
  const auto* ref = reference ? &reference->levels : nullptr;

  const std::vector<double> denom = detail::face_max_diff(layout, trace, nullptr, 0, 0);
  Method1Step out;
  if (ref) {
    out.log.initial_face_error = detail::face_max_diff(layout, trace, ref, 0, 0);
    out.log.initial_error = detail::max_of(out.log.initial_face_error);
  }
  for (int k = 0; k < config.budget(); ++k) {
    out.states.assign(sys.count(), {});
    for (std::size_t s = 0; s < sys.count(); ++s) {
      out.states[s] = sys.local_step(s, config.scheme, m, states[s], now[s], trace[0][s]);
    }
    std::vector<std::vector<Vector>> next(1, sys.gather(out.states));
    std::vector<double> update = detail::face_max_diff(layout, next, &trace, 0, 0);
    std::optional<std::vector<double>> err;
    if (ref) err = detail::face_max_diff(layout, next, ref, 0, 0);
    trace = std::move(next);
    out.log.converged = detail::record(out.log, std::move(update), denom, std::move(err), config.tolerance);
    if (out.log.converged && !config.fixed_iterations) break;
  }
  return out;
}

struct Method1Result {
  Trajectory trajectory;
  std::vector<IterationLog> logs;  // one per step

  int max_iterations_used() const {
    int k = 0;
    for (const auto& l : logs) k = std::max(k, l.iterations);
    return k;
  }
  bool all_converged() const {
    return std::all_of(logs.begin(), logs.end(), [](const IterationLog& l) { return l.converged; });
  }
};

/// Method 1 over the whole grid. Optional `guesses`/`reference` are time
/// histories: level m+1 seeds/checks the step from t_m.
template <std::size_t Dim>
Method1Result method1_solve(const LocalizedSystem<Dim>& sys, const SolverConfig& config,
                            const TraceSet* guesses = nullptr, const TraceSet* reference = nullptr) {
  const auto levels = static_cast<std::size_t>(sys.time().steps) + 1;
  if (guesses && guesses->level_count() != levels) throw std::invalid_argument("method1_solve: guess levels");
  if (reference && reference->level_count() != levels) throw std::invalid_argument("method1_solve: reference levels");
  Method1Result out;
  out.trajectory.push_back(sys.initial_states());
  for (int m = 0; m < sys.time().steps; ++m) {
    std::optional<TraceSet> g;
    std::optional<TraceSet> r;
    if (guesses) g = TraceSet{{guesses->levels[m + 1]}};
    if (reference) r = TraceSet{{reference->levels[m + 1]}};
    Method1Step step = method1_advance(sys, m, out.trajectory.back(), config, g ? &*g : nullptr, r ? &*r : nullptr);
    out.trajectory.push_back(std::move(step.states));
    out.logs.push_back(std::move(step.log));
  }
  return out;
}

struct Method2Result {
  Trajectory trajectory;
  IterationLog log;                       // windows concatenated
  std::vector<IterationLog> window_logs;  // one per window
};

/// Waveform relaxation. `guess` and `reference` hold levels 0..M; level 0
/// of the guess is replaced by the initial interface data.
template <std::size_t Dim>
Method2Result method2_solve(const LocalizedSystem<Dim>& sys, const SolverConfig& config, const TraceSet& guess,
                            const TraceSet* reference = nullptr) {
  config.validate();
  const Layout<Dim>& layout = sys.layout();
  const int steps = sys.time().steps;
  const auto levels = static_cast<std::size_t>(steps) + 1;
  if (guess.level_count() != levels) {
    throw std::invalid_argument("method2_solve: guess must cover levels 0.." + std::to_string(steps));
  }
  if (reference && reference->level_count() != levels) {
    throw std::invalid_argument("method2_solve: reference must cover levels 0.." + std::to_string(steps));
  }
  const int width = config.window_steps ? std::min(*config.window_steps, steps) : steps;

  Method2Result out;
  out.trajectory.assign(levels, {});
  out.trajectory[0] = sys.initial_states();
  for (int m0 = 0; m0 < steps; m0 += width) {
    const int m1 = std::min(m0 + width, steps);
    std::vector<std::vector<Vector>> trace(levels);
    trace[m0] = sys.gather(out.trajectory[m0]);
    for (int m = m0 + 1; m <= m1; ++m) trace[m] = guess.levels[m];
    const auto first = static_cast<std::size_t>(m0 + 1);
    const auto last = static_cast<std::size_t>(m1);
    const auto* ref = reference ? &reference->levels : nullptr;

    IterationLog log;
    const std::vector<double> denom = detail::face_max_diff(layout, trace, nullptr, first, last);
    if (ref) {
      log.initial_face_error = detail::face_max_diff(layout, trace, ref, first, last);
      log.initial_error = detail::max_of(log.initial_face_error);
    }
    for (int k = 0; k < config.budget(); ++k) {
      for (std::size_t s = 0; s < sys.count(); ++s) {
        Vector u = out.trajectory[m0][s];
        for (int m = m0; m < m1; ++m) {
          u = sys.local_step(s, config.scheme, m, u, trace[m][s], trace[m + 1][s]);
          if (out.trajectory[m + 1].size() != sys.count()) out.trajectory[m + 1].assign(sys.count(), {});
          out.trajectory[m + 1][s] = u;
        }
      }
      std::vector<std::vector<Vector>> next(levels);
      next[m0] = trace[m0];
      for (int m = m0 + 1; m <= m1; ++m) next[m] = sys.gather(out.trajectory[m]);
      std::vector<double> update = detail::face_max_diff(layout, next, &trace, first, last);
      std::optional<std::vector<double>> err;
      if (ref) err = detail::face_max_diff(layout, next, ref, first, last);
      trace = std::move(next);
      log.converged = detail::record(log, std::move(update), denom, std::move(err), config.tolerance);
      if (log.converged && !config.fixed_iterations) break;
    }
    if (out.window_logs.empty()) {
      out.log = log;
    } else {
      out.log.append(log);
    }
    out.window_logs.push_back(std::move(log));
  }
  return out;
}

/// kappa = alpha (1 - beta) / (beta (1 - alpha)) for 0 < alpha < beta < 1.
inline double theoretical_rate(double alpha, double beta) {
  if (!(alpha > 0.0 && alpha < beta && beta < 1.0)) {
    throw std::domain_error("theoretical_rate: need 0 < alpha < beta < 1");
  }
  return alpha * (1.0 - beta) / (beta * (1.0 - alpha));
}

/// erfc(k (beta - alpha) L / (2 sqrt(nu t))).
inline double superlinear_bound(int k, double alpha, double beta, double length, double nu, double t) {
  if (k < 0) throw std::domain_error("superlinear_bound: k must be non-negative");
  if (!(t > 0.0) || !(nu > 0.0) || !(length > 0.0)) {
    throw std::domain_error("superlinear_bound: t, nu and L must be positive");
  }
  if (!(alpha < beta)) throw std::domain_error("superlinear_bound: need alpha < beta");
  return std::erfc(k * (beta - alpha) * length / (2.0 * std::sqrt(nu * t)));
}

}  // namespace letd
