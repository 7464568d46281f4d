// Built-in problems, experiment sweeps and CSV output for the command-line
// driver.
#pragma once

#include "letd/analysis.hpp"
#include "letd/geometry.hpp"
#include "letd/schwarz.hpp"
#include "letd/steppers.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace letd {

/// Zero data on [0, 2] with nu = 1: the exact solution is identically zero,
/// so any computed value is an error.
inline ProblemSpec<1> error_equation_problem(double horizon = 1.0) {
  auto zero2 = [](double, double) { return 0.0; };
  auto zero1 = [](double) { return 0.0; };
  return make_problem_1d("error_equation", 1.0, 0.0, 2.0, horizon, zero2, zero1, zero1, zero1, zero2);
}

/// u = e^{pi^2 t} sin(pi (x - 1/4)) on [-1, 1], nu = 1, T = 0.25.
inline ProblemSpec<1> analytic_1d_problem(double horizon = 0.25) {
  constexpr double pi = std::numbers::pi;
  auto exact = [](double x, double t) { return std::exp(pi * pi * t) * std::sin(pi * (x - 0.25)); };
  auto source = [exact](double x, double t) { return 2.0 * pi * pi * exact(x, t); };
  return make_problem_1d(
      "analytic_1d", 1.0, -1.0, 2.0, horizon, source, [exact](double t) { return exact(-1.0, t); },
      [exact](double t) { return exact(1.0, t); }, [exact](double x) { return exact(x, 0.0); }, exact);
}

/// u = e^{-4t} sin(x - 1/4) sin(2 (y - 1/8)) on [0, pi]^2, nu = 1, T = 0.5;
/// u_t - Laplace(u) = u, so f = u.
inline ProblemSpec<2> analytic_2d_problem(double horizon = 0.5) {
  ProblemSpec<2> p;
  p.name = "analytic_2d";
  p.nu = 1.0;
  p.origin = {0.0, 0.0};
  p.length = {std::numbers::pi, std::numbers::pi};
  p.horizon = horizon;
  p.exact = [](const Point<2>& x, double t) {
    return std::exp(-4.0 * t) * std::sin(x[0] - 0.25) * std::sin(2.0 * (x[1] - 0.125));
  };
  p.source = p.exact;
  p.boundary = p.exact;
  p.initial = [e = p.exact](const Point<2>& x) { return e(x, 0.0); };
  validate(p);
  return p;
}

using AnyProblem = std::variant<ProblemSpec<1>, ProblemSpec<2>>;

inline AnyProblem builtin_problem(const std::string& name) {
  if (name == "error_equation") return error_equation_problem();
  if (name == "analytic_1d") return analytic_1d_problem();
  if (name == "analytic_2d") return analytic_2d_problem();
  throw std::invalid_argument("unknown problem '" + name +
                              "' (expected error_equation, analytic_1d or analytic_2d)");
}

enum class SolverKind { mono, method1, method2 };

inline std::string to_string(SolverKind s) {
  switch (s) {
    case SolverKind::mono: return "mono";
    case SolverKind::method1: return "method1";
    case SolverKind::method2: return "method2";
  }
  return "?";
}

inline SolverKind parse_solver(const std::string& s) {
  if (s == "mono") return SolverKind::mono;
  if (s == "method1") return SolverKind::method1;
  if (s == "method2") return SolverKind::method2;
  throw std::invalid_argument("unknown solver '" + s + "' (expected mono, method1 or method2)");
}

inline OverlapConvention parse_convention(const std::string& s) {
  if (s == "half") return OverlapConvention::half;
  if (s == "full") return OverlapConvention::full;
  throw std::invalid_argument("unknown overlap convention '" + s + "' (expected half or full)");
}

/// How interface iterations are seeded.
enum class GuessKind {
  automatic,  // random for the error equation; otherwise predictor (method 1) or initial (method 2)
  random,
  initial,    // interface values of the initial data, held constant in time
};

inline std::string to_string(GuessKind g) {
  switch (g) {
    case GuessKind::automatic: return "auto";
    case GuessKind::random: return "random";
    case GuessKind::initial: return "initial";
  }
  return "?";
}

inline GuessKind parse_guess(const std::string& s) {
  if (s == "auto") return GuessKind::automatic;
  if (s == "random") return GuessKind::random;
  if (s == "initial") return GuessKind::initial;
  throw std::invalid_argument("unknown guess '" + s + "' (expected auto, random or initial)");
}

/// Default fixed budget for error-equation decay studies.
inline constexpr int kErrorEquationIterations = 60;

struct ExperimentConfig {
  std::string problem = "error_equation";
  SolverKind solver = SolverKind::method2;
  Scheme scheme = Scheme::etd1;
  int n = 255;
  std::optional<int> ny;
  std::vector<double> dts = {0.01};
  std::optional<double> horizon;
  int px = 2;
  int py = 1;
  std::vector<int> overlap_cells = {8};
  OverlapConvention convention = OverlapConvention::full;
  std::optional<double> tolerance;
  int max_iterations = 1000;
  std::optional<int> fixed_iterations;
  std::uint64_t seed = 1;
  int seeds = 5;
  std::optional<int> window_steps;
  GuessKind guess = GuessKind::automatic;
  std::string out_dir = "out";

  double effective_tolerance() const {
    if (tolerance) return *tolerance;
    return scheme == Scheme::etd1 ? 1e-4 : 1e-6;
  }

  std::optional<int> effective_fixed_iterations() const {
    if (fixed_iterations) return fixed_iterations;
    if (problem == "error_equation" && solver != SolverKind::mono) return kErrorEquationIterations;
    return std::nullopt;
  }

  bool random_guess() const {
    if (solver == SolverKind::mono) return false;
    if (guess == GuessKind::random) return true;
    if (guess == GuessKind::initial) return false;
    return problem == "error_equation";
  }

  void validate() const {
    (void)builtin_problem(problem);
    if (n < 3) throw std::invalid_argument("n must be at least 3");
    if (ny && *ny < 3) throw std::invalid_argument("ny must be at least 3");
    if (dts.empty()) throw std::invalid_argument("need at least one dt");
    for (double d : dts) {
      if (!(d > 0.0)) throw std::invalid_argument("dt must be positive");
    }
    if (horizon && !(*horizon > 0.0)) throw std::invalid_argument("T must be positive");
    if (px < 1 || py < 1) throw std::invalid_argument("subdomain counts must be positive");
    if (overlap_cells.empty()) throw std::invalid_argument("need at least one overlap value");
    if (seeds < 1) throw std::invalid_argument("seeds must be positive");
    SolverConfig sc;
    sc.scheme = scheme;
    sc.tolerance = effective_tolerance();
    sc.max_iterations = max_iterations;
    sc.fixed_iterations = fixed_iterations;
    sc.window_steps = window_steps;
    sc.validate();
  }
};

/// Grid, step and decomposition defaults of each built-in problem.
inline ExperimentConfig default_config(const std::string& problem) {
  ExperimentConfig c;
  c.problem = problem;
  if (problem == "error_equation") {
    c.n = 255;
    c.dts = {0.01};
    c.overlap_cells = {8};
  } else if (problem == "analytic_1d") {
    c.solver = SolverKind::method1;
    c.n = 511;
    c.dts = {1.0 / 40, 1.0 / 80, 1.0 / 160, 1.0 / 320};
    c.overlap_cells = {16};
  } else if (problem == "analytic_2d") {
    c.solver = SolverKind::method1;
    c.scheme = Scheme::etd2;
    c.n = 127;
    c.dts = {0.5 / 128};
    c.px = 2;
    c.py = 2;
    c.overlap_cells = {9};
  } else {
    (void)builtin_problem(problem);
  }
  return c;
}

struct SummaryRow {
  std::string run_id;
  int delta_cells = 0;
  double dt = 0.0;
  double horizon = 0.0;
  std::string parts;
  Scheme scheme = Scheme::etd1;
  SolverKind solver = SolverKind::mono;
  std::optional<double> contraction;
  std::optional<double> linf_error;
  std::optional<double> observed_order;
  int iters_used = 0;
};

struct DecayRow {
  std::string run_id;
  int iteration = 0;
  int time_level = 0;
  std::string interface;  // face index, or "max"
  double raw_update = 0.0;
  std::optional<double> normalized_error;
};

struct ExperimentResult {
  std::vector<SummaryRow> summary;
  std::vector<DecayRow> decay;
};

inline std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace detail {

inline std::string optional_number(const std::optional<double>& x) {
  return x ? format_number(*x) : std::string();
}

inline void append_decay(ExperimentResult& out, const std::string& id, int level, const IterationLog& log) {
  for (std::size_t k = 0; k < log.update.size(); ++k) {
    const std::size_t faces = log.face_update[k].size();
    for (std::size_t i = 0; i <= faces; ++i) {
      DecayRow row;
      row.run_id = id;
      row.iteration = static_cast<int>(k) + 1;
      row.time_level = level;
      row.interface = i < faces ? std::to_string(i) : "max";
      row.raw_update = i < faces ? log.face_update[k][i] : log.update[k];
      if (log.has_reference() && k < log.face_error.size()) {
        const double first = i < faces ? log.face_error[0][i] : log.error[0];
        const double e = i < faces ? log.face_error[k][i] : log.error[k];
        row.normalized_error = first > 0.0 ? e / first : e;
      } else {
        const double first = i < faces ? log.face_update[0][i] : log.update[0];
        row.normalized_error = first > 0.0 ? row.raw_update / first : row.raw_update;
      }
      out.decay.push_back(std::move(row));
    }
  }
}

inline std::optional<double> decay_rate(const IterationLog& log) {
  const std::vector<double>& curve = log.has_reference() ? log.error : log.update;
  if (curve.size() < 6) return std::nullopt;
  for (double e : curve) {
    if (!(e > 0.0)) return std::nullopt;
  }
  return per_iteration_rate(curve);
}

template <std::size_t Dim>
TraceSet initial_trace_history(const LocalizedSystem<Dim>& sys) {
  const std::vector<Vector> t0 = sys.gather(sys.initial_states());
  TraceSet t;
  t.levels.assign(static_cast<std::size_t>(sys.time().steps) + 1, t0);
  return t;
}

struct RunOutcome {
  Trajectory trajectory;
  std::optional<double> contraction;
  int iters = 0;
};

template <std::size_t Dim>
RunOutcome run_one(const ExperimentConfig& cfg, const LocalizedSystem<Dim>& sys, std::uint64_t seed,
                   const std::string& id, ExperimentResult& out) {
  RunOutcome r;
  if (cfg.solver == SolverKind::mono) {
    r.trajectory = monodomain_solve(sys, cfg.scheme);
    return r;
  }
  SolverConfig sc;
  sc.scheme = cfg.scheme;
  sc.tolerance = cfg.effective_tolerance();
  sc.max_iterations = cfg.max_iterations;
  sc.fixed_iterations = cfg.effective_fixed_iterations();
  sc.window_steps = cfg.window_steps;

  std::optional<TraceSet> guess;
  if (cfg.random_guess()) {
    guess = random_trace_guess(sys.layout(), TraceShape::time_history, seed, sys.time().steps);
  } else if (cfg.guess == GuessKind::initial || cfg.solver == SolverKind::method2) {
    guess = initial_trace_history(sys);
  }
  std::optional<TraceSet> reference;
  if (cfg.problem == "error_equation") {
    reference = zero_trace_set(sys.layout(), static_cast<std::size_t>(sys.time().steps) + 1);
  }
  const TraceSet* ref = reference ? &*reference : nullptr;

  if (cfg.solver == SolverKind::method1) {
    Method1Result res = method1_solve(sys, sc, guess ? &*guess : nullptr, ref);
    for (std::size_t m = 0; m < res.logs.size(); ++m) append_decay(out, id, static_cast<int>(m) + 1, res.logs[m]);
    r.contraction = decay_rate(res.logs.front());
    r.iters = res.max_iterations_used();
    r.trajectory = std::move(res.trajectory);
  } else {
    Method2Result res = method2_solve(sys, sc, *guess, ref);
    const int width = sc.window_steps ? std::min(*sc.window_steps, sys.time().steps) : sys.time().steps;
    for (std::size_t w = 0; w < res.window_logs.size(); ++w) {
      const int level = std::min(static_cast<int>(w + 1) * width, sys.time().steps);
      append_decay(out, id, level, res.window_logs[w]);
    }
    r.contraction = decay_rate(res.window_logs.front());
    r.iters = res.log.iterations;
    r.trajectory = std::move(res.trajectory);
  }
  return r;
}

template <std::size_t Dim>
double run_error(const ExperimentConfig& cfg, const LocalizedSystem<Dim>& sys, const Trajectory& traj) {
  if (cfg.problem == "error_equation") {
    double worst = 0.0;
    for (std::size_t m = 1; m < traj.size(); ++m) {
      for (const Vector& v : traj[m]) {
        for (double x : v) worst = std::max(worst, std::abs(x));
      }
    }
    return worst;
  }
  if constexpr (Dim == 1) return relative_spacetime_error(sys, traj);
  return final_time_error(sys, traj);
}

template <std::size_t Dim>
Layout<Dim> experiment_layout(const ExperimentConfig& cfg, const ProblemSpec<Dim>& p, int cells) {
  if constexpr (Dim == 1) {
    const Grid1D grid = make_grid<1>(p, {cfg.n});
    if (cfg.solver == SolverKind::mono) return monodomain_layout(grid);
    return decompose_1d(grid, cfg.px, cells);
  } else {
    const Grid2D grid = make_grid<2>(p, {cfg.n, cfg.ny.value_or(cfg.n)});
    if (cfg.solver == SolverKind::mono) return monodomain_layout(grid);
    return decompose_2d(grid, cfg.px, cfg.py, cells, cfg.convention);
  }
}

template <std::size_t Dim>
void run_sweep(const ExperimentConfig& cfg, ProblemSpec<Dim> problem, ExperimentResult& out) {
  if (cfg.horizon) problem.horizon = *cfg.horizon;
  const std::string parts =
      Dim == 1 ? std::to_string(cfg.px) : std::to_string(cfg.px) + "x" + std::to_string(cfg.py);
  const int seeds = cfg.random_guess() ? cfg.seeds : 1;
  for (int cells : cfg.overlap_cells) {
    const Layout<Dim> layout = experiment_layout(cfg, problem, cells);
    std::vector<double> errors;
    for (std::size_t di = 0; di < cfg.dts.size(); ++di) {
      const double dt = cfg.dts[di];
      const LocalizedSystem<Dim> sys(problem, layout, time_grid_from_dt(problem.horizon, dt));
      std::vector<SummaryRow> rows;
      for (int k = 0; k < seeds; ++k) {
        const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(k);
        const std::string id = "c" + std::to_string(cells) + "-dt" + std::to_string(di) +
                               (seeds > 1 || cfg.random_guess() ? "-s" + std::to_string(seed) : "");
        RunOutcome r = run_one(cfg, sys, seed, id, out);
        SummaryRow row;
        row.run_id = id;
        row.delta_cells = cells;
        row.dt = dt;
        row.horizon = problem.horizon;
        row.parts = parts;
        row.scheme = cfg.scheme;
        row.solver = cfg.solver;
        row.contraction = r.contraction;
        row.linf_error = run_error(cfg, sys, r.trajectory);
        row.iters_used = r.iters;
        rows.push_back(std::move(row));
      }
      if (rows.size() > 1) {
        SummaryRow mean = rows.front();
        mean.run_id = "c" + std::to_string(cells) + "-dt" + std::to_string(di) + "-mean";
        double rate = 0.0;
        double err = 0.0;
        int iters = 0;
        bool have_rate = true;
        for (const auto& r : rows) {
          have_rate = have_rate && r.contraction.has_value();
          rate += r.contraction.value_or(0.0);
          err += *r.linf_error;
          iters = std::max(iters, r.iters_used);
        }
        mean.contraction = have_rate ? std::optional<double>(rate / rows.size()) : std::nullopt;
        mean.linf_error = err / rows.size();
        mean.iters_used = iters;
        rows.push_back(std::move(mean));
      }
      errors.push_back(*rows.back().linf_error);
      if (di > 0 && errors[di] > 0.0 && errors[di - 1] > 0.0 && cfg.dts[di] < cfg.dts[di - 1]) {
        const double order = observed_order(std::vector<double>{errors[di - 1], errors[di]},
                                            std::vector<double>{cfg.dts[di - 1], cfg.dts[di]})[0];
        for (auto& r : rows) r.observed_order = order;
      }
      for (auto& r : rows) out.summary.push_back(std::move(r));
    }
  }
}

}  // namespace detail

/// Runs every (overlap, dt, seed) combination of the config.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult out;
  std::visit([&](auto problem) { detail::run_sweep(cfg, std::move(problem), out); }, builtin_problem(cfg.problem));
  return out;
}

inline void write_metadata(std::ostream& os, const ExperimentConfig& cfg, bool with_timestamp) {
  auto join = [](const auto& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += ",";
      if constexpr (std::is_same_v<std::decay_t<decltype(v[i])>, double>) {
        s += format_number(v[i]);
      } else {
        s += std::to_string(v[i]);
      }
    }
    return s;
  };
  if (with_timestamp) {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[64];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    os << "# generated: " << buf << "\n";
  }
  os << "# problem: " << cfg.problem << "\n"
     << "# solver: " << to_string(cfg.solver) << "\n"
     << "# scheme: " << to_string(cfg.scheme) << "\n"
     << "# n: " << cfg.n << "\n"
     << "# ny: " << (cfg.ny ? std::to_string(*cfg.ny) : std::string("same as n")) << "\n"
     << "# dt: " << join(cfg.dts) << "\n"
     << "# T: " << (cfg.horizon ? format_number(*cfg.horizon) : std::string("problem default")) << "\n"
     << "# subdomains: " << cfg.px << "x" << cfg.py << "\n"
     << "# overlap_cells: " << join(cfg.overlap_cells) << "\n"
     << "# overlap_convention: " << to_string(cfg.convention) << "\n"
     << "# tol: " << format_number(cfg.effective_tolerance()) << "\n"
     << "# max_iters: " << cfg.max_iterations << "\n"
     << "# fixed_iters: "
     << (cfg.effective_fixed_iterations() ? std::to_string(*cfg.effective_fixed_iterations()) : std::string("none"))
     << "\n"
     << "# seed: " << cfg.seed << "\n"
     << "# seeds: " << cfg.seeds << "\n"
     << "# window_steps: " << (cfg.window_steps ? std::to_string(*cfg.window_steps) : std::string("none")) << "\n"
     << "# guess: " << to_string(cfg.guess) << (cfg.random_guess() ? " (random in (0,1))" : " (deterministic)") << "\n"
     << "# contraction: per-iteration factor, sqrt of the geometric mean of e(k+2)/e(k) over iterations 3..K-1\n"
     << "# linf_error: "
     << (cfg.problem == "error_equation" ? "space-time max |u| (exact solution is zero)"
         : cfg.problem == "analytic_1d"  ? "space-time max error / space-time max |exact|, levels 1..M"
                                         : "max error at t = T")
     << "\n"
     << "# normalized_error: interface error over the first iterate's error"
     << (cfg.problem == "error_equation" ? "" : " (update over first update when no reference)") << "\n";
}

inline void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
  os << "run_id,delta_cells,dt,T,P,scheme,solver,contraction,linf_error,observed_order,iters_used\n";
  for (const auto& r : rows) {
    os << r.run_id << ',' << r.delta_cells << ',' << format_number(r.dt) << ',' << format_number(r.horizon) << ','
       << r.parts << ',' << to_string(r.scheme) << ',' << to_string(r.solver) << ','
       << detail::optional_number(r.contraction) << ',' << detail::optional_number(r.linf_error) << ','
       << detail::optional_number(r.observed_order) << ',' << r.iters_used << '\n';
  }
}

inline void write_decay_csv(std::ostream& os, const std::vector<DecayRow>& rows) {
  os << "run_id,iteration,time_level,interface,raw_update,normalized_error\n";
  for (const auto& r : rows) {
    os << r.run_id << ',' << r.iteration << ',' << r.time_level << ',' << r.interface << ','
       << format_number(r.raw_update) << ',' << detail::optional_number(r.normalized_error) << '\n';
  }
}

/// Writes summary.csv and decay.csv under cfg.out_dir.
inline void write_outputs(const ExperimentConfig& cfg, const ExperimentResult& result, bool with_timestamp = true) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + cfg.out_dir + "': " + ec.message());
  auto open = [&](const std::string& name) {
    std::ofstream f(fs::path(cfg.out_dir) / name);
    if (!f) throw std::runtime_error("cannot open '" + (fs::path(cfg.out_dir) / name).string() + "' for writing");
    return f;
  };
  {
    std::ofstream f = open("summary.csv");
    write_metadata(f, cfg, with_timestamp);
    write_summary_csv(f, result.summary);
    if (!f) throw std::runtime_error("write failed for summary.csv");
  }
  {
    std::ofstream f = open("decay.csv");
    write_metadata(f, cfg, with_timestamp);
    write_decay_csv(f, result.decay);
    if (!f) throw std::runtime_error("write failed for decay.csv");
  }
}

}  // namespace letd
