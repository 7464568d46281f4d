// Independent reference computations used only by the tests.
#pragma once

#include "letd/matfunc.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

using letd::DenseMatrix;
using letd::Vector;

/// phi_k(z) in long double: power series for moderate |z|, closed form
/// otherwise.
inline long double phi(int k, long double z) {
  if (k == 0) return std::exp(z);
  if (std::fabs(z) < 2.0L) {
    long double term = 1.0L;
    for (int j = 1; j <= k; ++j) term /= j;
    long double sum = 0.0L;
    for (int j = 0; j < 80; ++j) {
      sum += term;
      term *= z / (j + k + 1);
    }
    return sum;
  }
  const long double em1 = std::expm1(z);
  if (k == 1) return em1 / z;
  return (em1 - z) / (z * z);
}

/// erfc(x) = 1 - 2/sqrt(pi) sum (-1)^n x^{2n+1} / (n! (2n+1)), long double.
inline long double erfc_series(long double x) {
  long double sum = 0.0L;
  long double term = x;  // x^{2n+1}/n!
  for (int n = 0; n < 200; ++n) {
    sum += (n % 2 == 0 ? 1.0L : -1.0L) * term / (2 * n + 1);
    term *= x * x / (n + 1);
  }
  return 1.0L - 2.0L / std::sqrt(3.14159265358979323846264338327950288L) * sum;
}

inline DenseMatrix scaled(const DenseMatrix& a, double s) { return s * a; }

/// Dense phi_k(Z) from the matrix exponential and explicit inverses:
/// phi_1 = Z^{-1}(e^Z - I), phi_2 = Z^{-1}(phi_1 - I).
inline DenseMatrix dense_phi(const DenseMatrix& z, int k) {
  const DenseMatrix e = letd::expm_dense(z);
  if (k == 0) return e;
  const std::size_t n = z.rows();
  const letd::LuFactorization lu(z);
  const DenseMatrix p1 = lu.solve(e - DenseMatrix::identity(n));
  if (k == 1) return p1;
  return lu.solve(p1 - DenseMatrix::identity(n));
}

inline Vector matvec(const DenseMatrix& a, const Vector& v) { return a * std::span<const double>(v); }

/// Classical RK4 for u' = A u + F(t) with `substeps` equal steps.
inline Vector rk4(const DenseMatrix& a, Vector u, const std::function<Vector(double)>& f, double t0, double dt,
                  int substeps) {
  const double h = dt / substeps;
  auto rhs = [&](double t, const Vector& x) {
    Vector r = matvec(a, x);
    const Vector ft = f(t);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += ft[i];
    return r;
  };
  auto axpy = [](const Vector& x, double s, const Vector& y) {
    Vector r = x;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += s * y[i];
    return r;
  };
  for (int i = 0; i < substeps; ++i) {
    const double t = t0 + i * h;
    const Vector k1 = rhs(t, u);
    const Vector k2 = rhs(t + h / 2, axpy(u, h / 2, k1));
    const Vector k3 = rhs(t + h / 2, axpy(u, h / 2, k2));
    const Vector k4 = rhs(t + h, axpy(u, h, k3));
    for (std::size_t j = 0; j < u.size(); ++j) u[j] += h / 6 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]);
  }
  return u;
}

/// e^{dt A} u + int_0^dt e^{(dt-s)A} F(t0+s) ds by composite 5-point
/// Gauss-Legendre quadrature.
inline Vector variation_of_constants(const DenseMatrix& a, const Vector& u, const std::function<Vector(double)>& f,
                                     double t0, double dt, int panels) {
  static const double x[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                              0.9061798459386640};
  static const double w[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
                              0.2369268850561891};
  Vector out = matvec(letd::expm_dense(dt * a), u);
  const double h = dt / panels;
  for (int p = 0; p < panels; ++p) {
    for (int q = 0; q < 5; ++q) {
      const double s = p * h + 0.5 * h * (x[q] + 1.0);
      const Vector g = matvec(letd::expm_dense((dt - s) * a), f(t0 + s));
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += 0.5 * h * w[q] * g[i];
    }
  }
  return out;
}

inline Vector random_vector(std::size_t n, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  Vector v(n);
  for (double& x : v) x = d(rng);
  return v;
}

inline double max_abs_diff(const Vector& a, const Vector& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_abs(const Vector& a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace oracle
