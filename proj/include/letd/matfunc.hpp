// Dirichlet Laplacians, their sine eigensystems and the phi-function kernels
// e^{dtA}, phi_1(dtA), phi_2(dtA) used by the exponential integrators.
#pragma once

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <numbers>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace letd {

using Vector = std::vector<double>;

// ---------------------------------------------------------------------------
// Scalar phi-functions
// ---------------------------------------------------------------------------

/// Below this magnitude phi_1/phi_2 switch to a truncated Taylor series.
inline constexpr double kPhiSeriesThreshold = 1e-2;

/// phi_0(z) = e^z, phi_1(z) = (e^z - 1)/z, phi_2(z) = (e^z - 1 - z)/z^2.
inline double phi_scalar(int k, double z) {
  if (k < 0 || k > 2) {
    throw std::invalid_argument("phi_scalar: order must be 0, 1 or 2, got " +
                                std::to_string(k));
  }
  if (k == 0) return std::exp(z);
  if (std::abs(z) < kPhiSeriesThreshold) {
    // phi_k(z) = sum_j z^j / (j + k)!, 12 terms, Horner from the tail.
    constexpr int kTerms = 12;
    double sum = 0.0;
    for (int j = kTerms - 1; j >= 0; --j) {
      sum = 1.0 + z * sum / static_cast<double>(j + k + 1);
    }
    return k == 1 ? sum : sum / 2.0;
  }
  const double em1 = std::expm1(z);
  if (k == 1) return em1 / z;
  return (em1 - z) / (z * z);
}

// ---------------------------------------------------------------------------
// Small dense matrices (test oracles and interface systems only)
// ---------------------------------------------------------------------------

class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const double> data() const { return data_; }

  /// Maximum absolute column sum.
  double norm1() const {
    double best = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < rows_; ++i) s += std::abs((*this)(i, j));
      best = std::max(best, s);
    }
    return best;
  }

  friend DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols_ != b.rows_) throw std::invalid_argument("DenseMatrix: shape mismatch in product");
    DenseMatrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i) {
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const double aik = a(i, k);
        if (aik == 0.0) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
      }
    }
    return c;
  }

  friend DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b) {
    a.check_same(b);
    for (std::size_t i = 0; i < a.data_.size(); ++i) a.data_[i] += b.data_[i];
    return a;
  }

  friend DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b) {
    a.check_same(b);
    for (std::size_t i = 0; i < a.data_.size(); ++i) a.data_[i] -= b.data_[i];
    return a;
  }

  friend DenseMatrix operator*(double s, DenseMatrix a) {
    for (double& x : a.data_) x *= s;
    return a;
  }

  Vector operator*(std::span<const double> v) const {
    if (v.size() != cols_) throw std::invalid_argument("DenseMatrix: vector length mismatch");
    Vector out(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < cols_; ++j) s += (*this)(i, j) * v[j];
      out[i] = s;
    }
    return out;
  }

 private:
  void check_same(const DenseMatrix& b) const {
    if (rows_ != b.rows_ || cols_ != b.cols_) {
      throw std::invalid_argument("DenseMatrix: shape mismatch");
    }
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Vector data_;
};

/// LU factorization with partial pivoting.
class LuFactorization {
 public:
  explicit LuFactorization(DenseMatrix a) : lu_(std::move(a)), perm_(lu_.rows()) {
    if (!lu_.square()) throw std::invalid_argument("LuFactorization: matrix must be square");
    const std::size_t n = lu_.rows();
    std::iota(perm_.begin(), perm_.end(), std::size_t{0});
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t piv = k;
      for (std::size_t i = k + 1; i < n; ++i) {
        if (std::abs(lu_(i, k)) > std::abs(lu_(piv, k))) piv = i;
      }
      if (lu_(piv, k) == 0.0) throw std::domain_error("LuFactorization: singular matrix");
      if (piv != k) {
        for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(piv, j));
        std::swap(perm_[k], perm_[piv]);
      }
      for (std::size_t i = k + 1; i < n; ++i) {
        const double l = lu_(i, k) / lu_(k, k);
        lu_(i, k) = l;
        for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= l * lu_(k, j);
      }
    }
  }

  std::size_t size() const { return lu_.rows(); }

  Vector solve(std::span<const double> b) const {
    const std::size_t n = size();
    if (b.size() != n) throw std::invalid_argument("LuFactorization: rhs length mismatch");
    Vector x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[perm_[i]];
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < i; ++j) x[i] -= lu_(i, j) * x[j];
    }
    for (std::size_t i = n; i-- > 0;) {
      for (std::size_t j = i + 1; j < n; ++j) x[i] -= lu_(i, j) * x[j];
      x[i] /= lu_(i, i);
    }
    return x;
  }

  DenseMatrix solve(const DenseMatrix& b) const {
    if (b.rows() != size()) throw std::invalid_argument("LuFactorization: rhs shape mismatch");
    DenseMatrix x(b.rows(), b.cols());
    Vector col(b.rows());
    for (std::size_t j = 0; j < b.cols(); ++j) {
      for (std::size_t i = 0; i < b.rows(); ++i) col[i] = b(i, j);
      const Vector sol = solve(col);
      for (std::size_t i = 0; i < b.rows(); ++i) x(i, j) = sol[i];
    }
    return x;
  }

  DenseMatrix inverse() const { return solve(DenseMatrix::identity(size())); }

 private:
  DenseMatrix lu_;
  std::vector<std::size_t> perm_;
};

/// Matrix exponential by scaling and squaring with the degree-13 Pade
/// approximant (Higham 2005). Meant for oracle sizes, n <= 256.
inline DenseMatrix expm_dense(const DenseMatrix& m) {
  if (!m.square()) throw std::invalid_argument("expm_dense: matrix must be square");
  const std::size_t n = m.rows();
  for (double x : m.data()) {
    if (!std::isfinite(x)) throw std::invalid_argument("expm_dense: non-finite entry");
  }
  constexpr std::array<double, 14> b = {64764752532480000.0,
                                        32382376266240000.0,
                                        7771770303897600.0,
                                        1187353796428800.0,
                                        129060195264000.0,
                                        10559470521600.0,
                                        670442572800.0,
                                        33522128640.0,
                                        1323241920.0,
                                        40840800.0,
                                        960960.0,
                                        16380.0,
                                        182.0,
                                        1.0};
  constexpr double theta13 = 5.371920351148152;

  const double norm = m.norm1();
  int s = 0;
  if (norm > theta13) s = static_cast<int>(std::ceil(std::log2(norm / theta13)));
  const DenseMatrix a = std::ldexp(1.0, -s) * m;

  const DenseMatrix id = DenseMatrix::identity(n);
  const DenseMatrix a2 = a * a;
  const DenseMatrix a4 = a2 * a2;
  const DenseMatrix a6 = a4 * a2;

  const DenseMatrix u_inner = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 +
                              b[5] * a4 + b[3] * a2 + b[1] * id;
  const DenseMatrix u = a * u_inner;
  const DenseMatrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 +
                        b[2] * a2 + b[0] * id;

  DenseMatrix r = LuFactorization(v - u).solve(v + u);
  for (int i = 0; i < s; ++i) r = r * r;
  return r;
}

// ---------------------------------------------------------------------------
// Discrete Dirichlet Laplacians
// ---------------------------------------------------------------------------

/// (nu/h^2) tridiag(1, -2, 1) of size n.
struct DirichletLaplacian1D {
  int n = 0;
  double nu = 0.0;
  double h = 0.0;

  double coefficient() const { return nu / (h * h); }

  /// Eigenvalue j (1-based): -(4 nu/h^2) sin^2(j pi / (2(n+1))).
  double eigenvalue(int j) const {
    const double s = std::sin(j * std::numbers::pi / (2.0 * (n + 1)));
    return -4.0 * coefficient() * s * s;
  }

  Vector apply(std::span<const double> v) const {
    if (v.size() != static_cast<std::size_t>(n)) {
      throw std::invalid_argument("DirichletLaplacian1D::apply: dimension mismatch");
    }
    const double c = coefficient();
    Vector out(v.size());
    for (int i = 0; i < n; ++i) {
      double s = -2.0 * v[i];
      if (i > 0) s += v[i - 1];
      if (i + 1 < n) s += v[i + 1];
      out[i] = c * s;
    }
    return out;
  }

  DenseMatrix dense() const {
    DenseMatrix m(n, n);
    const double c = coefficient();
    for (int i = 0; i < n; ++i) {
      m(i, i) = -2.0 * c;
      if (i > 0) m(i, i - 1) = c;
      if (i + 1 < n) m(i, i + 1) = c;
    }
    return m;
  }
};

inline DirichletLaplacian1D build_laplacian_1d(int n, double nu, double h) {
  if (n < 1) throw std::invalid_argument("build_laplacian_1d: n must be >= 1");
  if (!(nu > 0.0)) throw std::invalid_argument("build_laplacian_1d: nu must be positive");
  if (!(h > 0.0)) throw std::invalid_argument("build_laplacian_1d: h must be positive");
  return {n, nu, h};
}

/// Kronecker sum A_0 (+) A_1 (+) ... acting on row-major fields whose last
/// axis varies fastest.
template <std::size_t Dim>
struct KroneckerLaplacian {
  std::array<DirichletLaplacian1D, Dim> axes;

  std::array<int, Dim> shape() const {
    std::array<int, Dim> s{};
    for (std::size_t a = 0; a < Dim; ++a) s[a] = axes[a].n;
    return s;
  }

  std::size_t size() const {
    std::size_t s = 1;
    for (const auto& ax : axes) s *= static_cast<std::size_t>(ax.n);
    return s;
  }

  Vector apply(std::span<const double> v) const {
    if (v.size() != size()) throw std::invalid_argument("KroneckerLaplacian::apply: dimension mismatch");
    Vector out(v.size(), 0.0);
    std::size_t stride = 1;
    for (std::size_t a = Dim; a-- > 0;) {
      const int n = axes[a].n;
      const double c = axes[a].coefficient();
      for (std::size_t idx = 0; idx < v.size(); ++idx) {
        const int i = static_cast<int>((idx / stride) % static_cast<std::size_t>(n));
        double s = -2.0 * v[idx];
        if (i > 0) s += v[idx - stride];
        if (i + 1 < n) s += v[idx + stride];
        out[idx] += c * s;
      }
      stride *= static_cast<std::size_t>(n);
    }
    return out;
  }

  DenseMatrix dense() const {
    const std::size_t n = size();
    DenseMatrix m(n, n);
    Vector e(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      e[j] = 1.0;
      const Vector col = apply(e);
      for (std::size_t i = 0; i < n; ++i) m(i, j) = col[i];
      e[j] = 0.0;
    }
    return m;
  }
};

/// x-direction operator ax = axes[0], y-direction ay = axes[1]; fields are
/// stored nx-by-ny with y varying fastest.
using DirichletLaplacian2D = KroneckerLaplacian<2>;

inline DirichletLaplacian2D build_laplacian_2d(const DirichletLaplacian1D& ax,
                                               const DirichletLaplacian1D& ay) {
  return DirichletLaplacian2D{{ax, ay}};
}

// ---------------------------------------------------------------------------
// Sine transform and spectral factorization
// ---------------------------------------------------------------------------

/// Orthonormal DST-I over a Dim-dimensional row-major array (FFTW RODFT00).
/// The orthonormal DST-I is symmetric and its own inverse.
template <std::size_t Dim>
class SineTransform {
 public:
  explicit SineTransform(std::array<int, Dim> shape) : shape_(shape) {
    size_ = 1;
    double norm = 1.0;
    for (int n : shape_) {
      if (n < 1) throw std::invalid_argument("SineTransform: extents must be positive");
      size_ *= static_cast<std::size_t>(n);
      norm *= 2.0 * (n + 1);
    }
    scale_ = 1.0 / std::sqrt(norm);
    std::array<fftw_r2r_kind, Dim> kinds;
    kinds.fill(FFTW_RODFT00);
    double* in = fftw_alloc_real(size_);
    double* out = fftw_alloc_real(size_);
    plan_ = fftw_plan_r2r(static_cast<int>(Dim), shape_.data(), in, out, kinds.data(),
                          FFTW_ESTIMATE | FFTW_UNALIGNED | FFTW_PRESERVE_INPUT);
    fftw_free(in);
    fftw_free(out);
    if (plan_ == nullptr) throw std::runtime_error("SineTransform: FFTW planning failed");
  }

  SineTransform(const SineTransform&) = delete;
  SineTransform& operator=(const SineTransform&) = delete;
  ~SineTransform() { fftw_destroy_plan(plan_); }

  std::size_t size() const { return size_; }
  const std::array<int, Dim>& shape() const { return shape_; }

  void apply(std::span<const double> in, std::span<double> out) const {
    if (in.size() != size_ || out.size() != size_) {
      throw std::invalid_argument("SineTransform: dimension mismatch");
    }
    if (in.data() == out.data()) throw std::invalid_argument("SineTransform: in-place use not supported");
    fftw_execute_r2r(plan_, const_cast<double*>(in.data()), out.data());
    for (double& x : out) x *= scale_;
  }

  Vector apply(std::span<const double> in) const {
    Vector out(size_);
    apply(in, out);
    return out;
  }

 private:
  std::array<int, Dim> shape_;
  std::size_t size_ = 0;
  double scale_ = 1.0;
  fftw_plan plan_ = nullptr;
};

/// Exact eigensystem of a Kronecker-sum Dirichlet Laplacian: sine
/// eigenvectors and eigenvalues lambda_i + mu_j + ...
template <std::size_t Dim>
class SpectralFactorization {
 public:
  explicit SpectralFactorization(const KroneckerLaplacian<Dim>& op)
      : op_(op), transform_(std::make_shared<const SineTransform<Dim>>(op.shape())) {
    for (const auto& ax : op.axes) {
      if (ax.n < 1 || !(ax.nu > 0.0) || !(ax.h > 0.0)) {
        throw std::invalid_argument("SpectralFactorization: invalid operator");
      }
    }
    eigenvalues_.assign(transform_->size(), 0.0);
    std::size_t stride = 1;
    for (std::size_t a = Dim; a-- > 0;) {
      const int n = op.axes[a].n;
      for (std::size_t idx = 0; idx < eigenvalues_.size(); ++idx) {
        const int j = static_cast<int>((idx / stride) % static_cast<std::size_t>(n)) + 1;
        eigenvalues_[idx] += op.axes[a].eigenvalue(j);
      }
      stride *= static_cast<std::size_t>(n);
    }
  }

  std::size_t size() const { return eigenvalues_.size(); }
  const KroneckerLaplacian<Dim>& op() const { return op_; }
  const SineTransform<Dim>& transform() const { return *transform_; }

  /// Flat-indexed eigenvalues; in 1D sorted by mode index j = 1..n.
  const Vector& eigenvalues() const { return eigenvalues_; }

  /// S diag(g(lambda)) S^T v.
  Vector apply_function(const std::function<double(double)>& g, std::span<const double> v) const {
    if (v.size() != size()) throw std::invalid_argument("apply_phi: dimension mismatch");
    Vector w = transform_->apply(v);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] *= g(eigenvalues_[i]);
    return transform_->apply(w);
  }

  /// Multiply in the sine basis by a precomputed per-mode multiplier.
  Vector apply_multiplier(std::span<const double> multiplier, std::span<const double> v) const {
    if (v.size() != size() || multiplier.size() != size()) {
      throw std::invalid_argument("apply_multiplier: dimension mismatch");
    }
    Vector w = transform_->apply(v);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] *= multiplier[i];
    return transform_->apply(w);
  }

  /// phi_k(dt A) v.
  Vector apply_phi(int k, double dt, std::span<const double> v) const {
    if (k < 0 || k > 2) throw std::invalid_argument("apply_phi: order must be 0, 1 or 2");
    if (!(dt >= 0.0)) throw std::invalid_argument("apply_phi: dt must be non-negative");
    return apply_function([k, dt](double lambda) { return phi_scalar(k, dt * lambda); }, v);
  }

 private:
  KroneckerLaplacian<Dim> op_;
  std::shared_ptr<const SineTransform<Dim>> transform_;
  Vector eigenvalues_;
};

using SpectralFactorization1D = SpectralFactorization<1>;
using SpectralFactorization2D = SpectralFactorization<2>;

inline SpectralFactorization1D spectral_factorization(const DirichletLaplacian1D& op) {
  return SpectralFactorization1D(KroneckerLaplacian<1>{{op}});
}

inline SpectralFactorization2D spectral_factorization(const DirichletLaplacian2D& op) {
  return SpectralFactorization2D(op);
}

inline Vector apply_phi(const SpectralFactorization1D& fact, int k, double dt,
                        std::span<const double> v) {
  return fact.apply_phi(k, dt, v);
}

/// phi_k(dt (Ax (+) Ay)) on an nx-by-ny field. Builds the factorization on
/// every call; hold a SpectralFactorization2D for repeated use.
inline Vector apply_phi_2d(const DirichletLaplacian2D& op2, int k, double dt,
                           std::span<const double> v) {
  if (v.size() != op2.size()) throw std::invalid_argument("apply_phi_2d: dimension mismatch");
  return SpectralFactorization2D(op2).apply_phi(k, dt, v);
}

/// j-th (1-based) normalized sine eigenvector of the size-n 1D operator.
inline Vector sine_eigenvector(int n, int j) {
  Vector v(n);
  const double scale = std::sqrt(2.0 / (n + 1));
  for (int i = 0; i < n; ++i) {
    v[i] = scale * std::sin(static_cast<double>(i + 1) * j * std::numbers::pi / (n + 1));
  }
  return v;
}

}  // namespace letd
