#pragma once

#include <complex>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace csm {

using cplx = std::complex<double>;

/// Numerical tolerances shared by the kernels. Every field can be overridden
/// from the command line.
struct Tolerances {
  double eig = 1e-12;
  double root = 1e-10;
  double newton = 1e-10;
  double bethe = 1e-8;
};

/// Real symmetric tridiagonal matrix.
struct SymTridiag {
  Eigen::VectorXd diag;
  Eigen::VectorXd offdiag;

  Eigen::Index size() const { return diag.size(); }
  void validate() const;
  Eigen::MatrixXd dense() const;
};

struct SymEigen {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // columns, orthonormal
};

/// Flips each column so that its largest-magnitude entry is positive
/// (first such entry on ties).
void canonicalize_signs(Eigen::MatrixXd& vectors);

SymEigen eig_sym_tridiag(const SymTridiag& t);

/// Dense real polynomial, coefficients in ascending degree.
struct Polynomial {
  Eigen::VectorXd coeffs;

  Polynomial() = default;
  explicit Polynomial(Eigen::VectorXd c) : coeffs(std::move(c)) {}

  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
  double leading() const { return coeffs(coeffs.size() - 1); }

  /// Drops trailing coefficients that are exactly zero.
  Polynomial trimmed() const;
  Polynomial derivative() const;

  /// Monic polynomial with the given roots (conjugate pairs expected; the
  /// imaginary residue of every coefficient is discarded).
  static Polynomial from_roots(const std::vector<cplx>& roots);

  template <typename Scalar>
  Scalar operator()(const Scalar& x) const {
    Scalar acc(0);
    for (Eigen::Index k = coeffs.size() - 1; k >= 0; --k) acc = acc * x + Scalar(coeffs(k));
    return acc;
  }

  /// |p(x)| / sum_k |a_k| |x|^k, the componentwise backward error of x as a root.
  double backward_error(const cplx& x) const;
};

struct RootResult {
  std::vector<cplx> roots;  // sorted by (real, imag)
  double max_backward_error = 0.0;
  bool well_conditioned = true;  // every root polished below the tolerance
};

/// Radix-2 diagonal similarity balancing of a general square matrix (in place).
void balance(Eigen::MatrixXd& a);

/// All roots of p via eigenvalues of the balanced companion matrix, followed
/// by one Newton polish per root.
RootResult poly_roots(const Polynomial& p, double tol_root = Tolerances{}.root);

// ---------------------------------------------------------------------------
// Damped Newton iteration

enum class NewtonStatus { Converged, NonConvergence, SingularJacobian };

struct NewtonOptions {
  double tol = Tolerances{}.newton;
  int max_iterations = 200;
  int max_halvings = 40;
  double singular_rcond = 1e-15;
};

template <typename Scalar>
struct NewtonResult {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  Vector x;  // best iterate seen
  double residual_inf = std::numeric_limits<double>::infinity();
  int iterations = 0;
  NewtonStatus status = NewtonStatus::NonConvergence;

  bool converged() const { return status == NewtonStatus::Converged; }
};

namespace detail {
template <typename Vector>
double inf_norm_or_inf(const Vector& v) {
  if (v.size() == 0) return 0.0;
  const double n = v.cwiseAbs().maxCoeff();
  return std::isfinite(n) ? n : std::numeric_limits<double>::infinity();
}
}  // namespace detail

/// Solves residual(x) = 0 by Newton steps, halving each step until the
/// residual infinity-norm decreases.
template <typename Scalar, typename ResidualFn, typename JacobianFn>
NewtonResult<Scalar> newton_solve(ResidualFn&& residual, JacobianFn&& jacobian,
                                  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x0,
                                  const NewtonOptions& opts = {}) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  NewtonResult<Scalar> out;
  Vector x = x0;
  Vector r = residual(x);
  double norm = detail::inf_norm_or_inf(r);
  out.x = x;
  out.residual_inf = norm;
  if (!std::isfinite(norm)) return out;

  for (int it = 0; it < opts.max_iterations; ++it) {
    if (norm <= opts.tol) {
      out.status = NewtonStatus::Converged;
      return out;
    }
    const Matrix jac = jacobian(x);
    if (!jac.allFinite()) {
      out.status = NewtonStatus::SingularJacobian;
      return out;
    }
    Eigen::PartialPivLU<Matrix> lu(jac);
    if (!(lu.rcond() > opts.singular_rcond)) {
      out.status = NewtonStatus::SingularJacobian;
      return out;
    }
    const Vector step = lu.solve(-r);

    double lambda = 1.0;
    bool improved = false;
    for (int h = 0; h <= opts.max_halvings; ++h, lambda *= 0.5) {
      Vector trial = x + Scalar(lambda) * step;
      Vector trial_r = residual(trial);
      const double trial_norm = detail::inf_norm_or_inf(trial_r);
      if (trial_norm < norm) {
        x = std::move(trial);
        r = std::move(trial_r);
        norm = trial_norm;
        improved = true;
        break;
      }
    }
    out.iterations = it + 1;
    if (!improved) break;
    out.x = x;
    out.residual_inf = norm;
  }
  out.status = norm <= opts.tol ? NewtonStatus::Converged : NewtonStatus::NonConvergence;
  return out;
}

}  // namespace csm
