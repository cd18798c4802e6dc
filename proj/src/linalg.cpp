#include "csm/linalg.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "csm/error.hpp"

namespace csm {

void SymTridiag::validate() const {
  if (diag.size() == 0) throw Error(ErrorCode::InvalidArgument, "empty tridiagonal matrix");
  if (offdiag.size() != diag.size() - 1) {
    throw Error(ErrorCode::InvalidArgument, "off-diagonal length must be diag length - 1");
  }
  if (!diag.allFinite() || !offdiag.allFinite()) {
    throw Error(ErrorCode::NonFinite, "tridiagonal matrix has non-finite entries");
  }
}

Eigen::MatrixXd SymTridiag::dense() const {
  const Eigen::Index n = size();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  m.diagonal() = diag;
  if (n > 1) {
    m.diagonal(1) = offdiag;
    m.diagonal(-1) = offdiag;
  }
  return m;
}

void canonicalize_signs(Eigen::MatrixXd& vectors) {
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index r = 0; r < vectors.rows(); ++r) {
      // A small relative margin makes the choice stable against roundoff
      // between entries of equal magnitude.
      const double mag = std::abs(vectors(r, c));
      if (mag > best * (1.0 + 1e-10)) {
        best = mag;
        arg = r;
      }
    }
    if (vectors(arg, c) < 0.0) vectors.col(c) *= -1.0;
  }
}

SymEigen eig_sym_tridiag(const SymTridiag& t) {
  t.validate();
  SymEigen out;
  if (t.size() == 1) {
    out.values = t.diag;
    out.vectors = Eigen::MatrixXd::Identity(1, 1);
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(t.diag, t.offdiag, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::NumericFailure, "tridiagonal eigensolver did not converge");
  }
  out.values = solver.eigenvalues();
  out.vectors = solver.eigenvectors();
  canonicalize_signs(out.vectors);
  return out;
}

// ---------------------------------------------------------------------------

Polynomial Polynomial::trimmed() const {
  Eigen::Index n = coeffs.size();
  while (n > 1 && coeffs(n - 1) == 0.0) --n;
  return Polynomial(coeffs.head(n));
}

Polynomial Polynomial::derivative() const {
  if (coeffs.size() <= 1) return Polynomial(Eigen::VectorXd::Zero(1));
  Eigen::VectorXd d(coeffs.size() - 1);
  for (Eigen::Index k = 1; k < coeffs.size(); ++k) d(k - 1) = static_cast<double>(k) * coeffs(k);
  return Polynomial(d);
}

Polynomial Polynomial::from_roots(const std::vector<cplx>& roots) {
  std::vector<cplx> c{cplx(1.0)};
  for (const cplx& r : roots) {
    std::vector<cplx> next(c.size() + 1, cplx(0.0));
    for (std::size_t i = 0; i < c.size(); ++i) {
      next[i + 1] += c[i];
      next[i] -= c[i] * r;
    }
    c = std::move(next);
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(c.size()));
  for (std::size_t i = 0; i < c.size(); ++i) out(static_cast<Eigen::Index>(i)) = c[i].real();
  return Polynomial(out);
}

double Polynomial::backward_error(const cplx& x) const {
  const double ax = std::abs(x);
  double scale = 0.0;
  for (Eigen::Index k = coeffs.size() - 1; k >= 0; --k) scale = scale * ax + std::abs(coeffs(k));
  if (scale == 0.0) return 0.0;
  return std::abs((*this)(x)) / scale;
}

void balance(Eigen::MatrixXd& a) {
  constexpr double radix = 2.0;
  constexpr double sqrdx = radix * radix;
  const Eigen::Index n = a.rows();
  bool done = false;
  while (!done) {
    done = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double r = 0.0;
      double c = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(a(j, i));
        r += std::abs(a(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / radix;
      double f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= radix;
        c *= sqrdx;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= sqrdx;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        g = 1.0 / f;
        a.row(i) *= g;
        a.col(i) *= f;
      }
    }
  }
}

RootResult poly_roots(const Polynomial& p_in, double tol_root) {
  const Polynomial p = p_in.trimmed();
  if (!p.coeffs.allFinite()) throw Error(ErrorCode::NonFinite, "polynomial has non-finite coefficients");
  const int n = p.degree();
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "polynomial degree must be >= 1");

  RootResult out;
  const double lead = p.leading();
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) companion(i, n - 1) = -p.coeffs(i) / lead;
  balance(companion);

  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::NumericFailure, "companion eigensolver failed");

  const Polynomial dp = p.derivative();
  out.roots.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    cplx r = solver.eigenvalues()(i);
    const cplx d = dp(r);
    if (d != cplx(0.0)) {
      const cplx polished = r - p(r) / d;
      if (std::isfinite(polished.real()) && std::isfinite(polished.imag()) &&
          p.backward_error(polished) < p.backward_error(r)) {
        r = polished;
      }
    }
    const double be = p.backward_error(r);
    out.max_backward_error = std::max(out.max_backward_error, be);
    out.roots.push_back(r);
  }
  out.well_conditioned = out.max_backward_error <= tol_root;
  std::sort(out.roots.begin(), out.roots.end(), [](const cplx& a, const cplx& b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return out;
}

}  // namespace csm
