#include "csm/modes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "csm/error.hpp"
#include "csm/linalg.hpp"

namespace csm {

namespace {

// Characteristic polynomial det(x - T) of a symmetric tridiagonal matrix,
// coefficients in descending powers of x (leading 1).
Eigen::VectorXd charpoly_desc(const Eigen::VectorXd& alpha, const Eigen::VectorXd& beta) {
  const Eigen::Index n = alpha.size();
  // p_k stored descending, length k + 1.
  Eigen::VectorXd prev = Eigen::VectorXd::Ones(1);  // p_0 = 1
  if (n == 0) return prev;
  Eigen::VectorXd cur(2);
  cur << 1.0, -alpha(0);
  for (Eigen::Index k = 1; k < n; ++k) {
    Eigen::VectorXd next = Eigen::VectorXd::Zero(k + 2);
    next.head(k + 1) = cur;                  // x p_{k}
    next.tail(k + 1) -= alpha(k) * cur;      // -alpha_k p_k
    next.tail(k) -= beta(k - 1) * beta(k - 1) * prev;  // -beta^2 p_{k-1}
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

}  // namespace

SectorCoeffs build_sector_coeffs(const ModelParams& p, int n) {
  p.validate();
  if (n < 0 || n > p.N) {
    throw Error(ErrorCode::InvalidArgument, "Dicke index " + std::to_string(n) + " outside 0.." + std::to_string(p.N));
  }
  const int two_s = p.s.twice();
  const double s = p.s.to_double();
  SectorCoeffs c;
  c.n = n;
  c.dim = std::min(two_s, n) + 1;
  c.alpha.resize(c.dim);
  c.beta.resize(c.dim - 1);
  for (int j = 0; j < c.dim; ++j) {
    c.alpha(j) = p.B * (s - j) + 2.0 * p.A * (s - j) * (0.5 * p.N + j - n);
  }
  for (int j = 0; j + 1 < c.dim; ++j) {
    c.beta(j) = p.A * std::sqrt(static_cast<double>(j + 1) * (two_s - j) * (n - j) * (p.N + j + 1 - n));
  }
  return c;
}

Eigen::VectorXd det_expansion(const SectorCoeffs& c) { return charpoly_desc(c.alpha, c.beta); }

Eigen::VectorXd minor_expansion(const SectorCoeffs& c, int j) {
  if (j < 0 || j >= c.dim) throw Error(ErrorCode::InvalidArgument, "minor index out of range");
  double prefactor = 1.0;
  for (int i = 0; i < j; ++i) prefactor *= c.beta(i);
  const int tail = c.dim - 1 - j;
  const Eigen::VectorXd e = charpoly_desc(c.alpha.tail(tail), c.beta.tail(std::max(tail - 1, 0)));
  Eigen::VectorXd out = Eigen::VectorXd::Zero(c.dim);
  out.segment(j, tail + 1) = prefactor * e;
  return out;
}

GenFuncPolys genfunc_polys(const SectorCoeffs& c) {
  GenFuncPolys g;
  g.d = det_expansion(c);
  for (int j = 0; j < c.dim; ++j) g.numers.push_back(minor_expansion(c, j));
  return g;
}

Eigen::VectorXd frequencies(const Eigen::VectorXd& d) {
  const Eigen::Index dim = d.size() - 1;
  if (dim < 1) throw Error(ErrorCode::InvalidArgument, "frequency polynomial of degree 0");
  const Polynomial poly(d.reverse());
  const RootResult rr = poly_roots(poly);
  Eigen::VectorXd omega(dim);
  double scale = 1.0;
  for (const cplx& r : rr.roots) scale = std::max(scale, std::abs(r));
  for (Eigen::Index l = 0; l < dim; ++l) {
    const cplx r = rr.roots[static_cast<std::size_t>(l)];
    if (std::abs(r.imag()) > 1e-8 * scale) {
      throw Error(ErrorCode::ComplexFrequency, "frequency with imaginary part " + std::to_string(r.imag()));
    }
    omega(l) = r.real();
  }
  std::sort(omega.data(), omega.data() + dim);
  return omega;
}

Eigen::MatrixXd residues(const std::vector<Eigen::VectorXd>& numers, const Eigen::VectorXd& omega) {
  const Eigen::Index dim = omega.size();
  const double scale = std::max(omega.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  for (Eigen::Index l = 1; l < dim; ++l) {
    if (omega(l) - omega(l - 1) < kDegenerateGap * scale) {
      throw Error(ErrorCode::DegenerateFrequencies, "frequency gap below threshold");
    }
  }
  Eigen::MatrixXd c(dim, dim);
  for (Eigen::Index l = 0; l < dim; ++l) {
    double denom = 1.0;
    for (Eigen::Index i = 0; i < dim; ++i)
      if (i != l) denom *= omega(l) - omega(i);
    for (Eigen::Index j = 0; j < dim; ++j) {
      const Eigen::VectorXd& nj = numers[static_cast<std::size_t>(j)];
      // Horner in omega_l over n_0 .. n_{dim-1}, highest power first.
      double acc = 0.0;
      for (Eigen::Index i = 0; i < dim; ++i) acc = acc * omega(l) + nj(i);
      c(j, l) = acc / denom;
    }
  }
  return c;
}

namespace {

ModeDecomposition spectral(const SectorCoeffs& sc) {
  const SymEigen eig = eig_sym_tridiag({sc.alpha, sc.beta});
  ModeDecomposition m;
  m.n = sc.n;
  m.omega = eig.values;
  m.c.resize(sc.dim, sc.dim);
  for (int l = 0; l < sc.dim; ++l)
    for (int j = 0; j < sc.dim; ++j) m.c(j, l) = eig.vectors(0, l) * eig.vectors(j, l);
  m.method = ModeMethod::Spectral;
  return m;
}

}  // namespace

ModeDecomposition decompose(const ModelParams& p, int n, ModeMethod method) {
  const SectorCoeffs sc = build_sector_coeffs(p, n);
  if (method == ModeMethod::Spectral) return spectral(sc);

  const GenFuncPolys g = genfunc_polys(sc);
  ModeDecomposition m;
  m.n = n;
  m.method = ModeMethod::Recipe;
  m.omega = frequencies(g.d);
  try {
    m.c = residues(g.numers, m.omega);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateFrequencies) throw;
    m = spectral(sc);
    m.fell_back = true;
  }
  return m;
}

double identity_sum_error(const ModeDecomposition& m) {
  Eigen::VectorXd sums = m.c.rowwise().sum();
  sums(0) -= 1.0;
  return sums.cwiseAbs().maxCoeff();
}

double identity_orthogonality_error(const ModeDecomposition& m) {
  Eigen::MatrixXd g = m.c.transpose() * m.c;
  g.diagonal() -= m.c.row(0).transpose();
  return g.cwiseAbs().maxCoeff();
}

RecurrenceResult recurrence_oracle(const ModelParams& p, int n, int kmax) {
  if (kmax < 0) throw Error(ErrorCode::InvalidArgument, "kmax must be non-negative");
  const SectorCoeffs sc = build_sector_coeffs(p, n);
  RecurrenceResult out;
  Eigen::VectorXd h = Eigen::VectorXd::Zero(sc.dim);
  h(0) = 1.0;
  out.h.push_back(h);
  for (int k = 0; k < kmax; ++k) {
    Eigen::VectorXd next = sc.alpha.cwiseProduct(h);
    for (int j = 0; j + 1 < sc.dim; ++j) {
      next(j) += sc.beta(j) * h(j + 1);
      next(j + 1) += sc.beta(j) * h(j);
    }
    if (!next.allFinite()) out.overflow = true;
    h = std::move(next);
    out.h.push_back(h);
  }
  return out;
}

Eigen::VectorXd moments(const ModeDecomposition& m, int k) {
  const Eigen::VectorXd powers = m.omega.array().pow(static_cast<double>(k)).matrix();
  return m.c * powers;
}

ModeCache ModeCache::build(const ModelParams& p, ModeMethod method) {
  p.validate();
  ModeCache cache;
  cache.params = p;
  cache.method = method;
  cache.sectors.reserve(static_cast<std::size_t>(p.N) + 1);
  for (int n = 0; n <= p.N; ++n) cache.sectors.push_back(decompose(p, n, method));
  return cache;
}

}  // namespace csm
