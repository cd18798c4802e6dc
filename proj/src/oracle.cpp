#include "csm/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>

#include <Eigen/Eigenvalues>

#include "csm/error.hpp"

namespace csm {

namespace {

Eigen::Index checked_dim(HalfInt s, int N) {
  if (N < 1 || N > 30) throw Error(ErrorCode::DimensionGuard, "oracle bath size out of range");
  const Eigen::Index dim = static_cast<Eigen::Index>(s.twice() + 1) << N;
  if (dim > kDenseDimGuard) {
    throw Error(ErrorCode::DimensionGuard,
                "dense oracle dimension " + std::to_string(dim) + " exceeds " + std::to_string(kDenseDimGuard));
  }
  return dim;
}

// S^+ |s, m> = sqrt((s-m)(s+m+1)) |s, m+1>, with m = s - c (c is the row index).
double raise_amp(int twice_s, int c) {
  const double s = 0.5 * twice_s;
  const double m = s - c;
  return std::sqrt((s - m) * (s + m + 1.0));
}

DenseModel assemble(HalfInt s, int N, double B, const std::vector<double>& couplings) {
  const Eigen::Index dim = checked_dim(s, N);
  const int d0 = s.twice() + 1;
  DenseModel dm{s, N, Eigen::MatrixXd::Zero(dim, dim)};
  for (Eigen::Index idx = 0; idx < dim; ++idx) {
    const int c = static_cast<int>(idx % d0);
    const Eigen::Index bits = idx / d0;
    const double ms = s.to_double() - c;
    double diag = B * ms;
    for (int i = 0; i < N; ++i) {
      const bool down = (bits >> i) & 1;
      diag += 2.0 * couplings[i] * ms * (down ? -0.5 : 0.5);
      // A_i S0^+ s_i^-: bath spin i goes up -> down, central m_s -> m_s + 1.
      if (!down && c > 0) {
        const Eigen::Index target = (c - 1) + d0 * (bits | (Eigen::Index{1} << i));
        const double amp = couplings[i] * raise_amp(s.twice(), c);
        dm.H(target, idx) += amp;
        dm.H(idx, target) += amp;
      }
    }
    dm.H(idx, idx) = diag;
  }
  return dm;
}

}  // namespace

DenseModel build_dense(const ModelParams& p) {
  p.validate();
  return assemble(p.s, p.N, p.B, std::vector<double>(static_cast<std::size_t>(p.N), p.A));
}

DenseModel build_dense(const InhomModelParams& p) {
  p.validate();
  return assemble(p.s, p.N, p.B, p.couplings());
}

Eigen::VectorXi total_sz_twice(HalfInt s, int N) {
  const Eigen::Index dim = checked_dim(s, N);
  const int d0 = s.twice() + 1;
  Eigen::VectorXi out(dim);
  for (Eigen::Index idx = 0; idx < dim; ++idx) {
    const int c = static_cast<int>(idx % d0);
    const auto bits = static_cast<unsigned long long>(idx / d0);
    const int down = std::popcount(bits);
    out(idx) = (s.twice() - 2 * c) + (N - down) - down;
  }
  return out;
}

Eigen::MatrixXd total_sz_matrix(HalfInt s, int N) {
  return (0.5 * total_sz_twice(s, N).cast<double>()).asDiagonal();
}

namespace {

// Bath operators J^z and J^+ on the full product space.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> bath_jz_jplus(HalfInt s, int N) {
  const Eigen::Index dim = checked_dim(s, N);
  const int d0 = s.twice() + 1;
  Eigen::MatrixXd jz = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::MatrixXd jp = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index idx = 0; idx < dim; ++idx) {
    const Eigen::Index bits = idx / d0;
    const int c = static_cast<int>(idx % d0);
    for (int i = 0; i < N; ++i) {
      const bool down = (bits >> i) & 1;
      jz(idx, idx) += down ? -0.5 : 0.5;
      if (down) jp(c + d0 * (bits & ~(Eigen::Index{1} << i)), idx) += 1.0;
    }
  }
  return {jz, jp};
}

}  // namespace

Eigen::MatrixXd bath_spin_squared(HalfInt s, int N) {
  auto [jz, jp] = bath_jz_jplus(s, N);
  const Eigen::MatrixXd jm = jp.transpose();
  return jz * jz + 0.5 * (jp * jm + jm * jp);
}

Eigen::MatrixXd central_spin_squared(HalfInt s, int N) {
  const Eigen::Index dim = checked_dim(s, N);
  // Built from ladder operators so the commutator check is not vacuous.
  const int d0 = s.twice() + 1;
  Eigen::MatrixXd sz = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::MatrixXd sp = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index idx = 0; idx < dim; ++idx) {
    const int c = static_cast<int>(idx % d0);
    sz(idx, idx) = s.to_double() - c;
    if (c > 0) sp(idx - 1, idx) = raise_amp(s.twice(), c);
  }
  const Eigen::MatrixXd sm = sp.transpose();
  return sz * sz + 0.5 * (sp * sm + sm * sp);
}

DenseSpectrum diagonalize(const DenseModel& dm) {
  const Eigen::VectorXi sz = total_sz_twice(dm.s, dm.N);
  std::map<int, std::vector<Eigen::Index>, std::greater<>> groups;
  for (Eigen::Index i = 0; i < sz.size(); ++i) groups[sz(i)].push_back(i);

  DenseSpectrum out;
  out.dim = dm.dim();
  for (auto& [twice_m, indices] : groups) {
    const auto n = static_cast<Eigen::Index>(indices.size());
    Eigen::MatrixXd block(n, n);
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = 0; b < n; ++b) block(a, b) = dm.H(indices[a], indices[b]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(block);
    if (solver.info() != Eigen::Success) throw Error(ErrorCode::NumericFailure, "dense block eigensolver failed");
    out.blocks.push_back({std::move(indices), solver.eigenvalues(), solver.eigenvectors()});
  }
  return out;
}

std::vector<double> exact_spectrum(const DenseSpectrum& spec) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(spec.dim));
  for (const auto& b : spec.blocks) out.insert(out.end(), b.values.begin(), b.values.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> exact_spectrum(const DenseModel& dm) { return exact_spectrum(diagonalize(dm)); }

Eigen::VectorXcd exact_evolve(const DenseSpectrum& spec, const Eigen::VectorXcd& psi0, double t) {
  if (psi0.size() != spec.dim) throw Error(ErrorCode::InvalidArgument, "state dimension mismatch");
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(spec.dim);
  for (const auto& b : spec.blocks) {
    const auto n = static_cast<Eigen::Index>(b.indices.size());
    Eigen::VectorXcd local(n);
    for (Eigen::Index a = 0; a < n; ++a) local(a) = psi0(b.indices[a]);
    if (local.cwiseAbs().maxCoeff() == 0.0) continue;
    Eigen::VectorXcd coeff = b.vectors.transpose().cast<std::complex<double>>() * local;
    for (Eigen::Index k = 0; k < n; ++k) coeff(k) *= std::polar(1.0, -t * b.values(k));
    local = b.vectors.cast<std::complex<double>>() * coeff;
    for (Eigen::Index a = 0; a < n; ++a) out(b.indices[a]) = local(a);
  }
  return out;
}

ReducedDensity partial_trace_bath(const Eigen::VectorXcd& psi, HalfInt s, int N) {
  const Eigen::Index dim = checked_dim(s, N);
  if (psi.size() != dim) throw Error(ErrorCode::InvalidArgument, "state dimension mismatch");
  const int d0 = s.twice() + 1;
  // Reshape as central x bath; rho = Psi Psi^dagger.
  const Eigen::Map<const Eigen::MatrixXcd> mat(psi.data(), d0, dim / d0);
  return ReducedDensity{mat * mat.adjoint()};
}

Eigen::VectorXcd coherent_product_state(HalfInt s, int N, double theta) {
  const Eigen::Index dim = checked_dim(s, N);
  const int d0 = s.twice() + 1;
  const double up = std::cos(0.5 * theta);
  const double dn = std::sin(0.5 * theta);
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(dim);
  for (Eigen::Index bits = 0; bits < dim / d0; ++bits) {
    const int k = std::popcount(static_cast<unsigned long long>(bits));
    psi(d0 * bits) = std::pow(up, N - k) * std::pow(dn, k);
  }
  return psi;
}

Eigen::MatrixXcd dicke_amplitudes(const Eigen::VectorXcd& psi, HalfInt s, int N) {
  const Eigen::Index dim = checked_dim(s, N);
  const int d0 = s.twice() + 1;
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(d0, N + 1);
  for (Eigen::Index bits = 0; bits < dim / d0; ++bits) {
    const int k = std::popcount(static_cast<unsigned long long>(bits));
    for (int c = 0; c < d0; ++c) out(c, k) += psi(c + d0 * bits);
  }
  for (int k = 0; k <= N; ++k) out.col(k) /= std::sqrt(static_cast<double>(binomial(N, k)));
  return out;
}

OracleObservables oracle_observables(const Eigen::VectorXcd& psi0, const Eigen::VectorXcd& psi, HalfInt s, int N) {
  OracleObservables o;
  o.norm = psi.squaredNorm();
  const ReducedDensity rd = partial_trace_bath(psi, s, N);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(rd.rho, Eigen::EigenvaluesOnly);
  for (double lam : solver.eigenvalues()) {
    const double l = std::clamp(lam, 0.0, 1.0);
    if (l > 0.0) o.entropy -= l * std::log(l);
    o.purity += lam * lam;
  }
  const int d0 = s.twice() + 1;
  std::complex<double> sminus(0.0);
  for (int c = 0; c < d0; ++c) {
    o.sz += (s.to_double() - c) * rd.rho(c, c).real();
    if (c + 1 < d0) sminus += std::sqrt((c + 1.0) * (s.twice() - c)) * rd.rho(c, c + 1);
  }
  o.sminus2 = std::norm(sminus);
  o.loschmidt = std::norm(psi0.dot(psi));
  return o;
}

}  // namespace csm
