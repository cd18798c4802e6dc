#include "csm/sector_spectrum.hpp"

#include <algorithm>
#include <cmath>

#include "csm/error.hpp"
#include "csm/linalg.hpp"

namespace csm {

double mu(HalfInt m_s, HalfInt m_j, const ModelParams& p) {
  const double ms = m_s.to_double();
  return p.B * ms + 2.0 * p.A * ms * m_j.to_double();
}

double nu(HalfInt m_s, HalfInt m_j, HalfInt s, HalfInt j, double A) {
  // All factors are integers in units of 1/2; work with twice-values.
  const long f1 = (s - m_s).twice() + 2;
  const long f2 = (s + m_s).twice();
  const long f3 = (j + m_j).twice() + 2;
  const long f4 = (j - m_j).twice();
  if (f1 == 0 || f2 == 0 || f3 == 0 || f4 == 0) return 0.0;
  const long prod = f1 * f2 * f3 * f4;
  if (prod < 0) {
    throw Error(ErrorCode::InvalidArgument, "nu evaluated at an out-of-range transition (m_s = " + m_s.to_string() +
                                                ", m_j = " + m_j.to_string() + ")");
  }
  return A * std::sqrt(static_cast<double>(prod) / 16.0);
}

SectorBlock build_sector(const ModelParams& p, SectorKey key) {
  p.validate();
  if (key.j.twice() < 0) throw Error(ErrorCode::InvalidArgument, "bath spin j must be non-negative");
  const int d = sector_dimension(p.s, key);

  SectorBlock block;
  block.key = key;
  const int ms_hi = std::min(p.s.twice(), (key.m + key.j).twice());
  for (int i = 0; i < d; ++i) {
    const HalfInt m_s = HalfInt::from_twice(ms_hi - 2 * i);
    block.basis.emplace_back(m_s, key.m - m_s);
  }

  SymTridiag t;
  t.diag.resize(d);
  t.offdiag.resize(d - 1);
  for (int i = 0; i < d; ++i) t.diag(i) = mu(block.basis[i].first, block.basis[i].second, p);
  for (int i = 0; i + 1 < d; ++i) {
    t.offdiag(i) = nu(block.basis[i].first, block.basis[i].second, p.s, key.j, p.A);
  }
  block.matrix = t.dense();
  const SymEigen eig = eig_sym_tridiag(t);
  block.energies = eig.values;
  block.weights = eig.vectors;
  return block;
}

std::vector<Level> full_spectrum(const ModelParams& p) {
  p.validate();
  std::vector<Level> out;
  auto spins = allowed_bath_spins(p.N);
  std::reverse(spins.begin(), spins.end());
  for (HalfInt j : spins) {
    const std::int64_t mult = bath_spin_multiplicity(p.N, j);
    const HalfInt top = j + p.s;
    for (HalfInt m = top; m >= -top; m -= HalfInt::from_int(1)) {
      const SectorBlock block = build_sector(p, {j, m});
      for (Eigen::Index k = 0; k < block.energies.size(); ++k) {
        out.push_back({j, m, block.energies(k), mult});
      }
    }
  }
  return out;
}

std::vector<double> expand_levels(const std::vector<Level>& levels) {
  std::vector<double> out;
  for (const Level& l : levels) out.insert(out.end(), static_cast<std::size_t>(l.multiplicity), l.energy);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace csm
