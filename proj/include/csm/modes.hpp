#pragma once

#include <vector>

#include <Eigen/Dense>

#include "csm/core.hpp"

namespace csm {

/// Tridiagonal block of the Dicke sector n: states |s, s-j> (x) |n-j>,
/// j = 0 .. dim-1 with dim = min(2s, n) + 1.
struct SectorCoeffs {
  int n = 0;
  int dim = 1;
  Eigen::VectorXd alpha;  // dim
  Eigen::VectorXd beta;   // dim - 1
};

SectorCoeffs build_sector_coeffs(const ModelParams& p, int n);

/// Expansion coefficients of the generating-function denominator and of the
/// first-row minors, both in descending powers of 1/z.
struct GenFuncPolys {
  Eigen::VectorXd d;                    // dim + 1, d(0) = 1
  std::vector<Eigen::VectorXd> numers;  // dim vectors of length dim
};

/// det(alpha - 1/z) = sum_l (-1)^dim z^-(dim-l) d_l, via the tridiagonal
/// three-term recurrence on polynomials in 1/z.
Eigen::VectorXd det_expansion(const SectorCoeffs& c);

/// Minor (0, j) = sum_l (-1)^(dim-1+j) z^-(dim-1-l) n_l.
Eigen::VectorXd minor_expansion(const SectorCoeffs& c, int j);

GenFuncPolys genfunc_polys(const SectorCoeffs& c);

/// Real roots of sum_i d_i z^(dim-i), ascending. Throws ComplexFrequency.
Eigen::VectorXd frequencies(const Eigen::VectorXd& d);

/// c[j][l] by partial fractions. Throws DegenerateFrequencies when two
/// frequencies are closer than kDegenerateGap * max|omega|.
Eigen::MatrixXd residues(const std::vector<Eigen::VectorXd>& numers, const Eigen::VectorXd& omega);

inline constexpr double kDegenerateGap = 1e-8;

enum class ModeMethod { Recipe, Spectral };

struct ModeDecomposition {
  int n = 0;
  Eigen::VectorXd omega;  // ascending
  Eigen::MatrixXd c;      // c(j, l)
  ModeMethod method = ModeMethod::Spectral;
  bool fell_back = false;  // recipe requested, spectral used

  int dim() const { return static_cast<int>(omega.size()); }
};

ModeDecomposition decompose(const ModelParams& p, int n, ModeMethod method = ModeMethod::Spectral);

/// max_j |sum_l c(j,l) - delta_j0|.
double identity_sum_error(const ModeDecomposition& m);
/// max_{l,l'} |sum_j c(j,l) c(j,l') - c(0,l) delta_ll'|.
double identity_orthogonality_error(const ModeDecomposition& m);

/// h^(k) for k = 0..kmax from h^(k+1) = T h^(k), h^(0) = e_0.
struct RecurrenceResult {
  std::vector<Eigen::VectorXd> h;
  bool overflow = false;
};

RecurrenceResult recurrence_oracle(const ModelParams& p, int n, int kmax);

/// h_j^(k) = sum_l c(j,l) omega_l^k.
Eigen::VectorXd moments(const ModeDecomposition& m, int k);

/// Decompositions for n = 0..N, built once.
struct ModeCache {
  ModelParams params;
  ModeMethod method = ModeMethod::Spectral;
  std::vector<ModeDecomposition> sectors;

  static ModeCache build(const ModelParams& p, ModeMethod method = ModeMethod::Spectral);
};

}  // namespace csm
