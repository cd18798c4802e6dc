#pragma once

#include <vector>

#include <Eigen/Dense>

#include "csm/core.hpp"
#include "csm/density.hpp"

namespace csm {

/// Dense Hamiltonian on the full (2s+1) 2^N product space.
///
/// Basis index = c + (2s+1) * bits, where c = 0..2s labels |s, s-c> of the
/// central spin and bit i of `bits` is 1 when bath spin i+1 points down
/// (little-endian; central index fastest-varying).
struct DenseModel {
  HalfInt s;
  int N = 0;
  Eigen::MatrixXd H;

  Eigen::Index dim() const { return H.rows(); }
  int central_dim() const { return s.twice() + 1; }
};

inline constexpr Eigen::Index kDenseDimGuard = 65536;

DenseModel build_dense(const ModelParams& p);
DenseModel build_dense(const InhomModelParams& p);

/// Twice the total S^z of every basis state.
Eigen::VectorXi total_sz_twice(HalfInt s, int N);

/// Dense operators for the symmetry checks.
Eigen::MatrixXd total_sz_matrix(HalfInt s, int N);
Eigen::MatrixXd bath_spin_squared(HalfInt s, int N);
Eigen::MatrixXd central_spin_squared(HalfInt s, int N);

/// Eigendecomposition of a dense model. H commutes with total S^z, so the
/// product basis is split into S^z blocks and each block is diagonalized
/// densely; this is exact, not an approximation.
struct DenseSpectrum {
  struct Block {
    std::vector<Eigen::Index> indices;
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
  };
  Eigen::Index dim = 0;
  std::vector<Block> blocks;
};

DenseSpectrum diagonalize(const DenseModel& dm);

/// Sorted eigenvalues of the full Hamiltonian.
std::vector<double> exact_spectrum(const DenseModel& dm);
std::vector<double> exact_spectrum(const DenseSpectrum& spec);

/// V exp(-i Lambda t) V^T psi0.
Eigen::VectorXcd exact_evolve(const DenseSpectrum& spec, const Eigen::VectorXcd& psi0, double t);

/// Traces out the bath from a state in the product basis.
ReducedDensity partial_trace_bath(const Eigen::VectorXcd& psi, HalfInt s, int N);

/// |s, s> (x) |theta> in the product basis.
Eigen::VectorXcd coherent_product_state(HalfInt s, int N, double theta);

/// Amplitudes <s, s-j| (x) <Dicke k| psi as a (2s+1) x (N+1) matrix.
Eigen::MatrixXcd dicke_amplitudes(const Eigen::VectorXcd& psi, HalfInt s, int N);

/// Observables evaluated directly from a product-basis state.
struct OracleObservables {
  double norm = 0.0;
  double entropy = 0.0;
  double purity = 0.0;
  double sz = 0.0;
  double sminus2 = 0.0;
  double loschmidt = 0.0;
};

OracleObservables oracle_observables(const Eigen::VectorXcd& psi0, const Eigen::VectorXcd& psi, HalfInt s, int N);

}  // namespace csm
