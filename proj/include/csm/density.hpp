#pragma once

#include <Eigen/Dense>

namespace csm {

/// Central-spin reduced density matrix, indexed by j with |s - j>.
struct ReducedDensity {
  Eigen::MatrixXcd rho;

  double trace() const { return rho.trace().real(); }
  double hermiticity_error() const { return (rho - rho.adjoint()).cwiseAbs().maxCoeff(); }
  /// Eigenvalues ascending.
  Eigen::VectorXd eigenvalues() const;

  /// Throws NumericFailure unless rho is Hermitian, unit-trace and positive
  /// semidefinite within the given tolerances.
  void validate(double herm_tol = 1e-12, double trace_tol = 1e-10, double psd_tol = 1e-10) const;
};

}  // namespace csm
