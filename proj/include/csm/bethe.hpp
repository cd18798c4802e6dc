#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "csm/core.hpp"
#include "csm/linalg.hpp"

namespace csm {

using RootSet = std::vector<cplx>;

/// One solution of the Bethe equations together with the parameters it solves.
struct BetheState {
  RootSet roots;
  int M = 0;
  std::variant<ModelParams, InhomModelParams> params;
  double residual_inf = 0.0;
  double energy = 0.0;
};

/// q(u) = prod_a (u - v_a) and the linear cofactor of P(u) = (a + b u) q(u).
struct QPolyState {
  Polynomial q;  // monic, degree M, monomial basis
  double a = 0.0;
  double b = 0.0;
};

inline constexpr double kPoleDistance = 1e-12;
inline constexpr double kSingularDistance = 1e-10;
inline constexpr double kRealEnergyTol = 1e-8;
/// Solvers also discard root sets containing a cluster of roots (within
/// kClusterRadius * max(1, max|v|) of a pole) whose centroid lies on the pole
/// to kClusterCentroidTol * max(1, max|v|).
inline constexpr double kClusterRadius = 0.2;
inline constexpr double kClusterCentroidTol = 1e-6;
/// Eigenvalues of the q-polynomial operator closer than this (relative) are
/// treated as one degenerate eigenvalue.
inline constexpr double kDegenerateEigenvalue = 1e-5;
/// Largest relative root movement allowed while polishing a q-polynomial root set.
inline constexpr double kPolishDrift = 1e-3;
/// Direct Newton discards roots beyond this multiple of the natural root scale.
inline constexpr double kEscapeRadius = 1e4;

// ---------------------------------------------------------------------------
// Residuals and energies

/// -2sB - 2s/(v_a-eps0) - sum_j 1/(v_a-eps_j) + 2 sum_{b!=a} 1/(v_a-v_b).
Eigen::VectorXcd residual_inhom(const RootSet& v, const InhomModelParams& p);

/// -2sB - 2s/v_a - N/(v_a + 1/(2sA)) + 2 sum_{b!=a} 1/(v_a-v_b).
Eigen::VectorXcd residual_hom(const RootSet& v, const ModelParams& p);

/// Analytic Jacobians d r_a / d v_b of the residuals above.
Eigen::MatrixXcd jacobian_inhom(const RootSet& v, const InhomModelParams& p);
Eigen::MatrixXcd jacobian_hom(const RootSet& v, const ModelParams& p);

cplx energy_inhom_complex(const RootSet& v, const InhomModelParams& p);
cplx energy_hom_complex(const RootSet& v, const ModelParams& p);

/// Real energies; throw NonRealEnergy when |Im E| exceeds kRealEnergyTol * max(1, |E|).
double energy_inhom(const RootSet& v, const InhomModelParams& p);
double energy_hom(const RootSet& v, const ModelParams& p);

/// True when some root lies within kSingularDistance of 0 or -1/(2sA).
bool has_singular_root(const RootSet& v, const ModelParams& p);

// ---------------------------------------------------------------------------
// Counting

/// sum_{k=0}^{floor(s)} (-1)^k C(2s-k, k) C(N+2s-2k, M-k).
std::int64_t count_solutions(HalfInt s, int N, int M);

/// m = N/2 + s - M.
HalfInt magnetization_of_M(HalfInt s, int N, int M);

// ---------------------------------------------------------------------------
// q-polynomial method (homogeneous model)

/// Matrix of q -> P(u) - b u q(u) on polynomials of degree <= M written in
/// the basis ((u - center)/scale)^k. The u^(M+1) coefficient vanishes
/// identically, so the q-polynomial condition is the eigenproblem
/// L q = (a + b center) q.
Eigen::MatrixXd qpoly_operator(const ModelParams& p, int M, double center = 0.0, double scale = 1.0);

/// P(u) built directly from q by polynomial arithmetic.
Polynomial qpoly_P(const ModelParams& p, const Polynomial& q);

/// max_k |P_k - ((a + b u) q)_k| / max_k |P_k|-scale.
double qpoly_defect(const ModelParams& p, const QPolyState& st);

struct QPolyOptions {
  int starts = 200;
  std::uint64_t seed = 42;
  double dedup = 1e-6;
  Tolerances tol;
};

struct QPolySolution {
  QPolyState qpoly;
  BetheState state;
};

struct HomSolveReport {
  std::vector<QPolySolution> solutions;  // ascending energy
  int candidates = 0;    // distinct (a, q) pairs examined
  int singular = 0;      // quarantined: a root at 0 or -1/(2sA)
  int inconsistent = 0;  // leading coefficient collapsed
  int rejected = 0;      // failed root validation
  int degenerate = 0;    // eigenvalue of L not simple
  std::int64_t expected_inhom = 0;  // count_solutions(s, N, M)
  int expected_top_sector = 0;      // dimension of (j = N/2, m) sector
};

/// Solves the homogeneous Bethe equations for M roots via the q-polynomial
/// identity. Throws NoSolutionFound when no candidate survives validation.
HomSolveReport solve_hom_qpoly(const ModelParams& p, int M, const QPolyOptions& opts = {});

// ---------------------------------------------------------------------------
// Direct Newton on the Bethe equations

struct DirectNewtonOptions {
  int starts = 200;
  std::uint64_t seed = 42;
  double dedup = 1e-6;
  Tolerances tol;
};

struct InhomSolveReport {
  std::vector<BetheState> states;  // ascending energy
  bool epsilons_distinct = true;   // false triggers the DegenerateEpsilons warning
  int attempts = 0;
  std::int64_t expected = 0;
};

/// Newton from random starts seeded next to the poles eps_0, ..., eps_N.
/// Throws NoSolutionFound when nothing converges.
InhomSolveReport solve_inhom_newton(const InhomModelParams& p, int M, const DirectNewtonOptions& opts = {});

/// Newton on the homogeneous equations from conjugate-symmetric random starts.
/// Returns whatever converged (possibly nothing).
std::vector<BetheState> solve_hom_newton(const ModelParams& p, int M, const DirectNewtonOptions& opts = {});

/// Largest distance between two root multisets after optimal greedy matching.
double root_set_distance(const RootSet& a, const RootSet& b);

/// Largest |v - conj(w)| pairing error of a root set with its conjugate.
double conjugate_pairing_error(const RootSet& v);

}  // namespace csm
