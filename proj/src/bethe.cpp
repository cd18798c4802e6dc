#include "csm/bethe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>

#include "csm/error.hpp"

namespace csm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double pole_offset(const ModelParams& p) {
  // Second pole of the homogeneous equations sits at -1/(2sA).
  return 1.0 / (p.s.twice() * p.A);
}

void require_hom_params(const ModelParams& p) {
  p.validate();
  if (p.A == 0.0) throw Error(ErrorCode::InvalidArgument, "homogeneous Bethe equations need A != 0");
}

void require_M(HalfInt s, int N, int M) {
  if (M < 0 || M > N + s.twice()) {
    throw Error(ErrorCode::InvalidArgument,
                "M = " + std::to_string(M) + " outside 0.." + std::to_string(N + s.twice()));
  }
}

double min_pair_distance(const RootSet& v) {
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < v.size(); ++a)
    for (std::size_t b = a + 1; b < v.size(); ++b) d = std::min(d, std::abs(v[a] - v[b]));
  return d;
}

// Residual of the Bethe equations against an arbitrary list of (pole, weight)
// pairs: -2sB - sum_poles w/(v_a - pole) + 2 sum_{b!=a} 1/(v_a - v_b).
// Collisions yield NaN so damped Newton backs off instead of throwing.
template <typename Poles>
Eigen::VectorXcd raw_residual(const RootSet& v, double field, const Poles& poles) {
  const auto M = static_cast<Eigen::Index>(v.size());
  Eigen::VectorXcd r(M);
  for (Eigen::Index a = 0; a < M; ++a) {
    cplx acc(field);
    for (const auto& [pole, weight] : poles) acc -= weight / (v[a] - pole);
    for (Eigen::Index b = 0; b < M; ++b)
      if (b != a) acc += 2.0 / (v[a] - v[b]);
    if (!std::isfinite(acc.real()) || !std::isfinite(acc.imag())) acc = cplx(kNaN, kNaN);
    r(a) = acc;
  }
  return r;
}

template <typename Poles>
Eigen::MatrixXcd raw_jacobian(const RootSet& v, const Poles& poles) {
  const auto M = static_cast<Eigen::Index>(v.size());
  Eigen::MatrixXcd J = Eigen::MatrixXcd::Zero(M, M);
  for (Eigen::Index a = 0; a < M; ++a) {
    cplx diag(0.0);
    for (const auto& [pole, weight] : poles) diag += weight / ((v[a] - pole) * (v[a] - pole));
    for (Eigen::Index b = 0; b < M; ++b) {
      if (b == a) continue;
      const cplx inv2 = 1.0 / ((v[a] - v[b]) * (v[a] - v[b]));
      diag -= 2.0 * inv2;
      J(a, b) = 2.0 * inv2;
    }
    J(a, a) = diag;
  }
  return J;
}

std::vector<std::pair<double, double>> hom_poles(const ModelParams& p) {
  return {{0.0, static_cast<double>(p.s.twice())}, {-pole_offset(p), static_cast<double>(p.N)}};
}

std::vector<std::pair<double, double>> inhom_poles(const InhomModelParams& p) {
  std::vector<std::pair<double, double>> poles{{p.eps0, static_cast<double>(p.s.twice())}};
  for (double e : p.eps) poles.emplace_back(e, 1.0);
  return poles;
}

// Roots drifting off to infinity shrink every residual term without solving
// anything; a genuine root sits within the scale set by the poles and by
// (total pole weight) / |field|.
bool escaped(const RootSet& v, const std::vector<std::pair<double, double>>& poles, double field) {
  double reach = 0.0, weight = 0.0;
  for (const auto& pw : poles) {
    reach = std::max(reach, std::abs(pw.first));
    weight += pw.second;
  }
  double radius = kEscapeRadius * (1.0 + reach);
  if (field != 0.0) radius += kEscapeRadius * (weight + 2.0 * static_cast<double>(v.size())) / std::abs(field);
  return std::any_of(v.begin(), v.end(), [&](const cplx& x) { return std::abs(x) > radius; });
}

void check_collisions(const RootSet& v, const std::vector<std::pair<double, double>>& poles) {
  for (const cplx& x : v) {
    for (const auto& pw : poles) {
      if (std::abs(x - pw.first) < kPoleDistance) {
        throw Error(ErrorCode::PoleCollision, "Bethe root within 1e-12 of pole " + std::to_string(pw.first));
      }
    }
  }
  if (min_pair_distance(v) < kPoleDistance) throw Error(ErrorCode::PoleCollision, "coincident Bethe roots");
}

RootSet to_roots(const Eigen::VectorXcd& x) { return RootSet(x.data(), x.data() + x.size()); }

Eigen::VectorXcd to_vector(const RootSet& v) {
  Eigen::VectorXcd x(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) x(static_cast<Eigen::Index>(i)) = v[i];
  return x;
}

double real_or_throw(cplx e) {
  if (std::abs(e.imag()) > kRealEnergyTol * std::max(1.0, std::abs(e.real()))) {
    throw Error(ErrorCode::NonRealEnergy, "energy has imaginary part " + std::to_string(e.imag()));
  }
  return e.real();
}

// A root of multiplicity k at a pole splits under roundoff into a cluster of
// radius ~eps^(1/k), far outside kSingularDistance, while the cluster
// centroid stays on the pole.
bool near_pole_cluster(const RootSet& v, const ModelParams& p) {
  double scale = 1.0;
  for (const cplx& x : v) scale = std::max(scale, std::abs(x));
  for (const double pole : {0.0, -pole_offset(p)}) {
    cplx sum(0.0);
    int k = 0;
    for (const cplx& x : v) {
      if (std::abs(x - pole) < kClusterRadius * scale) {
        sum += x;
        ++k;
      }
    }
    if (k > 0 && std::abs(sum / static_cast<double>(k) - pole) < kClusterCentroidTol * scale) return true;
  }
  return false;
}

void sort_roots(RootSet& v) {
  std::sort(v.begin(), v.end(), [](const cplx& a, const cplx& b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
}

}  // namespace

// ---------------------------------------------------------------------------

Eigen::VectorXcd residual_inhom(const RootSet& v, const InhomModelParams& p) {
  p.validate();
  const auto poles = inhom_poles(p);
  check_collisions(v, poles);
  return raw_residual(v, -p.s.twice() * p.B, poles);
}

Eigen::VectorXcd residual_hom(const RootSet& v, const ModelParams& p) {
  require_hom_params(p);
  const auto poles = hom_poles(p);
  check_collisions(v, poles);
  return raw_residual(v, -p.s.twice() * p.B, poles);
}

Eigen::MatrixXcd jacobian_inhom(const RootSet& v, const InhomModelParams& p) {
  return raw_jacobian(v, inhom_poles(p));
}

Eigen::MatrixXcd jacobian_hom(const RootSet& v, const ModelParams& p) { return raw_jacobian(v, hom_poles(p)); }

cplx energy_inhom_complex(const RootSet& v, const InhomModelParams& p) {
  cplx e(p.s.to_double() * p.B);
  for (double eps : p.eps) e += 0.5 / (p.eps0 - eps);
  for (const cplx& x : v) e += 1.0 / (x - p.eps0);
  return e;
}

cplx energy_hom_complex(const RootSet& v, const ModelParams& p) {
  cplx e(p.s.to_double() * (p.B + p.N * p.A));
  for (const cplx& x : v) e += 1.0 / x;
  return e;
}

double energy_inhom(const RootSet& v, const InhomModelParams& p) { return real_or_throw(energy_inhom_complex(v, p)); }

double energy_hom(const RootSet& v, const ModelParams& p) { return real_or_throw(energy_hom_complex(v, p)); }

bool has_singular_root(const RootSet& v, const ModelParams& p) {
  const double c = pole_offset(p);
  return std::any_of(v.begin(), v.end(), [c](const cplx& x) {
    return std::abs(x) < kSingularDistance || std::abs(x + c) < kSingularDistance;
  });
}

std::int64_t count_solutions(HalfInt s, int N, int M) {
  require_M(s, N, M);
  const int two_s = s.twice();
  std::int64_t total = 0;
  for (int k = 0; k <= s.floor(); ++k) {
    const std::int64_t term = binomial(two_s - k, k) * binomial(N + two_s - 2 * k, M - k);
    total += (k % 2 == 0) ? term : -term;
  }
  return total;
}

HalfInt magnetization_of_M(HalfInt s, int N, int M) {
  require_M(s, N, M);
  return HalfInt::from_twice(N + s.twice() - 2 * M);
}

double root_set_distance(const RootSet& a, const RootSet& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  std::vector<bool> used(b.size(), false);
  double worst = 0.0;
  for (const cplx& x : a) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t i = 0; i < b.size(); ++i) {
      if (used[i]) continue;
      const double d = std::abs(x - b[i]);
      if (d < best) {
        best = d;
        arg = i;
      }
    }
    used[arg] = true;
    worst = std::max(worst, best);
  }
  return worst;
}

double conjugate_pairing_error(const RootSet& v) {
  RootSet conj(v.size());
  std::transform(v.begin(), v.end(), conj.begin(), [](const cplx& x) { return std::conj(x); });
  return root_set_distance(v, conj);
}

// ---------------------------------------------------------------------------
// q-polynomial method

Eigen::MatrixXd qpoly_operator(const ModelParams& p, int M, double center, double scale) {
  require_hom_params(p);
  require_M(p.s, p.N, M);
  const double two_s = p.s.twice();
  const double c = pole_offset(p);
  const double B = p.B;
  const double N = p.N;
  const double u0 = center;
  const double R = scale;

  // Coefficients of u(u+c) and of the q' prefactor after u = u0 + R w,
  // divided by R^2 and R respectively.
  const double a1 = (2.0 * u0 + c) / R;
  const double a0 = u0 * (u0 + c) / (R * R);
  const double b2 = -two_s * B * R;
  const double b1 = -two_s * B * (2.0 * u0 + c) - (two_s + N);
  const double b0 = (-two_s * B * u0 * (u0 + c) - (two_s + N) * u0 - two_s * c) / R;
  const double b_lin = -two_s * B * M * R;  // b u -> b (u0 + R w); the b u0 part moves into the eigenvalue

  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(M + 1, M + 1);
  for (int k = 0; k <= M; ++k) {
    const double kk = k;
    if (k + 1 <= M) L(k + 1, k) = kk * b2 - b_lin;
    L(k, k) = kk * (kk - 1.0) + kk * b1;
    if (k >= 1) L(k - 1, k) = kk * (kk - 1.0) * a1 + kk * b0;
    if (k >= 2) L(k - 2, k) = kk * (kk - 1.0) * a0;
  }
  return L;
}

namespace {

Eigen::VectorXd poly_mul(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(x.size() + y.size() - 1);
  for (Eigen::Index i = 0; i < x.size(); ++i)
    for (Eigen::Index j = 0; j < y.size(); ++j) out(i + j) += x(i) * y(j);
  return out;
}

Eigen::VectorXd padded(const Eigen::VectorXd& x, Eigen::Index n) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  out.head(std::min(n, x.size())) = x.head(std::min(n, x.size()));
  return out;
}

}  // namespace

Polynomial qpoly_P(const ModelParams& p, const Polynomial& q) {
  require_hom_params(p);
  const double two_s = p.s.twice();
  const double c = pole_offset(p);
  const Eigen::VectorXd d1 = q.derivative().coeffs;
  const Eigen::VectorXd d2 = q.derivative().derivative().coeffs;
  const Eigen::VectorXd u_upc = (Eigen::VectorXd(3) << 0.0, c, 1.0).finished();  // u (u + c)
  const Eigen::VectorXd upc = (Eigen::VectorXd(2) << c, 1.0).finished();         // u + c
  const Eigen::VectorXd u = (Eigen::VectorXd(2) << 0.0, 1.0).finished();

  const Eigen::Index n = q.coeffs.size() + 1;  // degree M + 1
  Eigen::VectorXd P = padded(poly_mul(u_upc, d2), n);
  P -= two_s * p.B * padded(poly_mul(u_upc, d1), n);
  P -= two_s * padded(poly_mul(upc, d1), n);
  P -= static_cast<double>(p.N) * padded(poly_mul(u, d1), n);
  return Polynomial(P);
}

double qpoly_defect(const ModelParams& p, const QPolyState& st) {
  const Polynomial P = qpoly_P(p, st.q);
  const Eigen::Index n = P.coeffs.size();
  const Eigen::VectorXd lin = (Eigen::VectorXd(2) << st.a, st.b).finished();
  const Eigen::VectorXd rhs = padded(poly_mul(lin, st.q.coeffs), n);
  const double scale = std::max({P.coeffs.cwiseAbs().maxCoeff(), rhs.cwiseAbs().maxCoeff(), 1e-300});
  return (P.coeffs - rhs).cwiseAbs().maxCoeff() / scale;
}

namespace {

struct Candidate {
  double a = 0.0;
  Eigen::VectorXd q;  // monomial basis, q(M) = 1
};

Eigen::VectorXd normalized_direction(const Eigen::VectorXd& q) {
  Eigen::VectorXd n = q / q.cwiseAbs().maxCoeff();
  // Fix the overall sign by the leading coefficient.
  if (n(n.size() - 1) < 0.0) n = -n;
  return n;
}

bool is_duplicate(const std::vector<Candidate>& seen, const Candidate& c, double dedup) {
  const Eigen::VectorXd nc = normalized_direction(c.q);
  for (const Candidate& s : seen) {
    if (std::abs(s.a - c.a) > dedup * std::max(1.0, std::abs(c.a))) continue;
    if ((normalized_direction(s.q) - nc).cwiseAbs().maxCoeff() < dedup) return true;
  }
  return false;
}

// Eigenvector of L for eigenvalue `lambda`, by inverse iteration.
Eigen::VectorXd inverse_iteration(const Eigen::MatrixXd& L, double lambda) {
  const Eigen::Index n = L.rows();
  const double norm = std::max(1.0, L.cwiseAbs().maxCoeff());
  const double shift = lambda + 64.0 * std::numeric_limits<double>::epsilon() * norm;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(L - shift * Eigen::MatrixXd::Identity(n, n));
  Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
  for (int it = 0; it < 4; ++it) {
    x = lu.solve(x);
    const double m = x.cwiseAbs().maxCoeff();
    if (!std::isfinite(m) || m == 0.0) return Eigen::VectorXd();
    x /= m;
  }
  return x;
}

struct ExtractedRoots {
  RootSet roots;
  bool degree_ok = true;
};

// Roots of the eigenvector polynomial for eigenvalue a, computed in a basis
// centred on the root centroid and scaled by the root spread. Root sets that
// lie on an arc are badly conditioned in the plain monomial basis.
ExtractedRoots extract_roots(const ModelParams& p, int M, const Candidate& cand, const Tolerances& tol) {
  ExtractedRoots out;
  if (M == 0) return out;
  const double b = -p.s.twice() * p.B * M;
  double center = -cand.q(M - 1) / M;
  double scale = 1.0;
  {
    // Initial spread estimate from the monomial coefficients:
    // sum (v - center)^2 = (sum v)^2 - 2 e2 - 2 center sum v + M center^2.
    const double e1 = -cand.q(M - 1);
    const double e2 = M >= 2 ? cand.q(M - 2) : 0.0;
    const double second = e1 * e1 - 2.0 * e2 - 2.0 * center * e1 + M * center * center;
    scale = std::max(std::sqrt(std::abs(second) / M), 1e-3);
  }
  for (int pass = 0; pass < 3; ++pass) {
    const Eigen::MatrixXd L = qpoly_operator(p, M, center, scale);
    const Eigen::VectorXd w = inverse_iteration(L, cand.a + b * center);
    if (w.size() == 0 || std::abs(w(M)) < 1e-12 * w.cwiseAbs().maxCoeff()) {
      out.degree_ok = false;
      return out;
    }
    const RootResult rr = poly_roots(Polynomial(w / w(M)), tol.root);
    out.roots.clear();
    double mean = 0.0;
    for (const cplx& r : rr.roots) {
      out.roots.push_back(center + scale * r);
      mean += out.roots.back().real();
    }
    mean /= M;
    double spread = 0.0;
    for (const cplx& r : out.roots) spread += std::norm(r - mean);
    center = mean;
    scale = std::max(std::sqrt(spread / M), 1e-3);
  }
  return out;
}

std::vector<Candidate> eigen_candidates(const ModelParams& p, int M, int& inconsistent, Eigen::VectorXcd& spectrum) {
  Eigen::MatrixXd L = qpoly_operator(p, M);
  Eigen::MatrixXd balanced = L;
  balance(balanced);
  Eigen::EigenSolver<Eigen::MatrixXd> solver(balanced, false);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::NumericFailure, "q-polynomial eigensolver failed");
  spectrum = solver.eigenvalues();
  std::vector<Candidate> out;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
    const cplx lam = solver.eigenvalues()(i);
    if (std::abs(lam.imag()) > 1e-8 * std::max(1.0, std::abs(lam.real()))) continue;
    Eigen::VectorXd q = inverse_iteration(L, lam.real());
    // Monomial coefficients of a genuine q span R^M for roots of size R, so
    // the degree is judged later in the centred, scaled basis.
    if (q.size() == 0 || q(M) == 0.0 || !(q / q(M)).allFinite()) {
      ++inconsistent;
      continue;
    }
    out.push_back({lam.real(), q / q(M)});
  }
  return out;
}

// Damped Newton on the coefficient equations (L - a) q = 0 with q monic,
// unknowns (a, q_0, ..., q_{M-1}).
std::vector<Candidate> random_start_candidates(const ModelParams& p, int M, const QPolyOptions& opts) {
  std::vector<Candidate> out;
  if (M == 0 || opts.starts <= 0) return out;
  const Eigen::MatrixXd L = qpoly_operator(p, M);
  const double S = std::max(1.0, L.cwiseAbs().maxCoeff());
  auto unpack = [M](const Eigen::VectorXd& x) {
    Eigen::VectorXd q(M + 1);
    q.head(M) = x.tail(M);
    q(M) = 1.0;
    return q;
  };
  auto residual = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    const Eigen::VectorXd q = unpack(x);
    return (L * q - x(0) * q) / S;
  };
  auto jacobian = [&](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
    const Eigen::VectorXd q = unpack(x);
    Eigen::MatrixXd J(M + 1, M + 1);
    J.col(0) = -q / S;
    for (int k = 0; k < M; ++k) {
      J.col(k + 1) = L.col(k) / S;
      J(k, k + 1) -= x(0) / S;
    }
    return J;
  };

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> uni(-2.0, 2.0);
  NewtonOptions nopts;
  nopts.tol = opts.tol.newton;
  for (int start = 0; start < opts.starts; ++start) {
    Eigen::VectorXd x0(M + 1);
    for (Eigen::Index i = 0; i <= M; ++i) x0(i) = uni(rng);
    const auto res = newton_solve<double>(residual, jacobian, x0, nopts);
    if (!res.converged()) continue;
    Candidate c{res.x(0), unpack(res.x)};
    if (!is_duplicate(out, c, opts.dedup)) out.push_back(std::move(c));
  }
  return out;
}

}  // namespace

HomSolveReport solve_hom_qpoly(const ModelParams& p, int M, const QPolyOptions& opts) {
  require_hom_params(p);
  require_M(p.s, p.N, M);

  HomSolveReport report;
  report.expected_inhom = count_solutions(p.s, p.N, M);
  report.expected_top_sector =
      sector_dimension(p.s, {HalfInt::from_twice(p.N), magnetization_of_M(p.s, p.N, M)});

  const double b = -p.s.twice() * p.B * M;
  const double e_top = p.s.to_double() * (p.B + p.N * p.A);

  std::vector<Candidate> candidates;
  Eigen::VectorXcd spectrum;
  for (Candidate& c : eigen_candidates(p, M, report.inconsistent, spectrum)) {
    if (!is_duplicate(candidates, c, opts.dedup)) candidates.push_back(std::move(c));
  }
  for (Candidate& c : random_start_candidates(p, M, opts)) {
    if (!is_duplicate(candidates, c, opts.dedup)) candidates.push_back(std::move(c));
  }
  report.candidates = static_cast<int>(candidates.size());

  NewtonOptions nopts;
  nopts.tol = opts.tol.newton;
  const auto poles = hom_poles(p);
  for (const Candidate& cand : candidates) {
    // Count eigenvalues of L near a: zero means a random start stalled off
    // the spectrum, two or more means a degenerate eigenspace whose
    // combinations give root sets that are not eigenstates.
    int near = 0;
    for (const cplx& lam : spectrum) {
      if (std::abs(lam - cand.a) <= kDegenerateEigenvalue * std::max(1.0, std::abs(cand.a))) ++near;
    }
    if (near == 0) {
      ++report.rejected;
      continue;
    }
    if (near > 1) {
      ++report.degenerate;
      continue;
    }
    const QPolyState qstate{Polynomial(cand.q), cand.a, b};
    // E = s(B + N A) + sum 1/v_a and a = (1/A) sum 1/v_a (evaluate P at u = 0).
    const double e_from_a = e_top + p.A * cand.a;

    ExtractedRoots ex = extract_roots(p, M, cand, opts.tol);
    if (!ex.degree_ok) {
      ++report.inconsistent;
      continue;
    }
    if (has_singular_root(ex.roots, p) || near_pole_cluster(ex.roots, p)) {
      ++report.singular;
      continue;
    }

    RootSet roots = ex.roots;
    double residual_inf = 0.0;
    bool converged = true;
    if (M > 0) {
      auto res = newton_solve<cplx>([&](const Eigen::VectorXcd& x) { return raw_residual(to_roots(x), -p.s.twice() * p.B, poles); },
                                    [&](const Eigen::VectorXcd& x) { return raw_jacobian(to_roots(x), poles); },
                                    to_vector(roots), nopts);
      roots = to_roots(res.x);
      residual_inf = res.residual_inf;
      // Genuine eigenvectors give roots accurate enough for Newton to reach
      // the Newton tolerance without moving them far.
      double scale = 1.0;
      for (const cplx& x : ex.roots) scale = std::max(scale, std::abs(x));
      converged = res.converged() && root_set_distance(roots, ex.roots) <= kPolishDrift * scale;
    }
    sort_roots(roots);

    const cplx e = energy_hom_complex(roots, p);
    const bool ok = converged && residual_inf <= opts.tol.bethe && !has_singular_root(roots, p) &&
                    !near_pole_cluster(roots, p) &&
                    min_pair_distance(roots) > kPoleDistance &&
                    std::abs(e.imag()) <= kRealEnergyTol * std::max(1.0, std::abs(e.real())) &&
                    std::abs(e.real() - e_from_a) <= 1e-6 * std::max(1.0, std::abs(e_from_a));
    if (!ok) {
      if (has_singular_root(roots, p) || near_pole_cluster(roots, p)) {
        ++report.singular;
      } else {
        ++report.rejected;
      }
      continue;
    }

    BetheState st{roots, M, p, residual_inf, e.real()};
    const double scale = roots.empty() ? 1.0 : std::max(1.0, std::abs(roots.back()));
    const bool dup = std::any_of(report.solutions.begin(), report.solutions.end(), [&](const QPolySolution& s) {
      return root_set_distance(s.state.roots, st.roots) < opts.dedup * scale;
    });
    if (!dup) report.solutions.push_back({qstate, std::move(st)});
  }

  if (report.solutions.empty()) {
    throw Error(ErrorCode::NoSolutionFound, "no admissible q-polynomial solution for M = " + std::to_string(M));
  }
  std::sort(report.solutions.begin(), report.solutions.end(),
            [](const QPolySolution& x, const QPolySolution& y) { return x.state.energy < y.state.energy; });
  return report;
}

// ---------------------------------------------------------------------------
// Direct Newton

namespace {

bool admit(std::vector<BetheState>& states, BetheState st, double dedup) {
  const double scale = std::max(1.0, std::accumulate(st.roots.begin(), st.roots.end(), 0.0,
                                                     [](double m, const cplx& x) { return std::max(m, std::abs(x)); }));
  for (const BetheState& s : states) {
    if (root_set_distance(s.roots, st.roots) < dedup * scale) return false;
  }
  states.push_back(std::move(st));
  return true;
}

}  // namespace

InhomSolveReport solve_inhom_newton(const InhomModelParams& p, int M, const DirectNewtonOptions& opts) {
  p.validate();
  require_M(p.s, p.N, M);

  InhomSolveReport report;
  report.epsilons_distinct = p.epsilons_distinct();
  report.expected = count_solutions(p.s, p.N, M);

  if (M == 0) {
    report.states.push_back({{}, 0, p, 0.0, energy_inhom({}, p)});
    return report;
  }

  const auto poles = inhom_poles(p);
  std::vector<double> positions;
  for (const auto& pw : poles) positions.push_back(pw.first);
  std::vector<double> sorted = positions;
  std::sort(sorted.begin(), sorted.end());
  double spacing = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i] > sorted[i - 1]) spacing = std::min(spacing, sorted[i] - sorted[i - 1]);
  }
  if (!std::isfinite(spacing)) spacing = 1.0;
  const double span = std::max(sorted.back() - sorted.front(), spacing);

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, positions.size() - 1);
  NewtonOptions nopts;
  nopts.tol = opts.tol.newton;
  const double field = -p.s.twice() * p.B;

  for (int start = 0; start < opts.starts; ++start) {
    ++report.attempts;
    // One root next to each of M randomly chosen poles (with replacement
    // once the poles run out); alternate starts widen the cloud so that
    // roots far from the poles can be reached too.
    std::vector<std::size_t> order(positions.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const double width = (start % 2 == 0) ? 0.5 * spacing : 0.5 * span;
    Eigen::VectorXcd x0(M);
    for (int a = 0; a < M; ++a) {
      const std::size_t idx = a < static_cast<int>(order.size()) ? order[static_cast<std::size_t>(a)] : pick(rng);
      x0(a) = cplx(positions[idx] + width * uni(rng), width * uni(rng));
    }
    auto res = newton_solve<cplx>([&](const Eigen::VectorXcd& x) { return raw_residual(to_roots(x), field, poles); },
                                  [&](const Eigen::VectorXcd& x) { return raw_jacobian(to_roots(x), poles); }, x0,
                                  nopts);
    if (res.residual_inf > opts.tol.bethe) continue;
    RootSet roots = to_roots(res.x);
    bool near_pole = false;
    for (const cplx& v : roots)
      for (double e : positions) near_pole = near_pole || std::abs(v - e) < kSingularDistance;
    if (near_pole || min_pair_distance(roots) <= kPoleDistance || escaped(roots, poles, field)) continue;
    const cplx e = energy_inhom_complex(roots, p);
    if (std::abs(e.imag()) > kRealEnergyTol * std::max(1.0, std::abs(e.real()))) continue;
    sort_roots(roots);
    admit(report.states, {roots, M, p, res.residual_inf, e.real()}, opts.dedup);
  }

  if (report.states.empty()) {
    throw Error(ErrorCode::NoSolutionFound, "no inhomogeneous Bethe solution found for M = " + std::to_string(M));
  }
  std::sort(report.states.begin(), report.states.end(),
            [](const BetheState& x, const BetheState& y) { return x.energy < y.energy; });
  return report;
}

std::vector<BetheState> solve_hom_newton(const ModelParams& p, int M, const DirectNewtonOptions& opts) {
  require_hom_params(p);
  require_M(p.s, p.N, M);
  std::vector<BetheState> states;
  if (M == 0) {
    states.push_back({{}, 0, p, 0.0, energy_hom({}, p)});
    return states;
  }
  const auto poles = hom_poles(p);
  const double c = pole_offset(p);
  const double box = 1.0 + 0.5 * c * (p.N + p.s.twice());
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> re(-2.0 * box, 0.0);
  std::uniform_real_distribution<double> im(0.0, box);
  NewtonOptions nopts;
  nopts.tol = opts.tol.newton;
  const double field = -p.s.twice() * p.B;

  for (int start = 0; start < opts.starts; ++start) {
    Eigen::VectorXcd x0(M);
    int a = 0;
    for (; a + 1 < M; a += 2) {
      const cplx z(re(rng), im(rng));
      x0(a) = z;
      x0(a + 1) = std::conj(z);
    }
    if (a < M) x0(a) = cplx(re(rng), 0.0);
    auto res = newton_solve<cplx>([&](const Eigen::VectorXcd& x) { return raw_residual(to_roots(x), field, poles); },
                                  [&](const Eigen::VectorXcd& x) { return raw_jacobian(to_roots(x), poles); }, x0,
                                  nopts);
    if (res.residual_inf > opts.tol.bethe) continue;
    RootSet roots = to_roots(res.x);
    if (has_singular_root(roots, p) || near_pole_cluster(roots, p) || min_pair_distance(roots) <= kPoleDistance ||
        escaped(roots, poles, field)) {
      continue;
    }
    const cplx e = energy_hom_complex(roots, p);
    if (std::abs(e.imag()) > kRealEnergyTol * std::max(1.0, std::abs(e.real()))) continue;
    sort_roots(roots);
    admit(states, {roots, M, p, res.residual_inf, e.real()}, opts.dedup);
  }
  std::sort(states.begin(), states.end(), [](const BetheState& x, const BetheState& y) { return x.energy < y.energy; });
  return states;
}

}  // namespace csm
