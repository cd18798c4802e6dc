#include "csm/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "csm/error.hpp"

namespace csm {

Eigen::VectorXd ReducedDensity::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(rho, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

void ReducedDensity::validate(double herm_tol, double trace_tol, double psd_tol) const {
  if (!rho.allFinite()) throw Error(ErrorCode::NonFinite, "density matrix has non-finite entries");
  if (hermiticity_error() > herm_tol) throw Error(ErrorCode::NumericFailure, "density matrix not Hermitian");
  if (std::abs(trace() - 1.0) > trace_tol) throw Error(ErrorCode::NumericFailure, "density matrix trace != 1");
  if (eigenvalues().minCoeff() < -psd_tol) throw Error(ErrorCode::NumericFailure, "density matrix not PSD");
}

CoherentPrep prepare(double theta, int N) {
  if (N < 0) throw Error(ErrorCode::InvalidArgument, "N must be non-negative");
  if (!std::isfinite(theta)) throw Error(ErrorCode::NonFinite, "theta must be finite");
  CoherentPrep prep;
  prep.theta = theta;
  prep.amps.resize(N + 1);
  const double c = std::cos(0.5 * theta);
  const double s = std::sin(0.5 * theta);
  for (int n = 0; n <= N; ++n) {
    // lgamma keeps C(N, n) finite for large N; pow handles the exact zeros.
    const double logc = std::lgamma(N + 1.0) - std::lgamma(n + 1.0) - std::lgamma(N - n + 1.0);
    prep.amps(n) = std::exp(0.5 * logc) * std::pow(c, N - n) * std::pow(s, n);
  }
  return prep;
}

cplx EvolvedState::amplitude(int j, int k) const {
  const int n = k + j;
  if (j < 0 || j >= psi.rows() || k < 0 || n >= psi.cols()) return cplx(0.0);
  return psi(j, n);
}

namespace {

void check_cache(const CoherentPrep& prep, const ModeCache& cache) {
  if (static_cast<int>(cache.sectors.size()) != cache.params.N + 1 || prep.amps.size() != cache.params.N + 1) {
    throw Error(ErrorCode::InvalidArgument, "mode cache does not cover n = 0..N");
  }
}

// sum_l c(j,l) exp(-i t omega_l) for every j of one sector.
Eigen::VectorXcd propagate(const ModeDecomposition& m, double t) {
  Eigen::VectorXcd phases(m.dim());
  for (int l = 0; l < m.dim(); ++l) phases(l) = std::exp(cplx(0.0, -t * m.omega(l)));
  return m.c.cast<cplx>() * phases;
}

}  // namespace

EvolvedState evolve(const CoherentPrep& prep, const ModeCache& cache, double t) {
  check_cache(prep, cache);
  const int N = cache.params.N;
  EvolvedState st;
  st.t = t;
  st.psi = Eigen::MatrixXcd::Zero(cache.params.central_dim(), N + 1);
  for (int n = 0; n <= N; ++n) {
    const ModeDecomposition& m = cache.sectors[static_cast<std::size_t>(n)];
    st.psi.col(n).head(m.dim()) = prep.amps(n) * propagate(m, t);
  }
  return st;
}

ReducedDensity reduced_density(const CoherentPrep& prep, const ModeCache& cache, double t) {
  const EvolvedState st = evolve(prep, cache, t);
  const int d = cache.params.central_dim();
  const int N = cache.params.N;
  ReducedDensity out;
  out.rho = Eigen::MatrixXcd::Zero(d, d);
  // rho_{jj'} = sum_n psi(j, n) conj(psi(j', n')) with n - j = n' - j'.
  for (int j = 0; j < d; ++j) {
    for (int jp = 0; jp < d; ++jp) {
      cplx acc(0.0);
      for (int n = j; n <= N; ++n) {
        const int np = n - j + jp;
        if (np < 0 || np > N) continue;
        acc += st.psi(j, n) * std::conj(st.psi(jp, np));
      }
      out.rho(j, jp) = acc;
    }
  }
  return out;
}

ReducedDensity reduced_density_partial_trace(const EvolvedState& st, HalfInt s, int N) {
  const int d = s.twice() + 1;
  Eigen::MatrixXcd phi = Eigen::MatrixXcd::Zero(d, N + 1);
  for (int j = 0; j < d; ++j)
    for (int k = 0; k <= N; ++k) phi(j, k) = st.amplitude(j, k);
  return {phi * phi.adjoint()};
}

double entropy(const ReducedDensity& rho) {
  double s = 0.0;
  for (double lam : rho.eigenvalues()) {
    const double l = std::clamp(lam, 0.0, 1.0);
    if (l > 0.0) s -= l * std::log(l);
  }
  return s;
}

double purity(const ReducedDensity& rho) { return rho.eigenvalues().squaredNorm(); }

double spin_polarization(const CoherentPrep& prep, const ModeCache& cache, double t) {
  check_cache(prep, cache);
  const double s = cache.params.s.to_double();
  cplx total(0.0);
  for (int n = 0; n <= cache.params.N; ++n) {
    const ModeDecomposition& m = cache.sectors[static_cast<std::size_t>(n)];
    const double w = prep.amps(n) * prep.amps(n);
    if (w == 0.0) continue;
    for (int j = 0; j < m.dim(); ++j) {
      for (int l = 0; l < m.dim(); ++l) {
        for (int lp = 0; lp < m.dim(); ++lp) {
          total += w * (s - j) * m.c(j, l) * m.c(j, lp) *
                   std::exp(cplx(0.0, -t * (m.omega(l) - m.omega(lp))));
        }
      }
    }
  }
  if (std::abs(total.imag()) > 1e-10) {
    throw Error(ErrorCode::NumericFailure, "spin polarization has imaginary part " + std::to_string(total.imag()));
  }
  return total.real();
}

cplx coherent_factor(const ReducedDensity& rho, HalfInt s) {
  const int d = s.twice() + 1;
  cplx acc(0.0);
  for (int j = 0; j + 1 < d; ++j) acc += std::sqrt((j + 1.0) * (s.twice() - j)) * rho.rho(j, j + 1);
  return acc;
}

cplx coherent_factor(const CoherentPrep& prep, const ModeCache& cache, double t) {
  return coherent_factor(reduced_density(prep, cache, t), cache.params.s);
}

double loschmidt(const CoherentPrep& prep, const ModeCache& cache, double t) {
  check_cache(prep, cache);
  cplx overlap(0.0);
  for (int n = 0; n <= cache.params.N; ++n) {
    const ModeDecomposition& m = cache.sectors[static_cast<std::size_t>(n)];
    const double w = prep.amps(n) * prep.amps(n);
    if (w == 0.0) continue;
    cplx acc(0.0);
    for (int l = 0; l < m.dim(); ++l) acc += m.c(0, l) * std::exp(cplx(0.0, -t * m.omega(l)));
    overlap += w * acc;
  }
  return std::norm(overlap);
}

const char* to_string(Observable o) {
  switch (o) {
    case Observable::Entropy: return "entropy";
    case Observable::Purity: return "purity";
    case Observable::Sz: return "sz";
    case Observable::Sminus2: return "sminus2";
    case Observable::Loschmidt: return "loschmidt";
    case Observable::Norm: return "norm";
  }
  return "?";
}

Observable parse_observable(const std::string& name) {
  for (Observable o : all_observables())
    if (name == to_string(o)) return o;
  throw Error(ErrorCode::InvalidArgument, "unknown observable '" + name + "'");
}

std::vector<Observable> all_observables() {
  return {Observable::Entropy, Observable::Purity, Observable::Sz,
          Observable::Sminus2, Observable::Loschmidt, Observable::Norm};
}

std::vector<double> time_grid(double t_max, int steps) {
  if (!std::isfinite(t_max) || t_max < 0.0) throw Error(ErrorCode::InvalidArgument, "t_max must be finite and >= 0");
  if (steps < 1) throw Error(ErrorCode::InvalidArgument, "t_steps must be >= 1");
  if (t_max == 0.0 || steps == 1) return {0.0};
  std::vector<double> out(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) out[static_cast<std::size_t>(i)] = t_max * i / (steps - 1);
  return out;
}

TimeSeries run_timeseries(const ModelParams& p, double theta, const std::vector<double>& times,
                          const std::vector<Observable>& observables, ModeMethod method) {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i])) throw Error(ErrorCode::NonFinite, "non-finite time");
    if (i > 0 && times[i] < times[i - 1]) throw Error(ErrorCode::InvalidArgument, "time grid must be sorted");
  }
  TimeSeries ts;
  ts.params = p;
  ts.theta = theta;
  ts.times = times;
  ts.observables = observables;
  ts.values.assign(observables.size(), std::vector<double>(times.size(), 0.0));
  if (observables.empty()) return ts;

  const ModeCache cache = ModeCache::build(p, method);
  const CoherentPrep prep = prepare(theta, p.N);
  for (std::size_t ti = 0; ti < times.size(); ++ti) {
    const double t = times[ti];
    const EvolvedState st = evolve(prep, cache, t);
    const ReducedDensity rho = reduced_density(prep, cache, t);
    rho.validate();
    for (std::size_t oi = 0; oi < observables.size(); ++oi) {
      double v = 0.0;
      switch (observables[oi]) {
        case Observable::Entropy: v = entropy(rho); break;
        case Observable::Purity: v = purity(rho); break;
        case Observable::Sz: v = spin_polarization(prep, cache, t); break;
        case Observable::Sminus2: v = std::norm(coherent_factor(rho, p.s)); break;
        case Observable::Loschmidt: v = loschmidt(prep, cache, t); break;
        case Observable::Norm: v = st.norm_squared(); break;
      }
      ts.values[oi][ti] = v;
    }
  }
  return ts;
}

}  // namespace csm
