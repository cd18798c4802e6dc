#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "csm/core.hpp"
#include "csm/density.hpp"
#include "csm/linalg.hpp"
#include "csm/modes.hpp"

namespace csm {

/// Bath spin-coherent state in the Dicke basis.
struct CoherentPrep {
  double theta = 0.0;
  Eigen::VectorXd amps;  // N + 1, amps[n] = sqrt(C(N,n)) cos^(N-n)(theta/2) sin^n(theta/2)
};

CoherentPrep prepare(double theta, int N);

/// Evolved state of |s, s> (x) |theta>. psi(j, n) is the amplitude of
/// |s, s-j> (x) |Dicke n-j>; entries with j > n or n - j > N are zero.
struct EvolvedState {
  double t = 0.0;
  Eigen::MatrixXcd psi;  // (2s+1) x (N+1)

  double norm_squared() const { return psi.squaredNorm(); }
  /// Amplitude of |s, s-j> (x) |Dicke k>.
  cplx amplitude(int j, int k) const;
};

EvolvedState evolve(const CoherentPrep& prep, const ModeCache& cache, double t);

ReducedDensity reduced_density(const CoherentPrep& prep, const ModeCache& cache, double t);
/// Same matrix via rho = Phi Phi^dagger with Phi(j, k) the Dicke amplitudes.
ReducedDensity reduced_density_partial_trace(const EvolvedState& st, HalfInt s, int N);

double entropy(const ReducedDensity& rho);
double purity(const ReducedDensity& rho);

double spin_polarization(const CoherentPrep& prep, const ModeCache& cache, double t);
cplx coherent_factor(const ReducedDensity& rho, HalfInt s);
cplx coherent_factor(const CoherentPrep& prep, const ModeCache& cache, double t);
double loschmidt(const CoherentPrep& prep, const ModeCache& cache, double t);

enum class Observable { Entropy, Purity, Sz, Sminus2, Loschmidt, Norm };

const char* to_string(Observable o);
Observable parse_observable(const std::string& name);
std::vector<Observable> all_observables();

struct TimeSeries {
  ModelParams params;
  double theta = 0.0;
  std::vector<double> times;
  std::vector<Observable> observables;
  std::vector<std::vector<double>> values;  // values[obs][t]
};

/// Uniform grid of `steps` points on [0, t_max]; a single point at 0 when
/// t_max == 0 or steps == 1.
std::vector<double> time_grid(double t_max, int steps);

TimeSeries run_timeseries(const ModelParams& p, double theta, const std::vector<double>& times,
                          const std::vector<Observable>& observables, ModeMethod method = ModeMethod::Spectral);

}  // namespace csm
