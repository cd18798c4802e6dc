#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "csm/dynamics.hpp"
#include "csm/error.hpp"
#include "csm/oracle.hpp"
#include "support.hpp"

using namespace csm;
using namespace csm::literals;

constexpr double kPi = std::numbers::pi;

TEST_CASE("coherent preparation") {
  const CoherentPrep up = prepare(0.0, 5);
  CHECK(up.amps(0) == 1.0);
  CHECK(up.amps.tail(5).isZero());
  const CoherentPrep down = prepare(kPi, 5);
  CHECK(down.amps(5) == doctest::Approx(1.0));
  CHECK(down.amps.head(5).cwiseAbs().maxCoeff() < 1e-15);
  const CoherentPrep half = prepare(kPi / 2, 2);
  CHECK(half.amps(0) == doctest::Approx(0.5));
  CHECK(half.amps(1) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(half.amps(2) == doctest::Approx(0.5));

  testing::Gen g(71);
  for (int trial = 0; trial < 50; ++trial) {
    const int N = g.integer(1, 200);
    CHECK(prepare(g.uniform(0.0, kPi), N).amps.squaredNorm() == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(prepare(0.3, -1), Error);
}

TEST_CASE("fully polarized start is stationary") {
  const ModelParams p{3_hi, 7, 0.8, -0.3};
  const ModeCache cache = ModeCache::build(p);
  const CoherentPrep prep = prepare(0.0, p.N);
  const double e0 = 1.5 * (p.B + p.N * p.A);
  for (double t : {0.0, 0.4, 3.1}) {
    const EvolvedState st = evolve(prep, cache, t);
    CHECK(std::abs(st.psi(0, 0) - std::exp(cplx(0.0, -e0 * t))) < 1e-12);
    const ReducedDensity rho = reduced_density(prep, cache, t);
    CHECK(entropy(rho) == doctest::Approx(0.0));
    CHECK(purity(rho) == doctest::Approx(1.0));
    CHECK(spin_polarization(prep, cache, t) == doctest::Approx(1.5));
    CHECK(std::abs(coherent_factor(prep, cache, t)) < 1e-12);
    CHECK(loschmidt(prep, cache, t) == doctest::Approx(1.0));
  }
}

TEST_CASE("t = 0 reproduces the initial state") {
  testing::Gen g(73);
  for (int trial = 0; trial < 20; ++trial) {
    const ModelParams p = g.model(4, 12);
    const ModeCache cache = ModeCache::build(p);
    const CoherentPrep prep = prepare(g.uniform(0.0, kPi), p.N);
    const EvolvedState st = evolve(prep, cache, 0.0);
    CHECK((st.psi.row(0).transpose() - prep.amps.cast<cplx>()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(st.psi.bottomRows(p.s.twice()).cwiseAbs().maxCoeff() < 1e-12);
    const ReducedDensity rho = reduced_density(prep, cache, 0.0);
    CHECK(std::abs(rho.rho(0, 0) - 1.0) < 1e-12);
    CHECK(entropy(rho) < 1e-10);
    CHECK(loschmidt(prep, cache, 0.0) == doctest::Approx(1.0));
  }
}

TEST_CASE("Dicke amplitudes match exact propagation") {
  const ModelParams p{2_hi, 6, 0.7, 0.3};
  const DenseSpectrum spec = diagonalize(build_dense(p));
  const Eigen::VectorXcd psi0 = coherent_product_state(p.s, p.N, kPi / 2);
  const ModeCache cache = ModeCache::build(p);
  const CoherentPrep prep = prepare(kPi / 2, p.N);
  const Eigen::MatrixXcd exact = dicke_amplitudes(exact_evolve(spec, psi0, 0.7), p.s, p.N);
  const EvolvedState st = evolve(prep, cache, 0.7);
  for (int j = 0; j <= 2; ++j)
    for (int k = 0; k <= p.N; ++k) CHECK(std::abs(st.amplitude(j, k) - exact(j, k)) < 1e-10);

  const ReducedDensity rho = reduced_density(prep, cache, 1.3);
  const ReducedDensity rho_exact = partial_trace_bath(exact_evolve(spec, psi0, 1.3), p.s, p.N);
  CHECK((rho.rho - rho_exact.rho).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("observables match exact propagation, N = 10") {
  for (int ts : {1, 2, 3}) {
    const ModelParams p{HalfInt::from_twice(ts), 10, 0.6, -0.45};
    const DenseSpectrum spec = diagonalize(build_dense(p));
    const double theta = 0.3 * kPi;
    const Eigen::VectorXcd psi0 = coherent_product_state(p.s, p.N, theta);
    const ModeCache cache = ModeCache::build(p, ModeMethod::Recipe);
    const CoherentPrep prep = prepare(theta, p.N);
    for (double t : {0.0, 1.1, 2.0, 4.5}) {
      const OracleObservables o = oracle_observables(psi0, exact_evolve(spec, psi0, t), p.s, p.N);
      const ReducedDensity rho = reduced_density(prep, cache, t);
      CHECK(std::abs(entropy(rho) - o.entropy) < 1e-8);
      CHECK(std::abs(purity(rho) - o.purity) < 1e-8);
      CHECK(std::abs(spin_polarization(prep, cache, t) - o.sz) < 1e-8);
      CHECK(std::abs(std::norm(coherent_factor(prep, cache, t)) - o.sminus2) < 1e-8);
      CHECK(std::abs(loschmidt(prep, cache, t) - o.loschmidt) < 1e-8);
    }
  }
}

TEST_CASE("property: density matrix paths agree and are physical") {
  testing::Gen g(79);
  for (int trial = 0; trial < 30; ++trial) {
    const ModelParams p = g.model(4, 20);
    const ModeCache cache = ModeCache::build(p);
    const CoherentPrep prep = prepare(g.uniform(0.0, kPi), p.N);
    const double t = g.uniform(0.0, 20.0);
    const EvolvedState st = evolve(prep, cache, t);
    CHECK(std::abs(st.norm_squared() - 1.0) < 1e-10);
    const ReducedDensity a = reduced_density(prep, cache, t);
    const ReducedDensity b = reduced_density_partial_trace(st, p.s, p.N);
    CHECK((a.rho - b.rho).cwiseAbs().maxCoeff() < 1e-10);
    CHECK_NOTHROW(a.validate());
    const double S = entropy(a);
    const double P = purity(a);
    CHECK(S >= 0.0);
    CHECK(S <= std::log(p.s.twice() + 1.0) + 1e-12);
    CHECK(P <= 1.0 + 1e-12);
    CHECK(P >= 1.0 / (p.s.twice() + 1.0) - 1e-12);
    CHECK(std::abs(spin_polarization(prep, cache, t)) <= p.s.to_double() + 1e-10);
    const double L = loschmidt(prep, cache, t);
    CHECK(L >= 0.0);
    CHECK(L <= 1.0 + 1e-10);
    CHECK(std::abs(coherent_factor(prep, cache, t) - coherent_factor(a, p.s)) < 1e-10);
  }
}

TEST_CASE("time grid and observable names") {
  CHECK(time_grid(0.0, 4000) == std::vector<double>{0.0});
  CHECK(time_grid(5.0, 1) == std::vector<double>{0.0});
  const std::vector<double> g = time_grid(2.0, 5);
  REQUIRE(g.size() == 5);
  CHECK(g[1] == doctest::Approx(0.5));
  CHECK(g.back() == 2.0);
  CHECK_THROWS_AS(time_grid(-1.0, 10), Error);
  CHECK_THROWS_AS(time_grid(1.0, 0), Error);
  for (Observable o : all_observables()) CHECK(parse_observable(to_string(o)) == o);
  CHECK_THROWS_AS(parse_observable("energy"), Error);
}

TEST_CASE("time series") {
  const ModelParams p{2_hi, 5, 0.5, 0.5};
  const TimeSeries none = run_timeseries(p, kPi / 2, time_grid(1.0, 3), {});
  CHECK(none.values.empty());
  CHECK(none.times.size() == 3);
  const TimeSeries ts = run_timeseries(p, kPi / 2, time_grid(1.0, 3), {Observable::Norm, Observable::Loschmidt});
  REQUIRE(ts.values.size() == 2);
  for (double v : ts.values[0]) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ts.values[1][0] == doctest::Approx(1.0));
}
