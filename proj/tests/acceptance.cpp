// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "csm/bethe.hpp"
#include "csm/cli.hpp"
#include "csm/core.hpp"
#include "csm/dynamics.hpp"
#include "csm/error.hpp"
#include "csm/modes.hpp"
#include "csm/oracle.hpp"
#include "csm/sector_spectrum.hpp"

using namespace csm;
using Json = nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

// Tolerances and time limits, one block per criterion.
constexpr double kRefEnergyTol = 1e-5;
constexpr double kRefRootTol = 1e-4;
constexpr double kSpectrumTimeLimit = 1.0;
constexpr double kBetheTimeLimit = 10.0;
constexpr double kLargeTarget = 30.004;
constexpr double kLargeTargetTol = 0.01;
constexpr double kLargeResidualTol = 1e-8;
constexpr double kLargeConjugateTol = 1e-8;
constexpr double kLargeTimeLimit = 300.0;
constexpr int kCountMaxN = 8;
constexpr double kOracleSpectrumTol = 1e-9;
constexpr int kOracleDimLimit = 4096;
constexpr int kOracleDraws = 5;
constexpr double kDynamicsTol = 1e-8;
constexpr int kDynamicsMaxN = 10;
constexpr int kDynamicsPoints = 200;
constexpr double kDynamicsTMax = 20.0;
constexpr double kDynamicsTimeLimit = 120.0;
constexpr double kModesTol = 1e-9;
constexpr double kMomentsTol = 1e-8;
constexpr int kMomentsMaxK = 12;
constexpr int kModesMaxN = 15;
constexpr double kIdentityTol = 1e-10;
constexpr double kUnitarityTol = 1e-10;
constexpr double kBoundsTol = 1e-10;
constexpr double kEvolveTimeLimit = 30.0;

struct Outcome {
  bool passed = false;
  std::string detail;
};

struct Invocation {
  int code = 0;
  std::string out;
  std::string err;
};

Invocation cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Invocation r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct RefRow {
  int twice_j;
  int twice_m;
  double energy;
  int M;  // -1 for rows without Bethe roots
  RootSet roots;
};

const std::vector<RefRow>& reference() {
  using c = cplx;
  static const std::vector<RefRow> rows{
      {2, 4, 1.5, 0, {}},
      {2, 2, -0.780776, 1, {c(-0.438447)}},
      {2, 2, 1.28078, 1, {c(-4.56155)}},
      {2, 0, -2.14854, 2, {c(-0.351465, 0.262932), c(-0.351465, -0.262932)}},
      {2, 0, -0.893401, 2, {c(-2.71954), c(-0.493659)}},
      {2, 0, 1.04194, 2, {c(-3.54194, 1.70866), c(-3.54194, -1.70866)}},
      {2, -2, -1.28078, 3, {c(-0.612504), c(-1.41297, 0.681796), c(-1.41297, -0.681796)}},
      {2, -2, 0.780776, 3, {c(-3.16744), c(-2.19705, 2.46224), c(-2.19705, -2.46224)}},
      {2, -4, 0.5, 4, {c(-2.26566, 0.850941), c(-2.26566, -0.850941), c(-0.734342, 2.43893), c(-0.734342, -2.43893)}},
      {0, 2, 0.5, -1, {}},
      {0, 0, 0.0, -1, {}},
      {0, -2, -0.5, -1, {}},
  };
  return rows;
}

// Max distance under the best pairing of two root lists of equal length.
double matched_distance(RootSet a, const RootSet& b) {
  if (a.size() != b.size()) return INFINITY;
  std::vector<std::size_t> perm(a.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  double best = INFINITY;
  do {
    double worst = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[perm[i]]));
    best = std::min(best, worst);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

RootSet roots_from_json(const Json& state) {
  RootSet out;
  for (const auto& r : state["roots"]) out.emplace_back(r[0].get<double>(), r[1].get<double>());
  return out;
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
  const auto start = std::chrono::steady_clock::now();
  const Invocation r = cli({"spectrum", "--s", "1", "--N", "2", "--A", "0.5", "--B", "0.5"});
  const double elapsed = seconds_since(start);
  if (r.code != 0) return {false, "exit code " + std::to_string(r.code)};
  auto rows = parse_csv(r.out);
  rows.erase(rows.begin());
  if (rows.size() != 12) return {false, std::to_string(rows.size()) + " rows, expected 12"};
  std::vector<bool> used(rows.size(), false);
  double worst = 0.0;
  for (const RefRow& t : reference()) {
    double best = INFINITY;
    std::size_t arg = rows.size();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (used[i]) continue;
      if (HalfInt::parse(rows[i][0]).twice() != t.twice_j || HalfInt::parse(rows[i][1]).twice() != t.twice_m) continue;
      const double d = std::abs(std::stod(rows[i][2]) - t.energy);
      if (d < best) {
        best = d;
        arg = i;
      }
    }
    if (arg == rows.size()) return {false, "no row for a reference level"};
    used[arg] = true;
    worst = std::max(worst, best);
  }
  const bool ok = worst <= kRefEnergyTol && elapsed < kSpectrumTimeLimit;
  return {ok, "max|dE| = " + fmt(worst) + ", " + fmt(elapsed) + " s"};
}

Outcome criterion2() {
  const auto start = std::chrono::steady_clock::now();
  double worst_root = 0.0, worst_energy = 0.0;
  for (int M = 0; M <= 4; ++M) {
    const Invocation r = cli({"bethe", "--s", "1", "--N", "2", "--A", "0.5", "--B", "0.5", "--M", std::to_string(M),
                              "--format", "json"});
    if (r.code != 0) return {false, "M = " + std::to_string(M) + ": exit code " + std::to_string(r.code)};
    const Json j = Json::parse(r.out);
    for (const RefRow& t : reference()) {
      if (t.M != M) continue;
      double best_root = INFINITY, best_energy = INFINITY;
      for (const auto& st : j["states"]) {
        const double d = matched_distance(roots_from_json(st), t.roots);
        if (d < best_root) {
          best_root = d;
          best_energy = std::abs(st["energy"].get<double>() - t.energy);
        }
      }
      worst_root = std::max(worst_root, best_root);
      worst_energy = std::max(worst_energy, best_energy);
    }
  }
  const double elapsed = seconds_since(start);
  const bool ok = worst_root <= kRefRootTol && worst_energy <= kRefEnergyTol && elapsed < kBetheTimeLimit;
  return {ok, "max root dist = " + fmt(worst_root) + ", max|dE| = " + fmt(worst_energy) + ", " + fmt(elapsed) + " s"};
}

Outcome criterion3() {
  const auto start = std::chrono::steady_clock::now();
  const Invocation r =
      cli({"bethe", "--s", "1", "--N", "60", "--M", "31", "--A", "0.5", "--B", "0.5", "--format", "json"});
  const double elapsed = seconds_since(start);
  if (r.code != 0) return {false, "exit code " + std::to_string(r.code)};
  const Json j = Json::parse(r.out);
  for (const auto& st : j["states"]) {
    const double e = st["energy"].get<double>();
    if (std::abs(e - kLargeTarget) > kLargeTargetTol) continue;
    const RootSet roots = roots_from_json(st);
    const double res = st["residual"].get<double>();
    const double conj = conjugate_pairing_error(roots);
    const bool ok = res < kLargeResidualTol && conj < kLargeConjugateTol && roots.size() == 31 &&
                    elapsed < kLargeTimeLimit;
    char buf[160];
    std::snprintf(buf, sizeof buf, "E = %.12f, residual = %.2g, conjugate error = %.2g, %s s", e, res, conj,
                  fmt(elapsed).c_str());
    return {ok, buf};
  }
  return {false, "no state near E = 30.004 among " + std::to_string(j["states"].size())};
}

Outcome criterion4() {
  int checked = 0;
  for (int ts = 1; ts <= 4; ++ts) {
    for (int N = 1; N <= kCountMaxN; ++N) {
      const HalfInt s = HalfInt::from_twice(ts);
      std::int64_t total = 0;
      for (int M = 0; M <= N + ts; ++M) total += count_solutions(s, N, M);
      if (total != total_levels(s, N)) {
        return {false, "s = " + s.to_string() + ", N = " + std::to_string(N) + ": " + std::to_string(total)};
      }
      ++checked;
    }
  }
  return {true, std::to_string(checked) + " (s, N) pairs"};
}

Outcome criterion5() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> uni(-2.0, 2.0);
  double worst = 0.0;
  int pairs = 0;
  for (int N = 1; 2 << N <= kOracleDimLimit; ++N) {
    for (int ts = 1; (ts + 1) << N <= kOracleDimLimit; ++ts) {
      ++pairs;
      for (int draw = 0; draw < kOracleDraws; ++draw) {
        const ModelParams p{HalfInt::from_twice(ts), N, uni(rng), uni(rng)};
        const std::vector<double> fast = expand_levels(full_spectrum(p));
        const std::vector<double> exact = exact_spectrum(build_dense(p));
        if (fast.size() != exact.size()) return {false, "level count mismatch"};
        for (std::size_t i = 0; i < fast.size(); ++i) worst = std::max(worst, std::abs(fast[i] - exact[i]));
      }
    }
  }
  return {worst <= kOracleSpectrumTol, std::to_string(pairs) + " (s, N) pairs, max|dE| = " + fmt(worst)};
}

struct DynamicsStats {
  double dev = 0.0;
  double identity = 0.0;
  double unitarity = 0.0;
  double seconds = 0.0;
  int decompositions = 0;
};

DynamicsStats run_dynamics() {
  DynamicsStats st;
  const auto start = std::chrono::steady_clock::now();
  const std::vector<double> times = time_grid(kDynamicsTMax, kDynamicsPoints);
  for (int ts = 1; ts <= 3; ++ts) {
    for (int N = 1; N <= kDynamicsMaxN; ++N) {
      const ModelParams p{HalfInt::from_twice(ts), N, 1.0, 1.0};
      const DenseSpectrum spec = diagonalize(build_dense(p));
      const ModeCache cache = ModeCache::build(p, ModeMethod::Recipe);
      for (const ModeDecomposition& d : cache.sectors) {
        st.identity = std::max({st.identity, identity_sum_error(d), identity_orthogonality_error(d)});
        ++st.decompositions;
      }
      for (double theta : {0.3 * kPi, 0.5 * kPi}) {
        const CoherentPrep prep = prepare(theta, N);
        const Eigen::VectorXcd psi0 = coherent_product_state(p.s, N, theta);
        for (double t : times) {
          const OracleObservables o = oracle_observables(psi0, exact_evolve(spec, psi0, t), p.s, N);
          const ReducedDensity rho = reduced_density(prep, cache, t);
          st.unitarity = std::max(st.unitarity, std::abs(evolve(prep, cache, t).norm_squared() - 1.0));
          st.dev = std::max({st.dev, std::abs(entropy(rho) - o.entropy), std::abs(purity(rho) - o.purity),
                             std::abs(spin_polarization(prep, cache, t) - o.sz),
                             std::abs(std::norm(coherent_factor(rho, p.s)) - o.sminus2),
                             std::abs(loschmidt(prep, cache, t) - o.loschmidt)});
        }
      }
    }
  }
  st.seconds = seconds_since(start);
  return st;
}

Outcome criterion7() {
  double cross = 0.0, moment = 0.0;
  int fallbacks = 0, decompositions = 0;
  for (const auto& [A, B] : std::vector<std::pair<double, double>>{{1.0, 1.0}, {0.7, -0.3}}) {
    for (int ts = 1; ts <= 4; ++ts) {
      for (int N = 1; N <= kModesMaxN; ++N) {
        const ModelParams p{HalfInt::from_twice(ts), N, A, B};
        for (int n = 0; n <= N; ++n) {
          const ModeDecomposition rec = decompose(p, n, ModeMethod::Recipe);
          const ModeDecomposition spc = decompose(p, n, ModeMethod::Spectral);
          ++decompositions;
          fallbacks += rec.fell_back ? 1 : 0;
          cross = std::max({cross, (rec.omega - spc.omega).cwiseAbs().maxCoeff(), (rec.c - spc.c).cwiseAbs().maxCoeff()});
          const RecurrenceResult ref = recurrence_oracle(p, n, kMomentsMaxK);
          for (int k = 0; k <= kMomentsMaxK; ++k) {
            const Eigen::VectorXd& h = ref.h[static_cast<std::size_t>(k)];
            const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
            moment = std::max(moment, (moments(rec, k) - h).cwiseAbs().maxCoeff() / scale);
          }
        }
      }
    }
  }
  return {cross <= kModesTol && moment <= kMomentsTol,
          std::to_string(decompositions) + " sectors (" + std::to_string(fallbacks) +
              " fallbacks), recipe vs spectral = " + fmt(cross) + ", moments rel = " + fmt(moment)};
}

Outcome criterion9() {
  const auto start = std::chrono::steady_clock::now();
  const Invocation r =
      cli({"evolve", "--s", "1", "--N", "15", "--theta", std::to_string(0.5 * kPi), "--A", "1.0", "--B", "1.0",
           "--t_max", "40"});
  const double elapsed = seconds_since(start);
  if (r.code != 0) return {false, "exit code " + std::to_string(r.code)};
  auto rows = parse_csv(r.out);
  const std::vector<std::string> header = rows.front();
  rows.erase(rows.begin());
  auto column = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t cS = column("entropy"), cL = column("loschmidt"), cZ = column("sz");
  if (cS >= header.size() || cL >= header.size() || cZ >= header.size()) return {false, "missing columns"};
  bool ok = !rows.empty();
  for (const auto& row : rows) {
    const double S = std::stod(row[cS]), L = std::stod(row[cL]), Z = std::stod(row[cZ]);
    ok = ok && S >= -kBoundsTol && S <= std::log(3.0) + kBoundsTol && L >= -kBoundsTol && L <= 1.0 + kBoundsTol &&
         std::abs(Z) <= 1.0 + kBoundsTol;
  }
  const auto& first = rows.front();
  ok = ok && std::abs(std::stod(first[cL]) - 1.0) <= kBoundsTol && std::abs(std::stod(first[cS])) <= kBoundsTol &&
       std::abs(std::stod(first[cZ]) - 1.0) <= kBoundsTol;
  ok = ok && elapsed < kEvolveTimeLimit;
  return {ok, std::to_string(rows.size()) + " time points, " + fmt(elapsed) + " s"};
}

bool report(int number, const std::string& title, const std::function<Outcome()>& body) {
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  std::printf("criterion %d %-34s %s  %s\n", number, title.c_str(), o.passed ? "PASS" : "FAIL", o.detail.c_str());
  std::fflush(stdout);
  return o.passed;
}

}  // namespace

int main() {
  bool all = true;
  all &= report(1, "reference levels via spectrum", criterion1);
  all &= report(2, "reference levels via bethe", criterion2);
  all &= report(3, "large bethe state (N=60, M=31)", criterion3);
  all &= report(4, "counting sum rule", criterion4);
  all &= report(5, "spectrum vs dense oracle", criterion5);

  DynamicsStats dyn;
  bool dyn_ok = true;
  std::string dyn_error;
  try {
    dyn = run_dynamics();
  } catch (const std::exception& e) {
    dyn_ok = false;
    dyn_error = e.what();
  }
  all &= report(6, "dynamics vs dense oracle", [&]() -> Outcome {
    if (!dyn_ok) return {false, "exception: " + dyn_error};
    return {dyn.dev <= kDynamicsTol && dyn.seconds < kDynamicsTimeLimit,
            "max dev = " + fmt(dyn.dev) + ", " + fmt(dyn.seconds) + " s"};
  });
  all &= report(7, "mode recipe vs spectral and moments", criterion7);
  all &= report(8, "mode identities and unitarity", [&]() -> Outcome {
    if (!dyn_ok) return {false, "exception: " + dyn_error};
    return {dyn.identity <= kIdentityTol && dyn.unitarity <= kUnitarityTol,
            std::to_string(dyn.decompositions) + " decompositions, identities = " + fmt(dyn.identity) +
                ", unitarity = " + fmt(dyn.unitarity)};
  });
  all &= report(9, "evolve N=15 run and bounds", criterion9);
  std::printf("%s\n", all ? "ALL PASS" : "SOME CRITERIA FAILED");
  return all ? 0 : 1;
}
