#include "csm/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "csm/error.hpp"

namespace csm {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::PoleCollision: return "PoleCollision";
    case ErrorCode::NonRealEnergy: return "NonRealEnergy";
    case ErrorCode::NoSolutionFound: return "NoSolutionFound";
    case ErrorCode::InconsistentDegree: return "InconsistentDegree";
    case ErrorCode::ComplexFrequency: return "ComplexFrequency";
    case ErrorCode::DegenerateFrequencies: return "DegenerateFrequencies";
    case ErrorCode::DimensionGuard: return "DimensionGuard";
    case ErrorCode::NumericFailure: return "NumericFailure";
  }
  return "Unknown";
}

namespace {

int parse_int(std::string_view text, std::string_view whole) {
  int value = 0;
  auto first = text.data();
  auto last = text.data() + text.size();
  if (!text.empty() && text.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || first == last) {
    throw Error(ErrorCode::InvalidArgument, "cannot parse spin value '" + std::string(whole) + "'");
  }
  return value;
}

}  // namespace

HalfInt HalfInt::parse(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) {
    return from_int(parse_int(text, text));
  }
  const int num = parse_int(text.substr(0, slash), text);
  const int den = parse_int(text.substr(slash + 1), text);
  if (den == 1) return from_int(num);
  if (den == 2) return from_twice(num);
  throw Error(ErrorCode::InvalidArgument, "spin must be an integer or half-integer: '" + std::string(text) + "'");
}

std::string HalfInt::to_string() const {
  if (is_integer()) return std::to_string(twice_ / 2);
  return std::to_string(twice_) + "/2";
}

void ModelParams::validate() const {
  if (s.twice() < 1) throw Error(ErrorCode::InvalidArgument, "central spin s must be >= 1/2");
  if (N < 1) throw Error(ErrorCode::InvalidArgument, "bath size N must be >= 1");
  if (!std::isfinite(A) || !std::isfinite(B)) throw Error(ErrorCode::NonFinite, "A and B must be finite");
}

void InhomModelParams::validate() const {
  if (s.twice() < 1) throw Error(ErrorCode::InvalidArgument, "central spin s must be >= 1/2");
  if (N < 1) throw Error(ErrorCode::InvalidArgument, "bath size N must be >= 1");
  if (static_cast<int>(eps.size()) != N) {
    throw Error(ErrorCode::InvalidArgument, "expected " + std::to_string(N) + " bath inhomogeneities, got " +
                                                std::to_string(eps.size()));
  }
  if (!std::isfinite(B) || !std::isfinite(eps0)) throw Error(ErrorCode::NonFinite, "B and eps0 must be finite");
  for (double e : eps) {
    if (!std::isfinite(e)) throw Error(ErrorCode::NonFinite, "bath inhomogeneity is not finite");
    if (e == eps0) throw Error(ErrorCode::InvalidArgument, "eps0 must differ from every bath inhomogeneity");
  }
}

bool InhomModelParams::epsilons_distinct() const {
  std::vector<double> all = eps;
  all.push_back(eps0);
  std::sort(all.begin(), all.end());
  return std::adjacent_find(all.begin(), all.end()) == all.end();
}

std::vector<double> InhomModelParams::couplings() const {
  std::vector<double> out;
  out.reserve(eps.size());
  for (double e : eps) out.push_back(1.0 / (s.twice() * (eps0 - e)));
  return out;
}

bool bath_spin_allowed(int N, HalfInt j) {
  return N >= 1 && j.twice() >= 0 && j.twice() <= N && (j.twice() - N) % 2 == 0;
}

bool sector_key_valid(HalfInt s, int N, SectorKey key) {
  if (!bath_spin_allowed(N, key.j)) return false;
  const HalfInt top = key.j + s;
  return key.m >= -top && key.m <= top && ((key.m - top).twice() % 2 == 0);
}

int sector_dimension(HalfInt s, SectorKey key) {
  const HalfInt top = key.j + s;
  if (key.m < -top || key.m > top || (key.m - top).twice() % 2 != 0) {
    throw Error(ErrorCode::InvalidArgument, "m = " + key.m.to_string() + " outside [-j-s, j+s] for j = " +
                                                key.j.to_string() + ", s = " + s.to_string());
  }
  // m_s ranges over [max(-s, m-j), min(s, m+j)] in integer steps.
  const int lo = std::max(-s.twice(), (key.m - key.j).twice());
  const int hi = std::min(s.twice(), (key.m + key.j).twice());
  return (hi - lo) / 2 + 1;
}

std::int64_t binomial(int n, int r) {
  if (n < 0 || r < 0 || r > n) return 0;
  r = std::min(r, n - r);
  // Multiplicative form keeps every intermediate an exact binomial C(n-r+i, i).
  unsigned __int128 acc = 1;
  for (int i = 1; i <= r; ++i) {
    acc = acc * static_cast<unsigned>(n - r + i) / static_cast<unsigned>(i);
    if (acc > static_cast<unsigned __int128>(std::numeric_limits<std::int64_t>::max())) {
      throw Error(ErrorCode::NumericFailure, "binomial coefficient overflows 64 bits");
    }
  }
  return static_cast<std::int64_t>(acc);
}

std::int64_t bath_spin_multiplicity(int N, HalfInt j) {
  if (!bath_spin_allowed(N, j)) {
    throw Error(ErrorCode::InvalidArgument, "bath spin j = " + j.to_string() + " not allowed for N = " + std::to_string(N));
  }
  const int k = (N - j.twice()) / 2;  // N/2 - j
  return binomial(N, k) - binomial(N, k - 1);
}

std::vector<HalfInt> allowed_bath_spins(int N) {
  std::vector<HalfInt> out;
  for (int twice = N % 2; twice <= N; twice += 2) out.push_back(HalfInt::from_twice(twice));
  return out;
}

std::int64_t total_levels(HalfInt s, int N) {
  if (N >= 62) throw Error(ErrorCode::NumericFailure, "level count overflows 64 bits");
  return static_cast<std::int64_t>(s.twice() + 1) << N;
}

}  // namespace csm
