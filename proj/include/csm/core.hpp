#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace csm {

/// Exact half-integer quantum number, stored as twice its value.
class HalfInt {
 public:
  constexpr HalfInt() = default;

  static constexpr HalfInt from_twice(int twice) { return HalfInt(twice); }
  static constexpr HalfInt from_int(int value) { return HalfInt(2 * value); }

  /// Parses "3/2", "1", "-1/2". Denominators other than 1 and 2 are rejected.
  static HalfInt parse(std::string_view text);

  constexpr int twice() const { return twice_; }
  constexpr bool is_integer() const { return twice_ % 2 == 0; }
  constexpr double to_double() const { return 0.5 * static_cast<double>(twice_); }

  /// Floor of the value (e.g. floor(3/2) = 1, floor(-1/2) = -1).
  constexpr int floor() const { return twice_ >= 0 ? twice_ / 2 : -((-twice_ + 1) / 2); }

  std::string to_string() const;

  constexpr HalfInt operator-() const { return HalfInt(-twice_); }
  constexpr HalfInt& operator+=(HalfInt o) { twice_ += o.twice_; return *this; }
  constexpr HalfInt& operator-=(HalfInt o) { twice_ -= o.twice_; return *this; }
  friend constexpr HalfInt operator+(HalfInt a, HalfInt b) { return a += b; }
  friend constexpr HalfInt operator-(HalfInt a, HalfInt b) { return a -= b; }

  friend constexpr auto operator<=>(HalfInt, HalfInt) = default;

 private:
  constexpr explicit HalfInt(int twice) : twice_(twice) {}
  int twice_ = 0;
};

namespace literals {
constexpr HalfInt operator""_hi(unsigned long long twice) {
  return HalfInt::from_twice(static_cast<int>(twice));
}
}  // namespace literals

/// Homogeneous model H = B S0^z + 2A sum_j S0 . s_j.
struct ModelParams {
  HalfInt s = HalfInt::from_twice(1);
  int N = 1;
  double A = 1.0;
  double B = 1.0;

  void validate() const;
  int central_dim() const { return s.twice() + 1; }
};

/// Inhomogeneous model H = B S0^z + (1/s) sum_j S0 . s_j / (eps0 - eps_j).
struct InhomModelParams {
  HalfInt s = HalfInt::from_twice(1);
  int N = 1;
  double B = 0.0;
  double eps0 = 0.0;
  std::vector<double> eps;

  void validate() const;
  bool epsilons_distinct() const;
  /// Equivalent pairwise coupling A_j = 1 / (2 s (eps0 - eps_j)).
  std::vector<double> couplings() const;
};

/// Simultaneous eigenspace label: bath spin j and total S^z eigenvalue m.
struct SectorKey {
  HalfInt j;
  HalfInt m;

  friend constexpr auto operator<=>(const SectorKey&, const SectorKey&) = default;
};

bool bath_spin_allowed(int N, HalfInt j);
bool sector_key_valid(HalfInt s, int N, SectorKey key);

/// Number of (m_s, m_j) pairs with m_s + m_j = m.
int sector_dimension(HalfInt s, SectorKey key);

/// Multiplicity of spin j in the N-fold product of spin 1/2.
std::int64_t bath_spin_multiplicity(int N, HalfInt j);

/// Allowed bath spins in ascending order.
std::vector<HalfInt> allowed_bath_spins(int N);

/// Exact binomial coefficient; zero outside 0 <= r <= n. Throws on overflow.
std::int64_t binomial(int n, int r);

/// (2s+1) 2^N as an exact integer.
std::int64_t total_levels(HalfInt s, int N);

}  // namespace csm
