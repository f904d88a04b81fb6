#pragma once

#include <compare>
#include <string>

namespace faraday {

/// An angular momentum quantum number stored exactly as twice its value.
class HalfInt {
 public:
  constexpr HalfInt() = default;
  constexpr HalfInt(int j) : twice_(2 * j) {}  // NOLINT(google-explicit-constructor)

  static constexpr HalfInt from_twice(int twice) {
    HalfInt h;
    h.twice_ = twice;
    return h;
  }

  constexpr int twice() const { return twice_; }
  constexpr double value() const { return 0.5 * twice_; }
  constexpr bool is_integer() const { return twice_ % 2 == 0; }
  /// 2j + 1
  constexpr int multiplicity() const { return twice_ + 1; }

  constexpr HalfInt operator+(HalfInt o) const { return from_twice(twice_ + o.twice_); }
  constexpr HalfInt operator-(HalfInt o) const { return from_twice(twice_ - o.twice_); }
  constexpr auto operator<=>(const HalfInt&) const = default;

  std::string str() const;

 private:
  int twice_ = 0;
};

/// n/2 as a HalfInt, e.g. half(3) is 3/2.
constexpr HalfInt half(int n) { return HalfInt::from_twice(n); }

/// True when (a, b, c) can couple: |a-b| <= c <= a+b with a+b+c integer.
bool triangle(HalfInt a, HalfInt b, HalfInt c);

/// Wigner 6j symbol {j1 j2 j3; j4 j5 j6} from the Racah single sum, accumulated
/// with log-factorials. Returns exactly 0 when a triad fails the triangle rule.
double wigner6j(HalfInt j1, HalfInt j2, HalfInt j3, HalfInt j4, HalfInt j5, HalfInt j6);

/// |sum_j (2j+1)(2j3+1) {j1 j2 j; j1 j2 j3}{j1 j2 j; j1 j2 j3p} - delta(j3, j3p)|.
double sixj_orthogonality_defect(HalfInt j1, HalfInt j2, HalfInt j3p, HalfInt j3);

}  // namespace faraday
