#include <doctest.h>

#include <cmath>
#include <random>

#include "approx.hpp"
#include "faraday/angular.hpp"
#include "oracles.hpp"

using namespace faraday;

TEST_CASE("HalfInt stores twice the value") {
  CHECK(half(3).value() == 1.5);
  CHECK(HalfInt(2).twice() == 4);
  CHECK(half(3).multiplicity() == 4);
  CHECK_FALSE(half(3).is_integer());
  CHECK((half(1) + half(1)) == HalfInt(1));
  CHECK(half(3).str() == "3/2");
  CHECK(HalfInt(2).str() == "2");
}

TEST_CASE("triangle rule") {
  CHECK(triangle(1, 1, 2));
  CHECK(triangle(half(1), half(3), 1));
  CHECK_FALSE(triangle(1, 1, 3));
  CHECK_FALSE(triangle(half(1), 1, 1));
  CHECK_FALSE(triangle(HalfInt::from_twice(-2), 1, 1));
}

TEST_CASE("6j tabulated values") {
  CHECK(wigner6j(1, 1, 1, 1, 1, 1) == rel(1.0 / 6.0).epsilon(1e-14));
  CHECK(wigner6j(half(1), half(1), 1, half(1), half(1), 0) == rel(1.0 / 2.0).epsilon(1e-14));
  CHECK(wigner6j(half(1), half(1), 1, half(1), half(1), 1) == rel(1.0 / 6.0).epsilon(1e-14));
  CHECK(wigner6j(1, 1, 2, 1, 1, 2) == rel(1.0 / 30.0).epsilon(1e-14));
  CHECK(wigner6j(1, 1, 3, 1, 1, 1) == 0.0);
}

TEST_CASE("6j symmetry under column permutation and row swaps") {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> d(0, 9);
  int checked = 0;
  while (checked < 200) {
    const HalfInt a = half(d(rng)), b = half(d(rng)), c = half(d(rng));
    const HalfInt e = half(d(rng)), f = half(d(rng)), g = half(d(rng));
    const double v = wigner6j(a, b, c, e, f, g);
    if (v == 0.0) continue;
    CHECK(wigner6j(b, a, c, f, e, g) == rel(v).epsilon(1e-12));
    CHECK(wigner6j(a, c, b, e, g, f) == rel(v).epsilon(1e-12));
    CHECK(wigner6j(e, f, c, a, b, g) == rel(v).epsilon(1e-12));
    ++checked;
  }
}

TEST_CASE("6j matches the exact rational oracle on a random sample") {
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> d(0, 15);
  int compared = 0;
  double worst = 0.0;
  for (int n = 0; n < 200000 && compared < 2000; ++n) {
    const int t[6] = {d(rng), d(rng), d(rng), d(rng), d(rng), d(rng)};
    const double ref = oracle::sixj_exact(t[0], t[1], t[2], t[3], t[4], t[5]);
    if (ref == 0.0) continue;
    const double v = wigner6j(half(t[0]), half(t[1]), half(t[2]), half(t[3]), half(t[4]), half(t[5]));
    worst = std::max(worst, std::abs(v - ref));
    ++compared;
  }
  CHECK(compared > 500);
  CHECK(worst < 1e-12);
}

TEST_CASE("6j orthogonality") {
  double worst = 0.0;
  for (int a = 0; a <= 8; ++a)
    for (int b = 0; b <= 8; ++b)
      for (int c = 0; c <= 8; ++c)
        for (int cp = 0; cp <= 8; ++cp)
          worst = std::max(worst, sixj_orthogonality_defect(half(a), half(b), half(cp), half(c)));
  CHECK(worst < 1e-10);
}
