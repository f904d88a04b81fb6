#include "faraday/angular.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace faraday {

std::string HalfInt::str() const {
  if (is_integer()) return std::to_string(twice_ / 2);
  return std::to_string(twice_) + "/2";
}

bool triangle(HalfInt a, HalfInt b, HalfInt c) {
  const int ta = a.twice(), tb = b.twice(), tc = c.twice();
  if (ta < 0 || tb < 0 || tc < 0) return false;
  if ((ta + tb + tc) % 2 != 0) return false;
  return tc >= std::abs(ta - tb) && tc <= ta + tb;
}

namespace {

// log(n!) for integer n >= 0, in extended precision: the Racah sum alternates
// and cancels, so the terms carry a few guard digits beyond double.
long double log_factorial(int n) {
  static const std::vector<long double> table = [] {
    std::vector<long double> t(512, 0.0L);
    for (std::size_t i = 1; i < t.size(); ++i)
      t[i] = t[i - 1] + std::log(static_cast<long double>(i));
    return t;
  }();
  if (n < static_cast<int>(table.size())) return table[static_cast<std::size_t>(n)];
  return std::lgamma(static_cast<long double>(n) + 1.0L);
}

// log Delta(abc) = 1/2 log[(a+b-c)!(a-b+c)!(-a+b+c)!/(a+b+c+1)!], all in twice units.
long double log_delta(int ta, int tb, int tc) {
  return 0.5 * (log_factorial((ta + tb - tc) / 2) + log_factorial((ta - tb + tc) / 2) +
                log_factorial((-ta + tb + tc) / 2) - log_factorial((ta + tb + tc) / 2 + 1));
}

}  // namespace

double wigner6j(HalfInt j1, HalfInt j2, HalfInt j3, HalfInt j4, HalfInt j5, HalfInt j6) {
  if (!triangle(j1, j2, j3) || !triangle(j1, j5, j6) || !triangle(j4, j2, j6) ||
      !triangle(j4, j5, j3))
    return 0.0;

  const int a = j1.twice(), b = j2.twice(), c = j3.twice();
  const int d = j4.twice(), e = j5.twice(), f = j6.twice();

  // Triad sums (integers once halved).
  const int s1 = (a + b + c) / 2, s2 = (a + e + f) / 2, s3 = (d + b + f) / 2, s4 = (d + e + c) / 2;
  // Quad sums.
  const int q1 = (a + b + d + e) / 2, q2 = (a + c + d + f) / 2, q3 = (b + c + e + f) / 2;

  const long double prefactor = log_delta(a, b, c) + log_delta(a, e, f) + log_delta(d, b, f) +
                           log_delta(d, e, c);

  const int tmin = std::max({s1, s2, s3, s4});
  const int tmax = std::min({q1, q2, q3});

  // Terms alternate in sign; accumulate relative to the largest magnitude to keep
  // exponentials in range.
  std::vector<long double> logs;
  logs.reserve(static_cast<std::size_t>(std::max(0, tmax - tmin + 1)));
  for (int t = tmin; t <= tmax; ++t) {
    logs.push_back(log_factorial(t + 1) - log_factorial(t - s1) - log_factorial(t - s2) -
                   log_factorial(t - s3) - log_factorial(t - s4) - log_factorial(q1 - t) -
                   log_factorial(q2 - t) - log_factorial(q3 - t));
  }
  if (logs.empty()) return 0.0;
  const long double lmax = *std::max_element(logs.begin(), logs.end());
  long double sum = 0.0L;
  for (std::size_t k = 0; k < logs.size(); ++k) {
    const int t = tmin + static_cast<int>(k);
    const long double sign = (t % 2 == 0) ? 1.0L : -1.0L;
    sum += sign * std::exp(logs[k] - lmax);
  }
  return static_cast<double>(sum * std::exp(lmax + prefactor));
}

double sixj_orthogonality_defect(HalfInt j1, HalfInt j2, HalfInt j3p, HalfInt j3) {
  double sum = 0.0;
  const int lo = std::abs(j1.twice() - j2.twice());
  const int hi = j1.twice() + j2.twice();
  for (int tj = lo; tj <= hi; tj += 2) {
    const HalfInt j = HalfInt::from_twice(tj);
    sum += j.multiplicity() * j3.multiplicity() * wigner6j(j1, j2, j, j1, j2, j3) *
           wigner6j(j1, j2, j, j1, j2, j3p);
  }
  const double delta = (j3 == j3p && triangle(j1, j2, j3)) ? 1.0 : 0.0;
  return std::abs(sum - delta);
}

}  // namespace faraday
