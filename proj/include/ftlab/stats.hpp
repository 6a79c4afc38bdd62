#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ftlab {

struct WilsonInterval {
  double center = 0.0;  // plain failure fraction, not the Wilson midpoint
  double low = 0.0;
  double high = 0.0;
};

// Wilson score interval for a binomial proportion, z = 1.96 (95%).
inline WilsonInterval wilson_interval(long successes, long n, double z = 1.959963984540054) {
  if (n <= 0) throw std::invalid_argument("wilson interval needs n >= 1");
  if (successes < 0 || successes > n)
    throw std::invalid_argument("success count out of range");
  const double p = static_cast<double>(successes) / static_cast<double>(n);
  const double z2 = z * z;
  const double denom = 1.0 + z2 / static_cast<double>(n);
  const double mid = (p + z2 / (2.0 * static_cast<double>(n))) / denom;
  const double half =
      z *
      std::sqrt(p * (1.0 - p) / static_cast<double>(n) +
                z2 / (4.0 * static_cast<double>(n) * static_cast<double>(n))) /
      denom;
  WilsonInterval w;
  w.center = p;
  // The analytic endpoints at the extremes are exact; keep them free of
  // rounding fuzz from mid - half.
  w.low = successes == 0 ? 0.0 : std::max(0.0, mid - half);
  w.high = successes == n ? 1.0 : std::min(1.0, mid + half);
  return w;
}

inline bool intervals_overlap(const WilsonInterval& a, const WilsonInterval& b) {
  return a.low <= b.high && b.low <= a.high;
}

struct RateEstimate {
  long n_trials = 0;
  long failures = 0;
  double estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double mean_failure_time = std::numeric_limits<double>::quiet_NaN();
};

}  // namespace ftlab
