#pragma once

// Reference implementations used only by the tests. Each takes a different
// route from the library code it checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "msaplan/model.hpp"

namespace oracle {

// Smallest t with sum_i min(P_i t, K_i) >= C, found by bisection.
inline double tmin_bisection(double cost, std::span<const msa::DeviceClass> classes) {
  auto served = [&](double t) {
    double s = 0.0;
    for (const auto& c : classes) s += std::min(c.aggregate_performance() * t, c.aggregate_capacity());
    return s;
  };
  double cap = 0.0;
  for (const auto& c : classes) cap += c.aggregate_capacity();
  if (cap < cost) return std::numeric_limits<double>::infinity();
  double lo = 0.0;
  double hi = 1.0;
  while (served(hi) < cost) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (served(mid) >= cost ? hi : lo) = mid;
  }
  return hi;
}

// Hamilton apportionment in exact integer arithmetic (integer weights).
// Remainders are compared as fractions; ties go to the lower index.
inline std::vector<std::int64_t> hamilton(std::int64_t total, std::span<const std::int64_t> weights) {
  const std::int64_t sum = std::accumulate(weights.begin(), weights.end(), std::int64_t{0});
  std::vector<std::int64_t> out(weights.size());
  std::vector<std::pair<std::int64_t, std::size_t>> rem;  // numerator over `sum`
  std::int64_t given = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const __int128 num = static_cast<__int128>(total) * weights[i];
    out[i] = static_cast<std::int64_t>(num / sum);
    rem.emplace_back(static_cast<std::int64_t>(num % sum), i);
    given += out[i];
  }
  std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::int64_t k = 0; k < total - given; ++k) ++out[rem[static_cast<std::size_t>(k)].second];
  return out;
}

// Sample mean and population standard deviation via sums of powers.
inline std::pair<double, double> mean_sd(std::span<const double> xs) {
  long double s = 0.0L;
  long double s2 = 0.0L;
  for (double x : xs) {
    s += x;
    s2 += static_cast<long double>(x) * x;
  }
  const long double n = static_cast<long double>(xs.size());
  const long double mean = s / n;
  const long double var = std::max(0.0L, s2 / n - mean * mean);
  return {static_cast<double>(mean), static_cast<double>(std::sqrt(var))};
}

// Interior faces of an nx*ny*nz box counted per axis.
inline std::int64_t box_faces(std::int64_t nx, std::int64_t ny, std::int64_t nz) {
  return (nx - 1) * ny * nz + nx * (ny - 1) * nz + nx * ny * (nz - 1);
}

}  // namespace oracle
