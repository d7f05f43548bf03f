// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gcf Authors

#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <span>
#include <vector>

namespace gcf::stats {

/// Kolmogorov-Smirnov statistic of `samples` against a continuous CDF.
double ks_distance(std::vector<double> samples,
                   const std::function<double(double)>& cdf);

/// Two-sample Kolmogorov-Smirnov statistic.
double ks_distance_two_sample(std::vector<double> a, std::vector<double> b);

/// Asymptotic critical value of the one-sample KS statistic at level alpha.
double ks_critical_value(std::size_t n, double alpha);

/// Total variation distance between two distributions over the same keys.
/// Missing keys count as probability 0.
template <typename Key>
double total_variation(const std::map<Key, double>& p,
                       const std::map<Key, double>& q) {
  double acc = 0.0;
  auto ip = p.begin();
  auto iq = q.begin();
  while (ip != p.end() || iq != q.end()) {
    if (iq == q.end() || (ip != p.end() && ip->first < iq->first)) {
      acc += std::abs(ip->second);
      ++ip;
    } else if (ip == p.end() || iq->first < ip->first) {
      acc += std::abs(iq->second);
      ++iq;
    } else {
      acc += std::abs(ip->second - iq->second);
      ++ip;
      ++iq;
    }
  }
  return 0.5 * acc;
}

double total_variation(std::span<const double> p, std::span<const double> q);

/// Normalizes counts to frequencies.
template <typename Key>
std::map<Key, double> frequencies(const std::map<Key, std::size_t>& counts) {
  double total = 0.0;
  for (const auto& [_, c] : counts) total += static_cast<double>(c);
  std::map<Key, double> out;
  for (const auto& [k, c] : counts) out[k] = static_cast<double>(c) / total;
  return out;
}

}  // namespace gcf::stats
