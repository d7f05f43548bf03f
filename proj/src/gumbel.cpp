// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gcf Authors

#include "gcf/gumbel.hpp"

namespace gcf {

double sample_standard_gumbel(RandomStream& rng) {
  return -std::log(-std::log(rng.uniform_open()));
}

double sample_truncated_gumbel(double location, double bound,
                               RandomStream& rng) {
  const double g = location + sample_standard_gumbel(rng);
  return truncate_gumbel(g, bound);
}

}  // namespace gcf
