// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gcf Authors

#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "gcf/provider.hpp"
#include "gcf/random.hpp"

namespace gcf {

/// Exact string distribution of a provider, truncated at `cap` tokens.
/// Keys are EOS-terminated strings of length <= cap, or cap-length strings
/// without EOS (the cap bucket). Probabilities sum to 1.
struct ExactDistribution {
  std::map<TokenSeq, double> entries;
  std::size_t cap = 0;
  TokenId eos_id = 0;

  double total() const;
  /// Mass of strings cut off by the cap.
  double cap_mass() const;
};

inline constexpr std::size_t kMaxEnumeratedStrings = 1'000'000;

/// Chain-rule enumeration of every continuation of `prompt` up to `cap`
/// tokens. Honors clamps. Throws ArgumentError when |V|^cap exceeds
/// kMaxEnumeratedStrings.
ExactDistribution enumerate_distribution(const LogitProvider& provider,
                                         std::span<const TokenId> prompt,
                                         std::size_t cap);

struct StabilityResult {
  std::size_t trials = 0;
  std::size_t violations = 0;
  /// Trials where the counterfactual symbol differed from the observed one.
  std::size_t changed = 0;
};

/// True when softmax(phi_cf)[i] / softmax(phi)[i] >=
/// softmax(phi_cf)[j] / softmax(phi)[j], evaluated in log space.
bool stability_forbids(std::span<const double> phi,
                       std::span<const double> phi_cf, TokenId observed,
                       TokenId counterfactual);

/// Single-step Gumbel-max counterfactuals: observe i ~ softmax(phi), draw
/// the posterior noise, decode under phi_cf, and count outcomes j != i that
/// the counterfactual-stability predicate forbids.
StabilityResult check_counterfactual_stability(std::span<const double> phi,
                                               std::span<const double> phi_cf,
                                               std::size_t trials,
                                               RandomStream& rng);

/// Inverse-CDF sampling of softmax(phi) with symbols laid out on [0, 1) in
/// `ordering`.
TokenId inverse_cdf_sample(std::span<const double> phi,
                           std::span<const TokenId> ordering,
                           RandomStream& rng);

/// Counterfactual under the inverse-CDF mechanism: the latent uniform is
/// drawn from its exact posterior (uniform on the observed symbol's
/// sub-interval) and pushed through the inverse CDF of phi_cf with the same
/// ordering. Throws ArgumentError if `ordering` is not a permutation.
TokenId inverse_cdf_counterfactual(std::span<const double> phi,
                                   std::span<const double> phi_cf,
                                   TokenId observed,
                                   std::span<const TokenId> ordering,
                                   RandomStream& rng);

/// Single-step Gumbel-max counterfactual of `observed`.
TokenId gumbel_counterfactual(std::span<const double> phi,
                              std::span<const double> phi_cf, TokenId observed,
                              RandomStream& rng);

struct StabilityWitness {
  std::vector<double> phi;
  std::vector<double> phi_cf;
  std::vector<TokenId> ordering;
  TokenId observed = 0;
  TokenId counterfactual = 0;
};

/// Randomized search over `width`-symbol instances for an inverse-CDF
/// counterfactual that the stability predicate forbids.
std::optional<StabilityWitness> find_inverse_cdf_witness(std::size_t width,
                                                         std::size_t attempts,
                                                         RandomStream& rng);

}  // namespace gcf
