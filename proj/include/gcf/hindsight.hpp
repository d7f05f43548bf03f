// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gcf Authors

#pragma once

#include <memory>
#include <optional>
#include <string>

#include "gcf/gsem.hpp"
#include "gcf/metrics.hpp"

namespace gcf {

/// An observed continuation and its counterfactual under an intervened
/// provider, both decoded from the same noise.
struct CounterfactualPair {
  TokenSeq prompt;
  TokenSeq observed;
  TokenSeq counterfactual;
  std::shared_ptr<const NoiseRecord> noise;
  /// Where the noise was persisted, if it was.
  std::string noise_ref;
  std::string original_descriptor;
  std::string counterfactual_descriptor;
  StopReason observed_stop = StopReason::kCap;
  StopReason counterfactual_stop = StopReason::kCap;
  std::optional<MetricBundle> metrics;
};

/// Fills `row` with a draw of one position's noise conditioned on
/// perturbed_argmax(logits, row) == observed. `logits[observed]` must not be
/// masked.
void sample_posterior_row(std::span<const double> logits, TokenId observed,
                          RandomStream& rng, std::span<double> row);

/// Samples the exogenous noise from its posterior given that `provider`
/// emitted `observed` after `prompt`.
///
/// At each position the observed symbol's perturbation is a fresh standard
/// Gumbel draw; every other symbol's perturbation is drawn truncated so that
/// its perturbed score cannot exceed the observed symbol's. The result
/// satisfies logits[j] + noise[t][j] <= logits[w] + noise[t][w] exactly in
/// floating point (strictly when j < w, matching the argmax tie rule).
///
/// Throws UndefinedPosteriorError when an observed symbol is masked in its
/// context, DataError on unknown ids or an EOS before the last position.
NoiseRecord infer_posterior_noise(const LogitProvider& provider,
                                  std::span<const TokenId> prompt,
                                  std::span<const TokenId> observed,
                                  RandomStream& rng);

/// Regenerates `observed` under `counterfactual_provider` with noise drawn
/// from the posterior under `original`. Rows past the observed length are
/// fresh prior draws. max_len == observed.size() reproduces the fixed-length
/// algorithm exactly.
CounterfactualPair counterfactual(const LogitProvider& original,
                                  const LogitProvider& counterfactual_provider,
                                  std::span<const TokenId> prompt,
                                  std::span<const TokenId> observed,
                                  std::size_t max_len, RandomStream& rng);

/// Draws one prior noise record of `max_len` rows and decodes it under both
/// providers.
CounterfactualPair joint_sample(const LogitProvider& original,
                                const LogitProvider& counterfactual_provider,
                                std::span<const TokenId> prompt,
                                std::size_t max_len, RandomStream& rng);

}  // namespace gcf
