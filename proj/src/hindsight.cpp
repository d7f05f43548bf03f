// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gcf Authors

#include "gcf/hindsight.hpp"

#include <cmath>

#include "gcf/error.hpp"
#include "gcf/gumbel.hpp"

namespace gcf {

namespace {

StopReason stop_of(std::span<const TokenId> tokens, TokenId eos) {
  return !tokens.empty() && tokens.back() == eos ? StopReason::kEos
                                                 : StopReason::kCap;
}

}  // namespace

void sample_posterior_row(std::span<const double> logits, TokenId observed,
                          RandomStream& rng, std::span<double> row) {
  const auto wi = static_cast<std::size_t>(observed);
  // The winning perturbed score is the max, which is Gumbel(log Z) and
  // independent of which symbol attained it.
  const double winner = log_sum_exp(logits) + sample_standard_gumbel(rng);
  row[wi] = winner - logits[wi];
  for (std::size_t j = 0; j < logits.size(); ++j) {
    if (j == wi) continue;
    const double bound = winner - logits[j];
    double u = truncate_gumbel(sample_standard_gumbel(rng), bound);
    // Rounding in the bound can leave the perturbed score one ulp above the
    // winner's; step down until argmax replay is exact.
    while (logits[j] + u > winner || (logits[j] + u == winner && j < wi)) {
      u = std::nextafter(u, -kInfinity);
    }
    row[j] = u;
  }
}

NoiseRecord infer_posterior_noise(const LogitProvider& provider,
                                  std::span<const TokenId> prompt,
                                  std::span<const TokenId> observed,
                                  RandomStream& rng) {
  const Vocabulary& vocab = provider.vocabulary();
  if (observed.empty()) throw DataError("observed string is empty");
  vocab.validate(prompt);
  vocab.validate(observed);
  for (std::size_t t = 0; t + 1 < observed.size(); ++t) {
    if (observed[t] == vocab.eos_id()) {
      throw DataError("observed string has EOS at position " +
                      std::to_string(t) + " before its end");
    }
  }

  const std::size_t width = vocab.size();
  NoiseRecord noise(observed.size(), width, NoiseOrigin::kPosterior,
                    rng.seed());
  TokenSeq context(prompt.begin(), prompt.end());
  for (std::size_t t = 0; t < observed.size(); ++t) {
    const TokenId w = observed[t];
    auto row = noise.row(t);

    if (auto clamped = provider.clamp_at(t)) {
      // A clamped position carries no information about its noise.
      if (*clamped != w) {
        throw UndefinedPosteriorError(
            "observed symbol at position " + std::to_string(t) +
            " contradicts the provider's clamp");
      }
      for (double& u : row) u = sample_standard_gumbel(rng);
      context.push_back(w);
      continue;
    }

    const LogitVector logits = provider.next_logits(context);
    if (logits.size() != width) {
      throw DataError("provider returned " + std::to_string(logits.size()) +
                      " logits, expected " + std::to_string(width));
    }
    const auto wi = static_cast<std::size_t>(w);
    if (is_masked(logits[wi])) {
      throw UndefinedPosteriorError(
          "observed symbol '" + vocab.symbol(w) + "' at position " +
          std::to_string(t) + " is masked; the string is impossible");
    }

    sample_posterior_row(logits.view(), w, rng, row);
    context.push_back(w);
  }
  return noise;
}

CounterfactualPair counterfactual(const LogitProvider& original,
                                  const LogitProvider& counterfactual_provider,
                                  std::span<const TokenId> prompt,
                                  std::span<const TokenId> observed,
                                  std::size_t max_len, RandomStream& rng) {
  if (max_len < 1) throw ArgumentError("max_len must be >= 1");
  if (counterfactual_provider.vocabulary().size() !=
      original.vocabulary().size()) {
    throw DataError("original and counterfactual vocabularies differ in size");
  }
  NoiseRecord noise = infer_posterior_noise(original, prompt, observed, rng);
  if (max_len > noise.positions()) {
    noise.extend_with_prior(max_len - noise.positions(), rng);
  }
  const DecodeResult cf =
      generate_with_noise(counterfactual_provider, prompt, noise, max_len);

  CounterfactualPair pair;
  pair.prompt.assign(prompt.begin(), prompt.end());
  pair.observed.assign(observed.begin(), observed.end());
  pair.counterfactual = cf.tokens;
  pair.noise = std::make_shared<const NoiseRecord>(std::move(noise));
  pair.original_descriptor = original.descriptor();
  pair.counterfactual_descriptor = counterfactual_provider.descriptor();
  pair.observed_stop = stop_of(observed, original.vocabulary().eos_id());
  pair.counterfactual_stop = cf.stop;
  return pair;
}

CounterfactualPair joint_sample(const LogitProvider& original,
                                const LogitProvider& counterfactual_provider,
                                std::span<const TokenId> prompt,
                                std::size_t max_len, RandomStream& rng) {
  if (max_len < 1) throw ArgumentError("max_len must be >= 1");
  if (counterfactual_provider.vocabulary().size() !=
      original.vocabulary().size()) {
    throw DataError("original and counterfactual vocabularies differ in size");
  }
  original.vocabulary().validate(prompt);
  auto noise = std::make_shared<const NoiseRecord>(
      sample_prior_noise(max_len, original.vocabulary(), rng));
  const DecodeResult obs =
      generate_with_noise(original, prompt, *noise, max_len);
  const DecodeResult cf =
      generate_with_noise(counterfactual_provider, prompt, *noise, max_len);

  CounterfactualPair pair;
  pair.prompt.assign(prompt.begin(), prompt.end());
  pair.observed = obs.tokens;
  pair.counterfactual = cf.tokens;
  pair.noise = std::move(noise);
  pair.original_descriptor = original.descriptor();
  pair.counterfactual_descriptor = counterfactual_provider.descriptor();
  pair.observed_stop = obs.stop;
  pair.counterfactual_stop = cf.stop;
  return pair;
}

}  // namespace gcf
