// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gcf Authors

#include "gcf/gsem.hpp"

#include "gcf/error.hpp"
#include "gcf/gumbel.hpp"

namespace gcf {

std::string_view to_string(StopReason r) {
  return r == StopReason::kEos ? "eos" : "cap";
}

StopReason stop_reason_from_string(std::string_view s) {
  if (s == "eos") return StopReason::kEos;
  if (s == "cap") return StopReason::kCap;
  throw DataError("unknown stop reason '" + std::string(s) + "'");
}

TokenId perturbed_argmax(std::span<const double> logits,
                         std::span<const double> noise) {
  std::size_t best = 0;
  double best_score = logits[0] + noise[0];
  for (std::size_t j = 1; j < logits.size(); ++j) {
    const double score = logits[j] + noise[j];
    if (score > best_score) {
      best_score = score;
      best = j;
    }
  }
  return static_cast<TokenId>(best);
}

namespace {

void check_width(const LogitVector& logits, std::size_t width) {
  if (logits.size() != width) {
    throw DataError("provider returned " + std::to_string(logits.size()) +
                    " logits, expected " + std::to_string(width));
  }
}

}  // namespace

DecodeResult generate_with_noise(const LogitProvider& provider,
                                 std::span<const TokenId> prompt,
                                 const NoiseRecord& noise,
                                 std::size_t max_len) {
  const Vocabulary& vocab = provider.vocabulary();
  if (noise.width() != vocab.size()) {
    throw ArgumentError("noise width " + std::to_string(noise.width()) +
                        " != vocabulary size " + std::to_string(vocab.size()));
  }
  TokenSeq context(prompt.begin(), prompt.end());
  const std::size_t prompt_len = context.size();
  DecodeResult out;
  for (std::size_t t = 0; t < max_len; ++t) {
    if (t >= noise.positions()) {
      throw ArgumentError("noise has " + std::to_string(noise.positions()) +
                          " rows, generation reached position " +
                          std::to_string(t));
    }
    TokenId next;
    if (auto clamped = provider.clamp_at(t)) {
      next = *clamped;
    } else {
      const LogitVector logits = provider.next_logits(context);
      check_width(logits, vocab.size());
      next = perturbed_argmax(logits.view(), noise.row(t));
    }
    context.push_back(next);
    if (next == vocab.eos_id()) {
      out.stop = StopReason::kEos;
      break;
    }
  }
  out.tokens.assign(context.begin() + static_cast<std::ptrdiff_t>(prompt_len),
                    context.end());
  return out;
}

Generation generate(const LogitProvider& provider,
                    std::span<const TokenId> prompt, std::size_t max_len,
                    RandomStream& rng) {
  if (max_len < 1) throw ArgumentError("max_len must be >= 1");
  const Vocabulary& vocab = provider.vocabulary();
  vocab.validate(prompt);
  Generation g;
  g.prompt.assign(prompt.begin(), prompt.end());
  g.provider_descriptor = provider.descriptor();
  g.noise = NoiseRecord(0, vocab.size(), NoiseOrigin::kPrior, rng.seed());

  TokenSeq context = g.prompt;
  for (std::size_t t = 0; t < max_len; ++t) {
    g.noise.extend_with_prior(1, rng);
    TokenId next;
    if (auto clamped = provider.clamp_at(t)) {
      next = *clamped;
    } else {
      const LogitVector logits = provider.next_logits(context);
      check_width(logits, vocab.size());
      next = perturbed_argmax(logits.view(), g.noise.row(t));
    }
    context.push_back(next);
    g.tokens.push_back(next);
    if (next == vocab.eos_id()) {
      g.stop = StopReason::kEos;
      break;
    }
  }
  return g;
}

}  // namespace gcf
