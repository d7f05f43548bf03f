// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gcf Authors

#pragma once

#include <span>
#include <string>
#include <string_view>

#include "gcf/noise.hpp"
#include "gcf/provider.hpp"

namespace gcf {

/// Why a generation loop stopped.
enum class StopReason { kEos, kCap };

std::string_view to_string(StopReason r);
StopReason stop_reason_from_string(std::string_view s);

/// One decoded continuation. `tokens` excludes the prompt and contains EOS
/// at most once, as its final element.
struct Generation {
  TokenSeq prompt;
  TokenSeq tokens;
  NoiseRecord noise;
  std::string provider_descriptor;
  StopReason stop = StopReason::kCap;
};

/// argmax_j(logits[j] + noise[j]), ties to the lowest id. The sum is formed
/// as logits[j] + noise[j] everywhere in the library so that replay is
/// bit-exact.
TokenId perturbed_argmax(std::span<const double> logits,
                         std::span<const double> noise);

struct DecodeResult {
  TokenSeq tokens;
  StopReason stop = StopReason::kCap;
};

/// The structural equations: at generated position t emit the clamped
/// symbol if the provider clamps t, otherwise
/// perturbed_argmax(next_logits(prompt + emitted), noise.row(t)). Stops after
/// EOS or after `max_len` tokens. Throws ArgumentError if the loop needs a
/// noise row that does not exist or the widths disagree; a record shorter
/// than `max_len` is fine when EOS comes first.
DecodeResult generate_with_noise(const LogitProvider& provider,
                                 std::span<const TokenId> prompt,
                                 const NoiseRecord& noise, std::size_t max_len);

/// Ancestral sampling through the Gumbel-max trick. Noise rows are drawn
/// lazily, one per emitted position, and recorded in the result.
Generation generate(const LogitProvider& provider,
                    std::span<const TokenId> prompt, std::size_t max_len,
                    RandomStream& rng);

}  // namespace gcf
