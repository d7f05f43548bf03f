// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gcf Authors

#include "gcf/logits.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gcf/error.hpp"

namespace gcf {

double log_sum_exp(std::span<const double> scores) {
  if (scores.empty()) return -std::numeric_limits<double>::infinity();
  const double hi = *std::max_element(scores.begin(), scores.end());
  double acc = 0.0;
  for (double s : scores) acc += std::exp(s - hi);
  return hi + std::log(acc);
}

std::vector<double> log_softmax(std::span<const double> scores) {
  const double lse = log_sum_exp(scores);
  std::vector<double> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] - lse;
  return out;
}

std::vector<double> softmax(std::span<const double> scores) {
  auto out = log_softmax(scores);
  for (double& v : out) v = std::exp(v);
  return out;
}

TokenId argmax(std::span<const double> scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return static_cast<TokenId>(best);
}

std::vector<TokenId> rank_descending(std::span<const double> scores) {
  std::vector<TokenId> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](TokenId a, TokenId b) {
    return scores[static_cast<std::size_t>(a)] >
           scores[static_cast<std::size_t>(b)];
  });
  return order;
}

LogitVector apply_top_k(const LogitVector& logits, std::size_t k) {
  if (k < 1 || k > logits.size()) {
    throw ArgumentError("top-k: k=" + std::to_string(k) +
                        " outside [1, " + std::to_string(logits.size()) + "]");
  }
  const auto order = rank_descending(logits.view());
  LogitVector out = logits;
  for (std::size_t r = k; r < order.size(); ++r) {
    out[static_cast<std::size_t>(order[r])] = kMaskedLogit;
  }
  return out;
}

LogitVector apply_nucleus(const LogitVector& logits, double p) {
  if (!(p > 0.0 && p <= 1.0)) {
    throw ArgumentError("nucleus: p=" + std::to_string(p) +
                        " outside (0, 1]");
  }
  if (p == 1.0) return logits;
  const auto probs = softmax(logits.view());
  const auto order = rank_descending(logits.view());
  LogitVector out = logits;
  double mass = 0.0;
  std::size_t kept = 0;
  while (kept < order.size() && mass < p) {
    mass += probs[static_cast<std::size_t>(order[kept])];
    ++kept;
  }
  for (std::size_t r = kept; r < order.size(); ++r) {
    out[static_cast<std::size_t>(order[r])] = kMaskedLogit;
  }
  return out;
}

LogitVector apply_temperature(const LogitVector& logits, double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw ArgumentError("temperature must be positive and finite, got " +
                        std::to_string(tau));
  }
  LogitVector out = logits;
  for (double& s : out.scores) {
    if (!is_masked(s)) s /= tau;
  }
  return out;
}

LogitVector apply_bias(const LogitVector& logits,
                       std::span<const double> bias) {
  if (bias.size() != logits.size()) {
    throw DataError("bias width " + std::to_string(bias.size()) +
                    " != logit width " + std::to_string(logits.size()));
  }
  LogitVector out = logits;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!is_masked(out[i])) out[i] += bias[i];
  }
  return out;
}

}  // namespace gcf
