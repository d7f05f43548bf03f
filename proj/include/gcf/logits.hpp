// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gcf Authors

#pragma once

#include <span>
#include <vector>

#include "gcf/vocabulary.hpp"

namespace gcf {

/// Score assigned to symbols removed by a decoding transform. Finite so that
/// every sum stays NaN-free; exp(kMaskedLogit) underflows to exactly 0 and a
/// standard Gumbel perturbation cannot bridge the gap in practice.
inline constexpr double kMaskedLogit = -1e9;

inline bool is_masked(double score) { return score <= kMaskedLogit; }

/// Unnormalized next-symbol log-weights, one per vocabulary entry
/// (EOS included).
struct LogitVector {
  std::vector<double> scores;

  LogitVector() = default;
  explicit LogitVector(std::vector<double> s) : scores(std::move(s)) {}
  LogitVector(std::initializer_list<double> s) : scores(s) {}

  std::size_t size() const { return scores.size(); }
  double operator[](std::size_t i) const { return scores[i]; }
  double& operator[](std::size_t i) { return scores[i]; }
  std::span<const double> view() const { return scores; }

  friend bool operator==(const LogitVector&, const LogitVector&) = default;
};

/// log-sum-exp over the entries.
double log_sum_exp(std::span<const double> scores);

/// Normalized log-probabilities log softmax(scores).
std::vector<double> log_softmax(std::span<const double> scores);
std::vector<double> softmax(std::span<const double> scores);

/// Index of the maximum entry; ties go to the lowest index.
TokenId argmax(std::span<const double> scores);

/// Symbol ids ordered by descending score, ties broken by lower id.
std::vector<TokenId> rank_descending(std::span<const double> scores);

// Decoding transforms. Each is a deterministic map on logits; masked entries
// stay exactly at kMaskedLogit through every transform.

/// Keeps the k largest entries, masks the rest. Throws ArgumentError unless
/// 1 <= k <= size.
LogitVector apply_top_k(const LogitVector& logits, std::size_t k);

/// Keeps the smallest greedy-by-probability set whose softmax mass reaches
/// p. Throws ArgumentError unless 0 < p <= 1. p == 1 is the identity.
LogitVector apply_nucleus(const LogitVector& logits, double p);

/// Divides every unmasked entry by tau. Throws ArgumentError unless tau > 0.
LogitVector apply_temperature(const LogitVector& logits, double tau);

/// Adds bias[i] to every unmasked entry i. Throws DataError on a size
/// mismatch.
LogitVector apply_bias(const LogitVector& logits, std::span<const double> bias);

}  // namespace gcf
