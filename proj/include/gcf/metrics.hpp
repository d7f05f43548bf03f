// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gcf Authors

#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gcf/provider.hpp"

namespace gcf {

struct CounterfactualPair;

struct Summary {
  double median = 0.0;
  double mean = 0.0;
  std::size_t count = 0;
};

/// Median and mean; zeros for an empty input.
Summary summarize(std::vector<double> values);

/// Side-effect metrics attached to a counterfactual pair. `extra` holds
/// externally computed scores (e.g. embedding similarity) by name.
struct MetricBundle {
  double normalized_lcp = 0.0;
  std::vector<double> per_token_log_ratio;
  Summary summary;
  nlohmann::json extra = nlohmann::json::object();

  nlohmann::json to_json() const;
};

/// Length of the longest common prefix divided by |observed|. Asymmetric:
/// always normalized by the first argument. Throws ArgumentError when
/// `observed` is empty.
double normalized_lcp(std::span<const TokenId> observed,
                      std::span<const TokenId> counterfactual);

/// Per position t: log p_a(w_t | prompt, w_<t) - log p_b(w_t | prompt, w_<t).
/// Throws UndefinedPosteriorError if some w_t is masked under either
/// provider.
std::vector<double> token_log_ratio(const LogitProvider& a,
                                    const LogitProvider& b,
                                    std::span<const TokenId> prompt,
                                    std::span<const TokenId> tokens);

/// Which texts of a pair are scored when aggregating ratios.
enum class RatioMode {
  kSharedPrefix,  // observed tokens only, both models on the observed prefix
  kPairedText,    // observed and counterfactual texts, each under both models
};

/// Maps a token to the label ratios are aggregated under. The default is
/// the vocabulary symbol, i.e. token-level aggregation.
using JoinRule = std::function<std::string(TokenId)>;

/// Mergeable per-label sums of log ratios.
class RatioAccumulator {
 public:
  void add(const std::string& label, TokenId id, double ratio);
  void merge(const RatioAccumulator& other);

  struct Entry {
    double sum = 0.0;
    std::size_t count = 0;
    TokenId min_id = 0;
  };
  const std::map<std::string, Entry>& entries() const { return entries_; }

 private:
  std::map<std::string, Entry> entries_;
};

struct RankedRatios {
  /// (label, mean log ratio) pairs; highest means first.
  std::vector<std::pair<std::string, double>> top_increased;
  /// Lowest means first.
  std::vector<std::pair<std::string, double>> top_decreased;
  std::map<std::string, double> means;
};

/// Ranks labels by mean ratio; ties go to the label with the lower token id.
RankedRatios rank_ratios(const RatioAccumulator& acc, std::size_t top_n);

/// Mean of token_log_ratio(a, b, ...) per symbol over every scored
/// occurrence in `records`, ranked.
RankedRatios aggregate_ratios(std::span<const CounterfactualPair> records,
                              const LogitProvider& a, const LogitProvider& b,
                              std::size_t top_n,
                              RatioMode mode = RatioMode::kSharedPrefix,
                              const JoinRule& join = {});

/// Counts occurrences of any of `targets` in `tokens`.
std::size_t count_tokens(std::span<const TokenId> tokens,
                         std::span<const TokenId> targets);

}  // namespace gcf
