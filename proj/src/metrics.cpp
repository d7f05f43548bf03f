// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gcf Authors

#include "gcf/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "gcf/error.hpp"
#include "gcf/hindsight.hpp"

namespace gcf {

Summary summarize(std::vector<double> values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) /
           static_cast<double>(values.size());
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  s.median = values.size() % 2 ? values[mid]
                               : 0.5 * (values[mid - 1] + values[mid]);
  return s;
}

nlohmann::json MetricBundle::to_json() const {
  nlohmann::json j = {
      {"normalized_lcp", normalized_lcp},
      {"per_token_log_ratio", per_token_log_ratio},
      {"summary",
       {{"median", summary.median},
        {"mean", summary.mean},
        {"count", summary.count}}}};
  for (const auto& [k, v] : extra.items()) j[k] = v;
  return j;
}

double normalized_lcp(std::span<const TokenId> observed,
                      std::span<const TokenId> counterfactual) {
  if (observed.empty()) {
    throw ArgumentError("normalized LCP of an empty observed string");
  }
  const auto [o, _] = std::mismatch(observed.begin(), observed.end(),
                                    counterfactual.begin(),
                                    counterfactual.end());
  return static_cast<double>(o - observed.begin()) /
         static_cast<double>(observed.size());
}

std::vector<double> token_log_ratio(const LogitProvider& a,
                                    const LogitProvider& b,
                                    std::span<const TokenId> prompt,
                                    std::span<const TokenId> tokens) {
  TokenSeq context(prompt.begin(), prompt.end());
  std::vector<double> out;
  out.reserve(tokens.size());
  for (TokenId w : tokens) {
    const LogitVector la = a.next_logits(context);
    const LogitVector lb = b.next_logits(context);
    const auto wi = static_cast<std::size_t>(w);
    if (wi >= la.size() || wi >= lb.size()) {
      throw DataError("token id " + std::to_string(w) + " out of range");
    }
    if (is_masked(la[wi]) || is_masked(lb[wi])) {
      throw UndefinedPosteriorError("token id " + std::to_string(w) +
                                    " is masked; log ratio undefined");
    }
    const double lpa = la[wi] - log_sum_exp(la.view());
    const double lpb = lb[wi] - log_sum_exp(lb.view());
    out.push_back(lpa - lpb);
    context.push_back(w);
  }
  return out;
}

void RatioAccumulator::add(const std::string& label, TokenId id,
                           double ratio) {
  auto [it, inserted] = entries_.try_emplace(label);
  Entry& e = it->second;
  e.sum += ratio;
  e.count += 1;
  e.min_id = inserted ? id : std::min(e.min_id, id);
}

void RatioAccumulator::merge(const RatioAccumulator& other) {
  for (const auto& [label, o] : other.entries_) {
    auto [it, inserted] = entries_.try_emplace(label, o);
    if (inserted) continue;
    it->second.sum += o.sum;
    it->second.count += o.count;
    it->second.min_id = std::min(it->second.min_id, o.min_id);
  }
}

RankedRatios rank_ratios(const RatioAccumulator& acc, std::size_t top_n) {
  struct Row {
    std::string label;
    double mean;
    TokenId min_id;
  };
  std::vector<Row> rows;
  RankedRatios out;
  for (const auto& [label, e] : acc.entries()) {
    const double mean = e.sum / static_cast<double>(e.count);
    rows.push_back({label, mean, e.min_id});
    out.means.emplace(label, mean);
  }
  const std::size_t n = std::min(top_n, rows.size());
  auto by_id = [](const Row& x, const Row& y) { return x.min_id < y.min_id; };

  std::vector<Row> inc = rows;
  std::sort(inc.begin(), inc.end(), [&](const Row& x, const Row& y) {
    return x.mean != y.mean ? x.mean > y.mean : by_id(x, y);
  });
  std::vector<Row> dec = rows;
  std::sort(dec.begin(), dec.end(), [&](const Row& x, const Row& y) {
    return x.mean != y.mean ? x.mean < y.mean : by_id(x, y);
  });
  for (std::size_t i = 0; i < n; ++i) {
    out.top_increased.emplace_back(inc[i].label, inc[i].mean);
    out.top_decreased.emplace_back(dec[i].label, dec[i].mean);
  }
  return out;
}

RankedRatios aggregate_ratios(std::span<const CounterfactualPair> records,
                              const LogitProvider& a, const LogitProvider& b,
                              std::size_t top_n, RatioMode mode,
                              const JoinRule& join) {
  const Vocabulary& vocab = a.vocabulary();
  auto label_of = [&](TokenId id) {
    return join ? join(id) : vocab.symbol(id);
  };
  RatioAccumulator acc;
  auto score = [&](std::span<const TokenId> prompt,
                   std::span<const TokenId> tokens) {
    const auto ratios = token_log_ratio(a, b, prompt, tokens);
    for (std::size_t t = 0; t < tokens.size(); ++t) {
      acc.add(label_of(tokens[t]), tokens[t], ratios[t]);
    }
  };
  for (const auto& r : records) {
    score(r.prompt, r.observed);
    if (mode == RatioMode::kPairedText) score(r.prompt, r.counterfactual);
  }
  return rank_ratios(acc, top_n);
}

std::size_t count_tokens(std::span<const TokenId> tokens,
                         std::span<const TokenId> targets) {
  return static_cast<std::size_t>(
      std::count_if(tokens.begin(), tokens.end(), [&](TokenId t) {
        return std::find(targets.begin(), targets.end(), t) != targets.end();
      }));
}

}  // namespace gcf
