// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gcf Authors

#include <gtest/gtest.h>

#include <cmath>

#include "gcf/error.hpp"
#include "gcf/hindsight.hpp"
#include "gcf/metrics.hpp"
#include "test_support.hpp"

namespace gcf {
namespace {

using testing::constant_table;
using testing::make_vocab;
using testing::random_table;

CounterfactualPair pair_of(TokenSeq observed, TokenSeq cf) {
  CounterfactualPair p;
  p.observed = std::move(observed);
  p.counterfactual = std::move(cf);
  return p;
}

TEST(Lcp, HandCountedCases) {
  EXPECT_DOUBLE_EQ(normalized_lcp(TokenSeq{0, 1, 2}, TokenSeq{0, 1, 3, 4}),
                   2.0 / 3.0);
  EXPECT_EQ(normalized_lcp(TokenSeq{0, 1, 2}, TokenSeq{0, 1, 2}), 1.0);
  EXPECT_EQ(normalized_lcp(TokenSeq{0, 1, 2}, TokenSeq{1, 1, 2}), 0.0);
  EXPECT_EQ(normalized_lcp(TokenSeq{0, 1}, TokenSeq{}), 0.0);
  EXPECT_THROW(normalized_lcp(TokenSeq{}, TokenSeq{0}), ArgumentError);
}

TEST(Lcp, NormalizedByFirstArgument) {
  EXPECT_DOUBLE_EQ(normalized_lcp(TokenSeq{0, 1}, TokenSeq{0, 1, 2, 3}), 1.0);
  EXPECT_DOUBLE_EQ(normalized_lcp(TokenSeq{0, 1, 2, 3}, TokenSeq{0, 1}), 0.5);
}

TEST(Lcp, AlwaysInUnitInterval) {
  RandomStream rng(1);
  for (int i = 0; i < 1000; ++i) {
    TokenSeq a(1 + rng.uniform_index(6));
    TokenSeq b(rng.uniform_index(6));
    for (auto& t : a) t = static_cast<TokenId>(rng.uniform_index(2));
    for (auto& t : b) t = static_cast<TokenId>(rng.uniform_index(2));
    const double v = normalized_lcp(a, b);
    ASSERT_GE(v, 0.0);
    ASSERT_LE(v, 1.0);
  }
}

TEST(LogRatio, SelfIsExactlyZero) {
  RandomStream rng(2);
  auto lm = random_table(5, 3, rng);
  const auto g = generate(*lm, {}, 10, rng);
  for (double r : token_log_ratio(*lm, *lm, {}, g.tokens)) EXPECT_EQ(r, 0.0);
}

TEST(LogRatio, AntisymmetricAndShiftInvariant) {
  RandomStream rng(3);
  for (int i = 0; i < 200; ++i) {
    auto a = random_table(4, 2, rng);
    auto b = random_table(4, 2, rng);
    const auto g = generate(*a, {}, 8, rng);
    const auto ab = token_log_ratio(*a, *b, {}, g.tokens);
    const auto ba = token_log_ratio(*b, *a, {}, g.tokens);
    ASSERT_EQ(ab.size(), g.tokens.size());
    for (std::size_t t = 0; t < ab.size(); ++t) ASSERT_EQ(ab[t], -ba[t]);
    auto shifted = with_bias(a, {-2.5, -2.5, -2.5, -2.5});
    for (double r : token_log_ratio(*a, *shifted, {}, g.tokens)) {
      ASSERT_NEAR(r, 0.0, 1e-12);
    }
  }
}

TEST(LogRatio, BiasMatchesClosedFormSoftmax) {
  RandomStream rng(4);
  auto a = random_table(4, 2, rng);
  const double delta = 1.75;
  constexpr TokenId kSym = 1;
  auto b = with_bias(a, {0.0, delta, 0.0, 0.0});
  const TokenSeq tokens{1, 0, 1, 2, 1, 3};
  const auto r = token_log_ratio(*a, *b, {}, tokens);
  TokenSeq ctx;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    if (tokens[t] == kSym) {
      const auto phi = a->next_logits(ctx).scores;
      auto phi_b = phi;
      phi_b[kSym] += delta;
      double za = 0.0;
      double zb = 0.0;
      for (std::size_t j = 0; j < phi.size(); ++j) {
        za += std::exp(phi[j]);
        zb += std::exp(phi_b[j]);
      }
      const double expected = (phi[kSym] - std::log(za)) -
                              (phi_b[kSym] - std::log(zb));
      EXPECT_LT(r[t], 0.0);
      EXPECT_NEAR(r[t], expected, 1e-12);
    }
    ctx.push_back(tokens[t]);
  }
}

TEST(LogRatio, MaskedTokenIsUndefined) {
  auto a = constant_table({0.0, 1.0, 2.0}, make_vocab(3));
  auto b = with_top_k(a, 1);
  EXPECT_THROW(token_log_ratio(*a, *b, {}, TokenSeq{0}),
               UndefinedPosteriorError);
}

TEST(Aggregate, IdenticalProvidersGiveZeroMeansOrderedById) {
  RandomStream rng(5);
  auto lm = random_table(4, 2, rng);
  std::vector<CounterfactualPair> records{pair_of({2, 1, 0, 3}, {2, 1, 0, 3}),
                                          pair_of({1, 1, 3}, {1, 1, 3})};
  const auto ranked = aggregate_ratios(records, *lm, *lm, 10);
  ASSERT_EQ(ranked.top_increased.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(ranked.top_increased[i].second, 0.0);
    EXPECT_EQ(ranked.top_increased[i].first,
              lm->vocabulary().symbol(static_cast<TokenId>(i)));
    EXPECT_EQ(ranked.top_decreased[i].first,
              lm->vocabulary().symbol(static_cast<TokenId>(i)));
  }
}

TEST(Aggregate, SingleOccurrenceMeansEqualRawRatios) {
  RandomStream rng(6);
  auto a = random_table(4, 2, rng);
  auto b = random_table(4, 2, rng);
  const TokenSeq observed{2, 0, 1, 3};
  std::vector<CounterfactualPair> records{pair_of(observed, observed)};
  const auto raw = token_log_ratio(*a, *b, {}, observed);
  const auto ranked = aggregate_ratios(records, *a, *b, 10);
  for (std::size_t t = 0; t < observed.size(); ++t) {
    EXPECT_EQ(ranked.means.at(a->vocabulary().symbol(observed[t])), raw[t]);
  }
}

TEST(Aggregate, BoostedSymbolTopsDecreasedList) {
  const Vocabulary vocab = make_vocab(3);
  auto a = constant_table({0.0, 0.0, 0.0}, vocab);
  auto b = with_bias(a, {5.0, 0.0, 0.0});
  std::vector<CounterfactualPair> records{pair_of({0, 1, 2}, {0, 0, 2}),
                                          pair_of({1, 0, 2}, {0, 0, 2})};
  const auto ranked = aggregate_ratios(records, *a, *b, 1);
  ASSERT_EQ(ranked.top_decreased.size(), 1u);
  EXPECT_EQ(ranked.top_decreased[0].first, "s0");
  EXPECT_LT(ranked.top_decreased[0].second, 0.0);
  const auto flipped = aggregate_ratios(records, *b, *a, 1);
  EXPECT_EQ(flipped.top_increased[0].first, "s0");
}

TEST(Aggregate, PairedTextScoresBothTexts) {
  const Vocabulary vocab = make_vocab(3);
  auto a = constant_table({0.0, 0.0, 0.0}, vocab);
  auto b = with_bias(a, {0.0, 2.0, 0.0});
  // s1 only appears in the counterfactual text.
  std::vector<CounterfactualPair> records{pair_of({0, 2}, {1, 2})};
  const auto shared = aggregate_ratios(records, *a, *b, 5);
  EXPECT_EQ(shared.means.count("s1"), 0u);
  const auto paired =
      aggregate_ratios(records, *a, *b, 5, RatioMode::kPairedText);
  EXPECT_EQ(paired.means.count("s1"), 1u);
  EXPECT_LT(paired.means.at("s1"), 0.0);
}

TEST(Aggregate, JoinRuleGroupsLabels) {
  const Vocabulary vocab = make_vocab(4);
  auto a = constant_table({0.0, 0.0, 0.0, 0.0}, vocab);
  auto b = with_bias(a, {1.0, 1.0, 0.0, 0.0});
  std::vector<CounterfactualPair> records{pair_of({0, 1, 2}, {0, 1, 2})};
  const JoinRule join = [](TokenId t) {
    return t < 2 ? std::string("low") : std::string("high");
  };
  const auto ranked =
      aggregate_ratios(records, *a, *b, 5, RatioMode::kSharedPrefix, join);
  EXPECT_EQ(ranked.means.size(), 2u);
  EXPECT_EQ(ranked.top_decreased[0].first, "low");
}

TEST(Accumulator, MergeIsAssociative) {
  RandomStream rng(7);
  RatioAccumulator parts[3];
  RatioAccumulator all;
  for (int i = 0; i < 300; ++i) {
    const auto id = static_cast<TokenId>(rng.uniform_index(5));
    // Dyadic values keep the sums exact regardless of grouping.
    const double r = static_cast<double>(rng.uniform_index(64)) / 8.0 - 4.0;
    const std::string label = "w" + std::to_string(id);
    parts[i % 3].add(label, id, r);
    all.add(label, id, r);
  }
  RatioAccumulator left = parts[0];
  left.merge(parts[1]);
  left.merge(parts[2]);
  RatioAccumulator right = parts[1];
  right.merge(parts[2]);
  RatioAccumulator outer = parts[0];
  outer.merge(right);
  for (const auto* acc : {&left, &outer}) {
    ASSERT_EQ(acc->entries().size(), all.entries().size());
    for (const auto& [label, e] : all.entries()) {
      EXPECT_EQ(acc->entries().at(label).sum, e.sum);
      EXPECT_EQ(acc->entries().at(label).count, e.count);
      EXPECT_EQ(acc->entries().at(label).min_id, e.min_id);
    }
  }
}

TEST(Summary, MedianAndMean) {
  const auto s = summarize({3.0, 1.0, 2.0, 10.0});
  EXPECT_EQ(s.median, 2.5);
  EXPECT_EQ(s.mean, 4.0);
  EXPECT_EQ(s.count, 4u);
  EXPECT_EQ(summarize({}).count, 0u);
}

TEST(Tokens, CountTargets) {
  EXPECT_EQ(count_tokens(TokenSeq{0, 1, 2, 1, 1}, TokenSeq{1, 2}), 4u);
  EXPECT_EQ(count_tokens(TokenSeq{}, TokenSeq{1}), 0u);
}

}  // namespace
}  // namespace gcf
