// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gcf Authors

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "gcf/error.hpp"
#include "gcf/gsem.hpp"
#include "gcf/gumbel.hpp"
#include "gcf/logits.hpp"
#include "gcf/provider.hpp"
#include "gcf/stats.hpp"
#include "test_support.hpp"

namespace gcf {
namespace {

using testing::constant_table;
using testing::make_vocab;

// Empirical Gumbel-max argmax frequencies.
std::vector<double> gumbel_max_frequencies(const LogitVector& logits,
                                           std::size_t draws,
                                           std::uint64_t seed) {
  RandomStream rng(seed);
  std::vector<double> counts(logits.size(), 0.0);
  std::vector<double> noise(logits.size());
  for (std::size_t n = 0; n < draws; ++n) {
    for (double& u : noise) u = sample_standard_gumbel(rng);
    counts[static_cast<std::size_t>(perturbed_argmax(logits.view(), noise))] +=
        1.0;
  }
  for (double& c : counts) c /= static_cast<double>(draws);
  return counts;
}

// Renormalized restriction of softmax(logits) to `keep`.
std::vector<double> restricted_softmax(const std::vector<double>& logits,
                                       const std::vector<std::size_t>& keep) {
  std::vector<double> out(logits.size(), 0.0);
  double z = 0.0;
  for (auto i : keep) z += std::exp(logits[i]);
  for (auto i : keep) out[i] = std::exp(logits[i]) / z;
  return out;
}

TEST(Softmax, NormalizesAndHandlesMask) {
  const auto p = softmax(std::vector<double>{0.0, std::log(3.0), kMaskedLogit});
  EXPECT_NEAR(p[0], 0.25, 1e-15);
  EXPECT_NEAR(p[1], 0.75, 1e-15);
  EXPECT_EQ(p[2], 0.0);
}

TEST(Argmax, TiesGoToLowestId) {
  EXPECT_EQ(argmax(std::vector<double>{1.0, 3.0, 3.0}), 1);
  EXPECT_EQ(rank_descending(std::vector<double>{2.0, 5.0, 2.0, 5.0}),
            (std::vector<TokenId>{1, 3, 0, 2}));
}

TEST(TopK, FullWidthIsIdentity) {
  const LogitVector l{0.5, -1.0, 2.0, 0.0};
  EXPECT_EQ(apply_top_k(l, 4), l);
}

TEST(TopK, MasksOutsideK) {
  const LogitVector out = apply_top_k(LogitVector{3.0, 1.0, 2.0}, 2);
  EXPECT_EQ(out, (LogitVector{3.0, kMaskedLogit, 2.0}));
}

TEST(TopK, IdempotentAndKeepsArgmax) {
  RandomStream rng(1);
  for (int i = 0; i < 200; ++i) {
    const LogitVector l(testing::random_logits(7, rng));
    const std::size_t k = 1 + rng.uniform_index(7);
    const LogitVector once = apply_top_k(l, k);
    EXPECT_EQ(apply_top_k(once, k), once);
    EXPECT_FALSE(is_masked(once[static_cast<std::size_t>(argmax(l.view()))]));
  }
}

TEST(TopK, TieBreaksByLowerId) {
  const LogitVector out = apply_top_k(LogitVector{1.0, 1.0, 1.0}, 2);
  EXPECT_EQ(out, (LogitVector{1.0, 1.0, kMaskedLogit}));
}

TEST(TopK, RejectsOutOfRangeK) {
  EXPECT_THROW(apply_top_k(LogitVector{1.0, 2.0}, 0), ArgumentError);
  EXPECT_THROW(apply_top_k(LogitVector{1.0, 2.0}, 3), ArgumentError);
}

TEST(TopK, GumbelMaxMatchesRenormalizedTopK) {
  const std::vector<double> logits{0.3, -0.4, 1.2, 0.9, -1.5};
  const LogitVector masked = apply_top_k(LogitVector(logits), 3);
  const auto freq = gumbel_max_frequencies(masked, 100000, 2);
  const auto exact = restricted_softmax(logits, {0, 2, 3});
  EXPECT_LT(stats::total_variation(freq, exact), 0.01);
}

TEST(Nucleus, OneIsIdentity) {
  const LogitVector l{0.5, -1.0, 2.0};
  EXPECT_EQ(apply_nucleus(l, 1.0), l);
}

TEST(Nucleus, KeepsSmallestSetReachingMass) {
  const LogitVector l{std::log(0.6), std::log(0.3), std::log(0.1)};
  EXPECT_EQ(apply_nucleus(l, 0.8),
            (LogitVector{std::log(0.6), std::log(0.3), kMaskedLogit}));
  EXPECT_EQ(apply_nucleus(l, 0.5),
            (LogitVector{std::log(0.6), kMaskedLogit, kMaskedLogit}));
}

TEST(Nucleus, RejectsOutOfRangeP) {
  EXPECT_THROW(apply_nucleus(LogitVector{1.0}, 0.0), ArgumentError);
  EXPECT_THROW(apply_nucleus(LogitVector{1.0}, 1.5), ArgumentError);
}

TEST(Nucleus, NeverMasksArgmax) {
  RandomStream rng(3);
  for (int i = 0; i < 200; ++i) {
    const LogitVector l(testing::random_logits(6, rng, 2.0));
    const double p = 0.01 + 0.98 * rng.uniform_open();
    const LogitVector out = apply_nucleus(l, p);
    EXPECT_FALSE(is_masked(out[static_cast<std::size_t>(argmax(l.view()))]));
  }
}

TEST(Nucleus, GumbelMaxMatchesRenormalizedNucleus) {
  const std::vector<double> logits{1.0, 0.2, -0.3, 0.8, -2.0};
  // Probabilities sorted: id0 .386, id3 .316, id1 .173, id2 .105, id4 .019;
  // p = 0.8 keeps {0, 3, 1}.
  const LogitVector masked = apply_nucleus(LogitVector(logits), 0.8);
  const auto freq = gumbel_max_frequencies(masked, 100000, 4);
  const auto exact = restricted_softmax(logits, {0, 1, 3});
  EXPECT_LT(stats::total_variation(freq, exact), 0.01);
}

TEST(Temperature, OneIsIdentity) {
  const LogitVector l{0.5, -1.0, 2.0};
  EXPECT_EQ(apply_temperature(l, 1.0), l);
}

TEST(Temperature, HighTemperatureApproachesUniform) {
  const auto p = softmax(apply_temperature(LogitVector{1.0, 2.0, 3.0}, 100.0).view());
  const std::vector<double> uniform(3, 1.0 / 3.0);
  EXPECT_LT(stats::total_variation(p, uniform), 0.02);
}

TEST(Temperature, PreservesArgmaxAndMask) {
  RandomStream rng(5);
  for (int i = 0; i < 100; ++i) {
    LogitVector l(testing::random_logits(5, rng));
    l[4] = kMaskedLogit;
    for (double tau : {0.01, 0.5, 3.0, 1e6}) {
      const LogitVector out = apply_temperature(l, tau);
      EXPECT_EQ(argmax(out.view()), argmax(l.view()));
      EXPECT_EQ(out[4], kMaskedLogit);
    }
  }
}

TEST(Temperature, RejectsNonPositive) {
  EXPECT_THROW(apply_temperature(LogitVector{1.0}, 0.0), ArgumentError);
  EXPECT_THROW(apply_temperature(LogitVector{1.0}, -2.0), ArgumentError);
}

TEST(MaskSentinel, NeverPromotedByGumbelNoise) {
  // Largest of 10^7 standard Gumbel draws against the sentinel gap.
  RandomStream rng(6);
  double hi = -kInfinity;
  double lo = kInfinity;
  for (int i = 0; i < 10'000'000; ++i) {
    const double g = sample_standard_gumbel(rng);
    hi = std::max(hi, g);
    lo = std::min(lo, g);
  }
  EXPECT_LT(kMaskedLogit + hi, 0.0 + lo);
}

TEST(Providers, ConstantTableGivesUniformLogits) {
  auto lm = constant_table({0.0, 0.0, 0.0}, make_vocab(3));
  for (const TokenSeq& prefix : {TokenSeq{}, TokenSeq{0}, TokenSeq{1, 0, 1}}) {
    const auto l = lm->next_logits(prefix);
    EXPECT_EQ(l, (LogitVector{0.0, 0.0, 0.0}));
  }
}

TEST(Providers, TransformChainsAreDeterministicProviders) {
  RandomStream rng(7);
  auto lm = testing::random_table(5, 2, rng);
  ProviderPtr chain = with_nucleus(with_top_k(with_temperature(lm, 0.7), 3), 0.9);
  for (TokenId a = 0; a < 5; ++a) {
    const TokenSeq prefix{a};
    const auto once = chain->next_logits(prefix);
    EXPECT_EQ(once, chain->next_logits(prefix));
    EXPECT_EQ(once, apply_nucleus(
                        apply_top_k(apply_temperature(lm->next_logits(prefix), 0.7), 3),
                        0.9));
  }
  EXPECT_EQ(chain->descriptor(),
            "table:random | temperature(0.69999999999999996) | top_k(3) | "
            "nucleus(0.90000000000000002)");
}

TEST(Providers, RejectUnknownTokenIds) {
  auto lm = constant_table({0.0, 0.0, 0.0}, make_vocab(3));
  EXPECT_THROW(lm->next_logits(TokenSeq{3}), DataError);
  EXPECT_THROW(lm->next_logits(TokenSeq{-1}), DataError);
}

TEST(Providers, BiasDescriptorNamesNonzeroEntries) {
  auto lm = testing::constant_table({0.0, 0.0, 0.0}, testing::make_vocab(3));
  EXPECT_EQ(with_bias(lm, {0.0, 2.5, 0.0})->descriptor(),
            "table:constant | bias{s1:2.5}");
  EXPECT_EQ(with_bias(lm, {0.0, 0.0, 0.0})->descriptor(),
            "table:constant | bias{}");
}

}  // namespace
}  // namespace gcf
