// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gcf Authors

#include <gtest/gtest.h>

#include <cmath>

#include "gcf/error.hpp"
#include "gcf/gumbel.hpp"
#include "gcf/oracle.hpp"
#include "gcf/stats.hpp"
#include "test_support.hpp"

namespace gcf {
namespace {

using testing::constant_table;
using testing::make_vocab;
using testing::random_logits;
using testing::random_table;

std::vector<double> frequencies_of(const std::vector<std::size_t>& counts) {
  double n = 0.0;
  for (auto c : counts) n += static_cast<double>(c);
  std::vector<double> out;
  for (auto c : counts) out.push_back(static_cast<double>(c) / n);
  return out;
}

TEST(Enumerate, UniformTwoSymbolCapTwo) {
  const Vocabulary vocab({"a", "<eos>"}, "<eos>");
  auto lm = constant_table({0.0, 0.0}, vocab);
  const auto d = enumerate_distribution(*lm, {}, 2);
  EXPECT_DOUBLE_EQ(d.entries.at({1}), 0.5);
  EXPECT_DOUBLE_EQ(d.entries.at({0, 1}), 0.25);
  EXPECT_DOUBLE_EQ(d.cap_mass(), 0.25);
  EXPECT_DOUBLE_EQ(d.entries.at({0, 0}), 0.25);
  EXPECT_EQ(d.entries.size(), 3u);
}

TEST(Enumerate, RandomModelsAreNormalized) {
  RandomStream rng(1);
  for (int i = 0; i < 50; ++i) {
    auto lm = random_table(2 + rng.uniform_index(4), 1 + static_cast<int>(rng.uniform_index(3)),
                           rng, 2.0);
    const auto d = enumerate_distribution(*lm, {}, 1 + rng.uniform_index(5));
    EXPECT_NEAR(d.total(), 1.0, 1e-10);
    for (const auto& [s, p] : d.entries) ASSERT_GE(p, 0.0);
  }
}

TEST(Enumerate, MatchesMonteCarloGeneration) {
  RandomStream rng(2);
  auto lm = random_table(4, 2, rng);
  const auto d = enumerate_distribution(*lm, {}, 4);
  const auto mc = testing::sample_strings(*lm, 4, 200000, 3);
  EXPECT_LT(stats::total_variation(mc, d.entries), 0.01);
}

TEST(Enumerate, FeasibilityGuard) {
  RandomStream rng(3);
  auto lm = random_table(10, 2, rng);
  EXPECT_NO_THROW(enumerate_distribution(*lm, {}, 6));
  EXPECT_THROW(enumerate_distribution(*lm, {}, 7), ArgumentError);
}

TEST(Enumerate, HonorsPrompt) {
  RandomStream rng(4);
  auto lm = random_table(3, 2, rng);
  const auto d = enumerate_distribution(*lm, TokenSeq{1}, 1);
  const auto p = softmax(lm->next_logits(TokenSeq{1}).view());
  for (TokenId s = 0; s < 3; ++s) {
    EXPECT_NEAR(d.entries.at({s}), p[static_cast<std::size_t>(s)], 1e-15);
  }
}

TEST(Stability, RandomPairsHaveNoViolations) {
  RandomStream rng(5);
  std::size_t violations = 0;
  std::size_t changed = 0;
  for (int k = 0; k < 20; ++k) {
    const auto phi = random_logits(5, rng);
    const auto phi_cf = random_logits(5, rng);
    const auto r = check_counterfactual_stability(phi, phi_cf, 20000, rng);
    EXPECT_EQ(r.trials, 20000u);
    violations += r.violations;
    changed += r.changed;
  }
  EXPECT_EQ(violations, 0u);
  EXPECT_GT(changed, 0u);
}

TEST(Stability, IdentityAndShiftNeverChange) {
  RandomStream rng(6);
  const auto phi = random_logits(5, rng);
  auto shifted = phi;
  for (double& x : shifted) x += 4.0;
  const std::vector<double>* cases[] = {&phi, &shifted};
  for (const auto* cf : cases) {
    const auto r = check_counterfactual_stability(phi, *cf, 20000, rng);
    EXPECT_EQ(r.violations, 0u);
    EXPECT_EQ(r.changed, 0u);
  }
}

TEST(Stability, PredicateInLogSpace) {
  const std::vector<double> phi{0.0, 0.0, 0.0};
  const std::vector<double> phi_cf{1.0, 0.0, 0.0};
  // Symbol 0 gained relative probability, so a switch 0 -> 1 is forbidden.
  EXPECT_TRUE(stability_forbids(phi, phi_cf, 0, 1));
  EXPECT_FALSE(stability_forbids(phi, phi_cf, 1, 0));
  const std::vector<double> tiny{-800.0, 0.0};
  const std::vector<double> tiny_cf{-700.0, 0.0};
  EXPECT_TRUE(stability_forbids(tiny, tiny_cf, 0, 1));
}

TEST(InverseCdf, IdentityKeepsObservation) {
  RandomStream rng(7);
  const auto phi = random_logits(4, rng);
  const std::vector<TokenId> orderings[] = {{0, 1, 2, 3}, {3, 1, 0, 2}};
  for (const auto& ord : orderings) {
    for (TokenId w = 0; w < 4; ++w) {
      for (int i = 0; i < 500; ++i) {
        ASSERT_EQ(inverse_cdf_counterfactual(phi, phi, w, ord, rng), w);
      }
    }
  }
}

TEST(InverseCdf, OrderingChangesCounterfactualLaw) {
  const std::vector<double> phi{0.0, 0.0, 0.0};
  const std::vector<double> phi_cf{std::log(0.1), std::log(0.1), std::log(0.8)};
  const std::vector<TokenId> first{0, 1, 2};
  const std::vector<TokenId> second{2, 0, 1};
  RandomStream rng(8);
  std::vector<std::size_t> a(3), b(3), ga(3), gb(3);
  for (int i = 0; i < 100000; ++i) {
    a[static_cast<std::size_t>(inverse_cdf_counterfactual(phi, phi_cf, 0, first, rng))] += 1;
    b[static_cast<std::size_t>(inverse_cdf_counterfactual(phi, phi_cf, 0, second, rng))] += 1;
  }
  const auto fa = frequencies_of(a);
  const auto fb = frequencies_of(b);
  EXPECT_NEAR(fa[0], 0.3, 0.01);
  EXPECT_NEAR(fa[2], 0.4, 0.01);
  EXPECT_EQ(fb[2], 1.0);
  EXPECT_GT(stats::total_variation(fa, fb), 0.05);

  // The Gumbel-max counterfactual is label-equivariant: reorder the symbols
  // as in `second` and the law permutes with them.
  const std::vector<double> phi_p{phi[2], phi[0], phi[1]};
  const std::vector<double> phi_cf_p{phi_cf[2], phi_cf[0], phi_cf[1]};
  for (int i = 0; i < 100000; ++i) {
    ga[static_cast<std::size_t>(gumbel_counterfactual(phi, phi_cf, 0, rng))] += 1;
    const auto j = gumbel_counterfactual(phi_p, phi_cf_p, 1, rng);
    gb[static_cast<std::size_t>(second[static_cast<std::size_t>(j)])] += 1;
  }
  EXPECT_LT(stats::total_variation(frequencies_of(ga), frequencies_of(gb)), 0.01);
}

TEST(InverseCdf, RejectsInvalidOrderingAndImpossibleObservation) {
  RandomStream rng(9);
  const std::vector<double> phi{0.0, 0.0, 0.0};
  const std::vector<TokenId> dup{0, 0, 2};
  const std::vector<TokenId> short_ord{0, 1};
  const std::vector<TokenId> ok{0, 1, 2};
  EXPECT_THROW(inverse_cdf_counterfactual(phi, phi, 0, dup, rng), ArgumentError);
  EXPECT_THROW(inverse_cdf_counterfactual(phi, phi, 0, short_ord, rng),
               ArgumentError);
  const std::vector<double> masked{0.0, kMaskedLogit, 0.0};
  EXPECT_THROW(inverse_cdf_counterfactual(masked, phi, 1, ok, rng),
               UndefinedPosteriorError);
}

TEST(InverseCdf, InterventionalMarginalMatchesSoftmax) {
  RandomStream rng(10);
  const auto phi = random_logits(5, rng);
  const std::vector<TokenId> ord{3, 0, 4, 1, 2};
  std::vector<std::size_t> inv(5), gum(5);
  std::vector<double> noise(5);
  for (int i = 0; i < 200000; ++i) {
    inv[static_cast<std::size_t>(inverse_cdf_sample(phi, ord, rng))] += 1;
    for (double& u : noise) u = sample_standard_gumbel(rng);
    gum[static_cast<std::size_t>(perturbed_argmax(phi, noise))] += 1;
  }
  const auto p = softmax(phi);
  EXPECT_LT(stats::total_variation(frequencies_of(inv), p), 0.01);
  EXPECT_LT(stats::total_variation(frequencies_of(gum), p), 0.01);
}

TEST(InverseCdf, WitnessFoundAndGumbelCleanOnIt) {
  RandomStream rng(11);
  const auto w = find_inverse_cdf_witness(3, 10000, rng);
  ASSERT_TRUE(w.has_value());
  EXPECT_TRUE(stability_forbids(w->phi, w->phi_cf, w->observed, w->counterfactual));
  EXPECT_NE(w->observed, w->counterfactual);
  EXPECT_EQ(check_counterfactual_stability(w->phi, w->phi_cf, 100000, rng).violations,
            0u);
}

TEST(Gumbel, PermutationInvariance) {
  RandomStream rng(12);
  const auto phi = random_logits(4, rng);
  const auto phi_cf = random_logits(4, rng);
  const std::vector<std::size_t> perm{2, 0, 3, 1};  // new index -> old index
  std::vector<double> phi_p(4), phi_cf_p(4);
  std::vector<std::size_t> inv_perm(4);
  for (std::size_t k = 0; k < 4; ++k) {
    phi_p[k] = phi[perm[k]];
    phi_cf_p[k] = phi_cf[perm[k]];
    inv_perm[perm[k]] = k;
  }
  constexpr TokenId kObserved = 1;
  std::vector<std::size_t> a(4), b(4);
  for (int i = 0; i < 200000; ++i) {
    a[static_cast<std::size_t>(gumbel_counterfactual(phi, phi_cf, kObserved, rng))] += 1;
    const auto j = gumbel_counterfactual(
        phi_p, phi_cf_p, static_cast<TokenId>(inv_perm[kObserved]), rng);
    b[perm[static_cast<std::size_t>(j)]] += 1;
  }
  EXPECT_LT(stats::total_variation(frequencies_of(a), frequencies_of(b)), 0.01);
}

}  // namespace
}  // namespace gcf
