// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gcf Authors

#include "gcf/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gcf/error.hpp"
#include "gcf/gsem.hpp"
#include "gcf/gumbel.hpp"
#include "gcf/hindsight.hpp"
#include "gcf/logits.hpp"

namespace gcf {

double ExactDistribution::total() const {
  double acc = 0.0;
  for (const auto& [_, p] : entries) acc += p;
  return acc;
}

double ExactDistribution::cap_mass() const {
  double acc = 0.0;
  for (const auto& [s, p] : entries) {
    if (s.empty() || s.back() != eos_id) acc += p;
  }
  return acc;
}

namespace {

void descend(const LogitProvider& provider, TokenSeq& context,
             std::size_t prompt_len, double prob, ExactDistribution& out) {
  const std::size_t depth = context.size() - prompt_len;
  auto emit = [&](double p) {
    out.entries[TokenSeq(context.begin() + static_cast<std::ptrdiff_t>(prompt_len),
                         context.end())] += p;
  };
  if (depth == out.cap) {
    emit(prob);
    return;
  }
  const TokenId eos = provider.vocabulary().eos_id();
  if (auto clamped = provider.clamp_at(depth)) {
    context.push_back(*clamped);
    if (*clamped == eos) {
      emit(prob);
    } else {
      descend(provider, context, prompt_len, prob, out);
    }
    context.pop_back();
    return;
  }
  const auto probs = softmax(provider.next_logits(context).view());
  for (std::size_t s = 0; s < probs.size(); ++s) {
    if (probs[s] == 0.0) continue;
    context.push_back(static_cast<TokenId>(s));
    if (static_cast<TokenId>(s) == eos) {
      emit(prob * probs[s]);
    } else {
      descend(provider, context, prompt_len, prob * probs[s], out);
    }
    context.pop_back();
  }
}

void check_ordering(std::span<const TokenId> ordering, std::size_t width) {
  if (ordering.size() != width) {
    throw ArgumentError("ordering has " + std::to_string(ordering.size()) +
                        " entries, expected " + std::to_string(width));
  }
  std::vector<bool> seen(width, false);
  for (TokenId id : ordering) {
    if (id < 0 || static_cast<std::size_t>(id) >= width ||
        seen[static_cast<std::size_t>(id)]) {
      throw ArgumentError("ordering is not a permutation of symbol ids");
    }
    seen[static_cast<std::size_t>(id)] = true;
  }
}

// Position of u in the CDF laid out by `ordering`.
TokenId inverse_cdf(std::span<const double> probs,
                    std::span<const TokenId> ordering, double u) {
  double acc = 0.0;
  TokenId last_positive = ordering.front();
  for (TokenId id : ordering) {
    const double p = probs[static_cast<std::size_t>(id)];
    if (p <= 0.0) continue;
    last_positive = id;
    acc += p;
    if (u < acc) return id;
  }
  // u can land past the last partial sum through rounding.
  return last_positive;
}

}  // namespace

ExactDistribution enumerate_distribution(const LogitProvider& provider,
                                         std::span<const TokenId> prompt,
                                         std::size_t cap) {
  const std::size_t width = provider.vocabulary().size();
  std::size_t budget = 1;
  for (std::size_t i = 0; i < cap; ++i) {
    if (budget > kMaxEnumeratedStrings / width) {
      throw ArgumentError("enumeration of |V|^cap = " + std::to_string(width) +
                          "^" + std::to_string(cap) + " strings exceeds " +
                          std::to_string(kMaxEnumeratedStrings));
    }
    budget *= width;
  }
  provider.vocabulary().validate(prompt);
  ExactDistribution out;
  out.cap = cap;
  out.eos_id = provider.vocabulary().eos_id();
  TokenSeq context(prompt.begin(), prompt.end());
  descend(provider, context, context.size(), 1.0, out);
  return out;
}

bool stability_forbids(std::span<const double> phi,
                       std::span<const double> phi_cf, TokenId observed,
                       TokenId counterfactual) {
  const auto lp = log_softmax(phi);
  const auto lq = log_softmax(phi_cf);
  const auto i = static_cast<std::size_t>(observed);
  const auto j = static_cast<std::size_t>(counterfactual);
  return lq[i] - lp[i] >= lq[j] - lp[j];
}

TokenId gumbel_counterfactual(std::span<const double> phi,
                              std::span<const double> phi_cf, TokenId observed,
                              RandomStream& rng) {
  std::vector<double> row(phi.size());
  sample_posterior_row(phi, observed, rng, row);
  return perturbed_argmax(phi_cf, row);
}

StabilityResult check_counterfactual_stability(std::span<const double> phi,
                                               std::span<const double> phi_cf,
                                               std::size_t trials,
                                               RandomStream& rng) {
  if (phi.size() != phi_cf.size()) {
    throw ArgumentError("stability check: logit widths differ");
  }
  const auto lp = log_softmax(phi);
  const auto lq = log_softmax(phi_cf);
  StabilityResult result;
  result.trials = trials;
  std::vector<double> prior(phi.size());
  for (std::size_t n = 0; n < trials; ++n) {
    for (double& u : prior) u = sample_standard_gumbel(rng);
    const TokenId i = perturbed_argmax(phi, prior);
    const TokenId j = gumbel_counterfactual(phi, phi_cf, i, rng);
    if (j == i) continue;
    ++result.changed;
    const auto ii = static_cast<std::size_t>(i);
    const auto jj = static_cast<std::size_t>(j);
    if (lq[ii] - lp[ii] >= lq[jj] - lp[jj]) ++result.violations;
  }
  return result;
}

TokenId inverse_cdf_sample(std::span<const double> phi,
                           std::span<const TokenId> ordering,
                           RandomStream& rng) {
  check_ordering(ordering, phi.size());
  return inverse_cdf(softmax(phi), ordering, rng.uniform_open());
}

TokenId inverse_cdf_counterfactual(std::span<const double> phi,
                                   std::span<const double> phi_cf,
                                   TokenId observed,
                                   std::span<const TokenId> ordering,
                                   RandomStream& rng) {
  if (phi.size() != phi_cf.size()) {
    throw ArgumentError("inverse-CDF counterfactual: logit widths differ");
  }
  check_ordering(ordering, phi.size());
  const auto p = softmax(phi);
  double lo = 0.0;
  for (TokenId id : ordering) {
    if (id == observed) break;
    lo += p[static_cast<std::size_t>(id)];
  }
  const double width = p[static_cast<std::size_t>(observed)];
  if (width <= 0.0) {
    throw UndefinedPosteriorError("observed symbol has zero probability");
  }
  const double u = lo + width * rng.uniform_open();
  return inverse_cdf(softmax(phi_cf), ordering, u);
}

std::optional<StabilityWitness> find_inverse_cdf_witness(std::size_t width,
                                                         std::size_t attempts,
                                                         RandomStream& rng) {
  auto normal = [&rng] {
    // Box-Muller; only used to spread logits, exact law is irrelevant.
    const double u1 = rng.uniform_open();
    const double u2 = rng.uniform_open();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  };
  for (std::size_t a = 0; a < attempts; ++a) {
    StabilityWitness w;
    w.phi.resize(width);
    w.phi_cf.resize(width);
    for (double& v : w.phi) v = normal();
    for (double& v : w.phi_cf) v = normal();
    w.ordering.resize(width);
    std::iota(w.ordering.begin(), w.ordering.end(), 0);
    for (std::size_t i = width; i > 1; --i) {
      std::swap(w.ordering[i - 1], w.ordering[rng.uniform_index(i)]);
    }
    w.observed = inverse_cdf_sample(w.phi, w.ordering, rng);
    w.counterfactual =
        inverse_cdf_counterfactual(w.phi, w.phi_cf, w.observed, w.ordering, rng);
    if (w.counterfactual != w.observed &&
        stability_forbids(w.phi, w.phi_cf, w.observed, w.counterfactual)) {
      return w;
    }
  }
  return std::nullopt;
}

}  // namespace gcf
