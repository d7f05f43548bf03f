// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gcf Authors

#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>

#include "gcf/logits.hpp"
#include "gcf/vocabulary.hpp"

namespace gcf {

/// Deterministic next-symbol scorer: the language encoder together with its
/// output projection. Implementations are immutable after construction and
/// must return bit-identical logits for identical prefixes.
class LogitProvider {
 public:
  virtual ~LogitProvider() = default;

  virtual const Vocabulary& vocabulary() const = 0;

  /// Logits over the full vocabulary for the symbol following `prefix`
  /// (prompt plus generated tokens). Throws DataError on unknown ids.
  virtual LogitVector next_logits(std::span<const TokenId> prefix) const = 0;

  /// Provenance: table file, remote address, or intervention chain.
  virtual std::string descriptor() const = 0;

  /// Symbol forced at generated position `position` by a clamp
  /// intervention. Clamped positions bypass the argmax.
  virtual std::optional<TokenId> clamp_at(std::size_t position) const {
    (void)position;
    return std::nullopt;
  }
};

using ProviderPtr = std::shared_ptr<const LogitProvider>;

/// Provider computing `transform(base.next_logits(prefix))`. Clamps of the
/// base provider are forwarded.
class TransformedProvider final : public LogitProvider {
 public:
  using Transform = std::function<LogitVector(const LogitVector&)>;

  TransformedProvider(ProviderPtr base, Transform transform, std::string name);

  const Vocabulary& vocabulary() const override { return base_->vocabulary(); }
  LogitVector next_logits(std::span<const TokenId> prefix) const override;
  std::string descriptor() const override;
  std::optional<TokenId> clamp_at(std::size_t position) const override {
    return base_->clamp_at(position);
  }

  const ProviderPtr& base() const { return base_; }

 private:
  ProviderPtr base_;
  Transform transform_;
  std::string name_;
};

/// Provider that forces fixed symbols at given generated positions and
/// otherwise behaves exactly like its base.
class ClampedProvider final : public LogitProvider {
 public:
  /// Throws DataError on ids outside the base vocabulary.
  ClampedProvider(ProviderPtr base, std::map<std::size_t, TokenId> clamps);

  const Vocabulary& vocabulary() const override { return base_->vocabulary(); }
  LogitVector next_logits(std::span<const TokenId> prefix) const override {
    return base_->next_logits(prefix);
  }
  std::string descriptor() const override;
  std::optional<TokenId> clamp_at(std::size_t position) const override;

  const std::map<std::size_t, TokenId>& clamps() const { return clamps_; }

 private:
  ProviderPtr base_;
  std::map<std::size_t, TokenId> clamps_;
};

ProviderPtr with_top_k(ProviderPtr base, std::size_t k);
ProviderPtr with_nucleus(ProviderPtr base, double p);
ProviderPtr with_temperature(ProviderPtr base, double tau);
ProviderPtr with_bias(ProviderPtr base, std::vector<double> bias);

}  // namespace gcf
