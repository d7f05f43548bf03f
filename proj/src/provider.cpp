// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gcf Authors

#include "gcf/provider.hpp"

#include <sstream>

#include "gcf/error.hpp"

namespace gcf {

TransformedProvider::TransformedProvider(ProviderPtr base, Transform transform,
                                         std::string name)
    : base_(std::move(base)),
      transform_(std::move(transform)),
      name_(std::move(name)) {
  if (!base_) throw ArgumentError("transformed provider needs a base");
}

LogitVector TransformedProvider::next_logits(
    std::span<const TokenId> prefix) const {
  return transform_(base_->next_logits(prefix));
}

std::string TransformedProvider::descriptor() const {
  return base_->descriptor() + " | " + name_;
}

ClampedProvider::ClampedProvider(ProviderPtr base,
                                 std::map<std::size_t, TokenId> clamps)
    : base_(std::move(base)), clamps_(std::move(clamps)) {
  if (!base_) throw ArgumentError("clamped provider needs a base");
  for (const auto& [pos, id] : clamps_) {
    if (!base_->vocabulary().contains(id)) {
      throw DataError("clamp at position " + std::to_string(pos) +
                      " names unknown token id " + std::to_string(id));
    }
  }
}

std::string ClampedProvider::descriptor() const {
  std::ostringstream os;
  os << base_->descriptor() << " | clamp{";
  bool first = true;
  for (const auto& [pos, id] : clamps_) {
    if (!first) os << ',';
    first = false;
    os << pos << ':' << id;
  }
  os << '}';
  return os.str();
}

std::optional<TokenId> ClampedProvider::clamp_at(std::size_t position) const {
  if (auto it = clamps_.find(position); it != clamps_.end()) return it->second;
  return base_->clamp_at(position);
}

namespace {

std::string format_real(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

ProviderPtr with_top_k(ProviderPtr base, std::size_t k) {
  const std::size_t width = base->vocabulary().size();
  if (k < 1 || k > width) {
    throw ArgumentError("top-k: k=" + std::to_string(k) + " outside [1, " +
                        std::to_string(width) + "]");
  }
  return std::make_shared<TransformedProvider>(
      std::move(base),
      [k](const LogitVector& l) { return apply_top_k(l, k); },
      "top_k(" + std::to_string(k) + ")");
}

ProviderPtr with_nucleus(ProviderPtr base, double p) {
  if (!(p > 0.0 && p <= 1.0)) {
    throw ArgumentError("nucleus: p outside (0, 1]");
  }
  return std::make_shared<TransformedProvider>(
      std::move(base),
      [p](const LogitVector& l) { return apply_nucleus(l, p); },
      "nucleus(" + format_real(p) + ")");
}

ProviderPtr with_temperature(ProviderPtr base, double tau) {
  if (!(tau > 0.0)) throw ArgumentError("temperature must be positive");
  return std::make_shared<TransformedProvider>(
      std::move(base),
      [tau](const LogitVector& l) { return apply_temperature(l, tau); },
      "temperature(" + format_real(tau) + ")");
}

ProviderPtr with_bias(ProviderPtr base, std::vector<double> bias) {
  if (bias.size() != base->vocabulary().size()) {
    throw DataError("bias width " + std::to_string(bias.size()) +
                    " != vocabulary size " +
                    std::to_string(base->vocabulary().size()));
  }
  std::string name = "bias{";
  bool first = true;
  for (std::size_t i = 0; i < bias.size(); ++i) {
    if (bias[i] == 0.0) continue;
    if (!first) name += ',';
    first = false;
    name += base->vocabulary().symbol(static_cast<TokenId>(i)) + ":" +
            format_real(bias[i]);
  }
  name += '}';
  return std::make_shared<TransformedProvider>(
      std::move(base),
      [b = std::move(bias)](const LogitVector& l) { return apply_bias(l, b); },
      std::move(name));
}

}  // namespace gcf
