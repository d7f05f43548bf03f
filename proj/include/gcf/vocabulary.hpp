// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gcf Authors

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace gcf {

using TokenId = std::int32_t;
using TokenSeq = std::vector<TokenId>;

/// Finite symbol set including a distinguished end-of-sequence symbol.
/// Ids are positions in the symbol list and never change.
class Vocabulary {
 public:
  Vocabulary() = default;

  /// Throws DataError on duplicate symbols or an EOS symbol not in the list.
  Vocabulary(std::vector<std::string> symbols, std::string_view eos_symbol);
  Vocabulary(std::vector<std::string> symbols, TokenId eos_id);

  std::size_t size() const { return symbols_.size(); }
  TokenId eos_id() const { return eos_id_; }
  const std::string& eos_symbol() const { return symbols_[eos_id_]; }
  const std::vector<std::string>& symbols() const { return symbols_; }

  bool contains(TokenId id) const {
    return id >= 0 && static_cast<std::size_t>(id) < symbols_.size();
  }
  const std::string& symbol(TokenId id) const;
  std::optional<TokenId> find(std::string_view symbol) const;
  /// Like find() but throws DataError for unknown symbols.
  TokenId id(std::string_view symbol) const;

  /// Throws DataError naming the first id outside the vocabulary.
  void validate(std::span<const TokenId> ids) const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.eos_id_ == b.eos_id_ && a.symbols_ == b.symbols_;
  }

 private:
  void build_index();

  std::vector<std::string> symbols_;
  TokenId eos_id_ = 0;
  std::unordered_map<std::string, TokenId> index_;
};

}  // namespace gcf
