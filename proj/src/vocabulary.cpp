// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gcf Authors

#include "gcf/vocabulary.hpp"

#include "gcf/error.hpp"

namespace gcf {

Vocabulary::Vocabulary(std::vector<std::string> symbols,
                       std::string_view eos_symbol)
    : symbols_(std::move(symbols)) {
  build_index();
  auto it = index_.find(std::string(eos_symbol));
  if (it == index_.end()) {
    throw DataError("EOS symbol '" + std::string(eos_symbol) +
                    "' is not in the vocabulary");
  }
  eos_id_ = it->second;
}

Vocabulary::Vocabulary(std::vector<std::string> symbols, TokenId eos_id)
    : symbols_(std::move(symbols)), eos_id_(eos_id) {
  build_index();
  if (!contains(eos_id)) {
    throw DataError("EOS id " + std::to_string(eos_id) + " out of range");
  }
}

void Vocabulary::build_index() {
  if (symbols_.empty()) throw DataError("empty vocabulary");
  index_.reserve(symbols_.size());
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    auto [_, inserted] =
        index_.emplace(symbols_[i], static_cast<TokenId>(i));
    if (!inserted) {
      throw DataError("duplicate vocabulary symbol '" + symbols_[i] + "'");
    }
  }
}

const std::string& Vocabulary::symbol(TokenId id) const {
  if (!contains(id)) {
    throw DataError("unknown token id " + std::to_string(id));
  }
  return symbols_[static_cast<std::size_t>(id)];
}

std::optional<TokenId> Vocabulary::find(std::string_view symbol) const {
  auto it = index_.find(std::string(symbol));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TokenId Vocabulary::id(std::string_view symbol) const {
  if (auto id = find(symbol)) return *id;
  throw DataError("unknown symbol '" + std::string(symbol) + "'");
}

void Vocabulary::validate(std::span<const TokenId> ids) const {
  for (TokenId id : ids) {
    if (!contains(id)) {
      throw DataError("unknown token id " + std::to_string(id) +
                      " (vocabulary size " + std::to_string(size()) + ")");
    }
  }
}

}  // namespace gcf
