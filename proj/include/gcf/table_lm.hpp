// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gcf Authors

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "gcf/provider.hpp"

namespace gcf {

/// Context key used in table files: symbols joined by U+0001.
std::string encode_context_key(const Vocabulary& vocab,
                               std::span<const TokenId> ctx);
/// Inverse of encode_context_key; throws DataError on unknown symbols.
TokenSeq decode_context_key(const Vocabulary& vocab, std::string_view key);

/// Exact n-gram style logit table.
///
/// next_logits() looks up the row keyed by the last min(order - 1, |prefix|)
/// tokens of the prefix. A missing row resolves to all-zero (uniform) logits
/// when `fallback` is set and is a DataError otherwise.
///
/// File format (UTF-8 JSON):
///
///     { "order": 2, "vocab": ["a", "b", "<eos>"], "eos": "<eos>",
///       "fallback": false,
///       "rows": { "": [0, 0, 0], "a": [1.5, -2, 0.25] } }
///
/// Row keys are context symbols joined by U+0001; the empty context is "".
/// "fallback" is optional and defaults to false.
class TableLm final : public LogitProvider {
 public:
  using Context = TokenSeq;
  using Rows = std::map<Context, LogitVector>;

  /// Throws DataError when a row is malformed (wrong width, context longer
  /// than order - 1, unknown ids, non-finite entries).
  TableLm(Vocabulary vocab, int order, Rows rows, bool fallback,
          std::string source = "table:<memory>");

  static std::shared_ptr<const TableLm> load(const std::filesystem::path& path);
  static std::shared_ptr<const TableLm> from_json(std::string_view text,
                                                  std::string source);
  nlohmann::json to_json() const;
  void save(const std::filesystem::path& path) const;

  const Vocabulary& vocabulary() const override { return vocab_; }
  LogitVector next_logits(std::span<const TokenId> prefix) const override;
  std::string descriptor() const override { return source_; }

  int order() const { return order_; }
  bool fallback() const { return fallback_; }
  const Rows& rows() const { return rows_; }

  /// Context key consulted for `prefix`.
  Context context_of(std::span<const TokenId> prefix) const;

  /// Copy with whole rows replaced (or inserted). Rows not named keep
  /// bit-identical logits.
  std::shared_ptr<const TableLm> with_rows(
      const std::vector<std::pair<Context, LogitVector>>& edits) const;

  /// Every context of length < order over the vocabulary, shortest first.
  std::vector<Context> all_contexts() const;

  std::string encode_context(const Context& ctx) const;
  Context decode_context(std::string_view key) const;

 private:
  void check_row(const Context& ctx, const LogitVector& row) const;

  Vocabulary vocab_;
  int order_;
  Rows rows_;
  bool fallback_;
  std::string source_;
};

/// Count-based fit: logits are log((count + alpha) / (total + alpha * |V|))
/// for every context of length < order observed in `corpus`. Each sequence
/// is terminated with EOS if it does not already end in one. Contexts that
/// never occur get no row; the fitted table has fallback enabled.
std::shared_ptr<const TableLm> fit_table_lm(const Vocabulary& vocab, int order,
                                            const std::vector<TokenSeq>& corpus,
                                            double alpha);

}  // namespace gcf
