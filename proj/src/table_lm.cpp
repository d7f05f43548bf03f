// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gcf Authors

#include "gcf/table_lm.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "gcf/error.hpp"

namespace gcf {

namespace {

constexpr char kContextSeparator = '\x01';

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TableLm::TableLm(Vocabulary vocab, int order, Rows rows, bool fallback,
                 std::string source)
    : vocab_(std::move(vocab)),
      order_(order),
      rows_(std::move(rows)),
      fallback_(fallback),
      source_(std::move(source)) {
  if (order_ < 1) {
    throw DataError("table LM order must be >= 1, got " +
                    std::to_string(order_));
  }
  for (const auto& [ctx, row] : rows_) check_row(ctx, row);
}

void TableLm::check_row(const Context& ctx, const LogitVector& row) const {
  if (ctx.size() > static_cast<std::size_t>(order_ - 1)) {
    throw DataError("context of length " + std::to_string(ctx.size()) +
                    " exceeds order " + std::to_string(order_) + " - 1");
  }
  vocab_.validate(ctx);
  if (row.size() != vocab_.size()) {
    throw DataError("row '" + encode_context(ctx) + "' has width " +
                    std::to_string(row.size()) + ", vocabulary size is " +
                    std::to_string(vocab_.size()));
  }
  for (double v : row.scores) {
    if (!std::isfinite(v)) {
      throw DataError("row '" + encode_context(ctx) +
                      "' has a non-finite entry");
    }
  }
}

TableLm::Context TableLm::context_of(std::span<const TokenId> prefix) const {
  const std::size_t n =
      std::min(prefix.size(), static_cast<std::size_t>(order_ - 1));
  return Context(prefix.end() - static_cast<std::ptrdiff_t>(n), prefix.end());
}

LogitVector TableLm::next_logits(std::span<const TokenId> prefix) const {
  vocab_.validate(prefix);
  const Context ctx = context_of(prefix);
  if (auto it = rows_.find(ctx); it != rows_.end()) return it->second;
  if (fallback_) return LogitVector(std::vector<double>(vocab_.size(), 0.0));
  throw DataError("no row for context '" + encode_context(ctx) + "' in " +
                  source_);
}

std::string encode_context_key(const Vocabulary& vocab,
                               std::span<const TokenId> ctx) {
  std::string key;
  for (std::size_t i = 0; i < ctx.size(); ++i) {
    if (i) key += kContextSeparator;
    key += vocab.symbol(ctx[i]);
  }
  return key;
}

TokenSeq decode_context_key(const Vocabulary& vocab, std::string_view key) {
  TokenSeq ctx;
  if (key.empty()) return ctx;
  std::size_t start = 0;
  for (;;) {
    const std::size_t end = key.find(kContextSeparator, start);
    ctx.push_back(vocab.id(key.substr(start, end - start)));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return ctx;
}

std::string TableLm::encode_context(const Context& ctx) const {
  return encode_context_key(vocab_, ctx);
}

TableLm::Context TableLm::decode_context(std::string_view key) const {
  return decode_context_key(vocab_, key);
}

std::shared_ptr<const TableLm> TableLm::from_json(std::string_view text,
                                                  std::string source) {
  // nlohmann::json keeps only the last of duplicate object keys, so
  // duplicates under "rows" are detected while parsing.
  std::string top_key;
  std::set<std::string> row_keys;
  std::string duplicate;
  nlohmann::json::parser_callback_t cb =
      [&](int depth, nlohmann::json::parse_event_t event,
          nlohmann::json& parsed) {
        if (event == nlohmann::json::parse_event_t::key) {
          if (depth == 1) {
            top_key = parsed.get<std::string>();
          } else if (depth == 2 && top_key == "rows") {
            auto k = parsed.get<std::string>();
            if (!row_keys.insert(k).second && duplicate.empty()) {
              duplicate = k;
            }
          }
        }
        return true;
      };

  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text, cb);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(source + ": malformed JSON: " + e.what());
  }
  if (!duplicate.empty()) {
    throw DataError(source + ": duplicate context key in rows");
  }

  try {
    const int order = doc.at("order").get<int>();
    auto symbols = doc.at("vocab").get<std::vector<std::string>>();
    for (const auto& s : symbols) {
      if (s.empty() || s.find(kContextSeparator) != std::string::npos) {
        throw DataError(source +
                        ": vocabulary symbols must be non-empty and free of "
                        "U+0001");
      }
    }
    Vocabulary vocab(std::move(symbols), doc.at("eos").get<std::string>());
    const bool fallback = doc.value("fallback", false);

    Rows rows;
    for (const auto& [key, arr] : doc.at("rows").items()) {
      rows.emplace(decode_context_key(vocab, key),
                   LogitVector(arr.get<std::vector<double>>()));
    }
    return std::make_shared<const TableLm>(std::move(vocab), order,
                                           std::move(rows), fallback,
                                           std::move(source));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(source + ": invalid table LM: " + e.what());
  }
}

std::shared_ptr<const TableLm> TableLm::load(
    const std::filesystem::path& path) {
  return from_json(read_file(path), "table:" + path.string());
}

nlohmann::json TableLm::to_json() const {
  nlohmann::json rows = nlohmann::json::object();
  for (const auto& [ctx, row] : rows_) rows[encode_context(ctx)] = row.scores;
  return {{"order", order_},
          {"vocab", vocab_.symbols()},
          {"eos", vocab_.eos_symbol()},
          {"fallback", fallback_},
          {"rows", std::move(rows)}};
}

void TableLm::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_json().dump(1) << '\n';
}

std::shared_ptr<const TableLm> TableLm::with_rows(
    const std::vector<std::pair<Context, LogitVector>>& edits) const {
  Rows rows = rows_;
  for (const auto& [ctx, row] : edits) {
    check_row(ctx, row);
    rows[ctx] = row;
  }
  return std::make_shared<const TableLm>(vocab_, order_, std::move(rows),
                                         fallback_, source_ + " | table_edit");
}

std::vector<TableLm::Context> TableLm::all_contexts() const {
  std::vector<Context> out{Context{}};
  std::size_t level_begin = 0;
  for (int len = 1; len < order_; ++len) {
    const std::size_t level_end = out.size();
    for (std::size_t i = level_begin; i < level_end; ++i) {
      for (std::size_t s = 0; s < vocab_.size(); ++s) {
        Context c = out[i];
        c.push_back(static_cast<TokenId>(s));
        out.push_back(std::move(c));
      }
    }
    level_begin = level_end;
  }
  return out;
}

std::shared_ptr<const TableLm> fit_table_lm(const Vocabulary& vocab, int order,
                                            const std::vector<TokenSeq>& corpus,
                                            double alpha) {
  if (order < 1) throw ArgumentError("order must be >= 1");
  if (!(alpha > 0.0)) throw ArgumentError("smoothing alpha must be positive");
  std::map<TableLm::Context, std::vector<double>> counts;
  const std::size_t ctx_len = static_cast<std::size_t>(order - 1);
  for (TokenSeq seq : corpus) {
    vocab.validate(seq);
    if (seq.empty() || seq.back() != vocab.eos_id()) {
      seq.push_back(vocab.eos_id());
    }
    for (std::size_t t = 0; t < seq.size(); ++t) {
      const std::size_t n = std::min(t, ctx_len);
      TableLm::Context ctx(seq.begin() + static_cast<std::ptrdiff_t>(t - n),
                           seq.begin() + static_cast<std::ptrdiff_t>(t));
      auto& row = counts[ctx];
      row.resize(vocab.size(), 0.0);
      row[static_cast<std::size_t>(seq[t])] += 1.0;
    }
  }
  TableLm::Rows rows;
  const double width = static_cast<double>(vocab.size());
  for (const auto& [ctx, row] : counts) {
    double total = 0.0;
    for (double c : row) total += c;
    const double log_norm = std::log(total + alpha * width);
    std::vector<double> logits(row.size());
    for (std::size_t i = 0; i < row.size(); ++i) {
      logits[i] = std::log(row[i] + alpha) - log_norm;
    }
    rows.emplace(ctx, LogitVector(std::move(logits)));
  }
  return std::make_shared<const TableLm>(vocab, order, std::move(rows), true,
                                         "table:fitted");
}

}  // namespace gcf
