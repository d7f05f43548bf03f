// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gcf Authors

#include "gcf/interventions.hpp"

#include <cmath>

#include "gcf/error.hpp"
#include "gcf/remote.hpp"
#include "gcf/table_lm.hpp"

namespace gcf {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

InterventionStep parse_step(const nlohmann::json& j, const Vocabulary& vocab) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "logit_bias") {
    LogitBias b{std::vector<double>(vocab.size(), 0.0)};
    for (const auto& [sym, delta] : j.at("bias").items()) {
      b.bias[static_cast<std::size_t>(vocab.id(sym))] = delta.get<double>();
    }
    return b;
  }
  if (kind == "temperature") return Temperature{j.at("tau").get<double>()};
  if (kind == "top_k") return TopK{j.at("k").get<std::size_t>()};
  if (kind == "nucleus") return Nucleus{j.at("p").get<double>()};
  if (kind == "table_edit") {
    TableEdit e;
    for (const auto& [key, row] : j.at("rows").items()) {
      e.rows.emplace_back(decode_context_key(vocab, key),
                          LogitVector(row.get<std::vector<double>>()));
    }
    return e;
  }
  if (kind == "symbol_clamp") {
    SymbolClamp c;
    for (const auto& entry : j.at("clamps")) {
      const auto pos = entry.at("position").get<std::size_t>();
      const auto& sym = entry.at("symbol");
      const TokenId id = sym.is_number_integer() ? sym.get<TokenId>()
                                                 : vocab.id(sym.get<std::string>());
      auto [it, inserted] = c.clamps.emplace(pos, id);
      if (!inserted && it->second != id) {
        throw ArgumentError("conflicting clamps at position " +
                            std::to_string(pos));
      }
    }
    return c;
  }
  if (kind == "remote_config") {
    const auto& cfg = j.at("config");
    if (!cfg.is_object()) throw DataError("remote_config.config must be an object");
    return RemoteConfig{cfg};
  }
  throw DataError("unknown intervention kind '" + kind + "'");
}

}  // namespace

std::string kind_name(const InterventionStep& step) {
  return std::visit(
      overloaded{[](const LogitBias&) { return "logit_bias"; },
                 [](const Temperature&) { return "temperature"; },
                 [](const TopK&) { return "top_k"; },
                 [](const Nucleus&) { return "nucleus"; },
                 [](const TableEdit&) { return "table_edit"; },
                 [](const SymbolClamp&) { return "symbol_clamp"; },
                 [](const RemoteConfig&) { return "remote_config"; }},
      step);
}

InterventionSpec InterventionSpec::from_json(const nlohmann::json& j,
                                             const Vocabulary& vocab) {
  try {
    if (j.is_array()) {
      std::vector<InterventionSpec> parts;
      for (const auto& item : j) parts.push_back(from_json(item, vocab));
      return compose(parts);
    }
    if (j.at("kind").get<std::string>() == "compose") {
      return from_json(j.at("specs"), vocab);
    }
    InterventionSpec spec{{parse_step(j, vocab)}};
    spec.validate(vocab);
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid intervention JSON: ") + e.what());
  }
}

nlohmann::json InterventionSpec::to_json(const Vocabulary& vocab) const {
  nlohmann::json specs = nlohmann::json::array();
  for (const auto& step : steps) {
    nlohmann::json j = {{"kind", kind_name(step)}};
    std::visit(
        overloaded{
            [&](const LogitBias& b) {
              nlohmann::json m = nlohmann::json::object();
              for (std::size_t i = 0; i < b.bias.size(); ++i) {
                if (b.bias[i] != 0.0) {
                  m[vocab.symbol(static_cast<TokenId>(i))] = b.bias[i];
                }
              }
              j["bias"] = std::move(m);
            },
            [&](const Temperature& t) { j["tau"] = t.tau; },
            [&](const TopK& t) { j["k"] = t.k; },
            [&](const Nucleus& n) { j["p"] = n.p; },
            [&](const TableEdit& e) {
              nlohmann::json rows = nlohmann::json::object();
              for (const auto& [ctx, row] : e.rows) {
                rows[encode_context_key(vocab, ctx)] = row.scores;
              }
              j["rows"] = std::move(rows);
            },
            [&](const SymbolClamp& c) {
              nlohmann::json list = nlohmann::json::array();
              for (const auto& [pos, id] : c.clamps) {
                list.push_back({{"position", pos}, {"symbol", vocab.symbol(id)}});
              }
              j["clamps"] = std::move(list);
            },
            [&](const RemoteConfig& r) { j["config"] = r.config; }},
        step);
    specs.push_back(std::move(j));
  }
  return {{"kind", "compose"}, {"specs", std::move(specs)}};
}

void InterventionSpec::validate(const Vocabulary& vocab) const {
  for (const auto& step : steps) {
    std::visit(
        overloaded{
            [&](const LogitBias& b) {
              if (b.bias.size() != vocab.size()) {
                throw DataError("logit_bias width " +
                                std::to_string(b.bias.size()) +
                                " != vocabulary size " +
                                std::to_string(vocab.size()));
              }
              for (double v : b.bias) {
                if (!std::isfinite(v)) throw DataError("non-finite bias entry");
              }
            },
            [&](const Temperature& t) {
              if (!(t.tau > 0.0) || !std::isfinite(t.tau)) {
                throw ArgumentError("temperature must be positive");
              }
            },
            [&](const TopK& t) {
              if (t.k < 1 || t.k > vocab.size()) {
                throw ArgumentError("top_k k outside [1, |V|]");
              }
            },
            [&](const Nucleus& n) {
              if (!(n.p > 0.0 && n.p <= 1.0)) {
                throw ArgumentError("nucleus p outside (0, 1]");
              }
            },
            [&](const TableEdit& e) {
              for (const auto& [ctx, row] : e.rows) {
                vocab.validate(ctx);
                if (row.size() != vocab.size()) {
                  throw DataError("table_edit row width " +
                                  std::to_string(row.size()) +
                                  " != vocabulary size " +
                                  std::to_string(vocab.size()));
                }
              }
            },
            [&](const SymbolClamp& c) {
              for (const auto& [pos, id] : c.clamps) {
                if (!vocab.contains(id)) {
                  throw DataError("clamp names unknown token id " +
                                  std::to_string(id));
                }
              }
            },
            [](const RemoteConfig&) {}},
        step);
  }
}

ProviderPtr apply_intervention(ProviderPtr provider,
                               const InterventionSpec& spec) {
  spec.validate(provider->vocabulary());
  for (const auto& step : spec.steps) {
    provider = std::visit(
        overloaded{
            [&](const LogitBias& b) { return with_bias(provider, b.bias); },
            [&](const Temperature& t) {
              return with_temperature(provider, t.tau);
            },
            [&](const TopK& t) { return with_top_k(provider, t.k); },
            [&](const Nucleus& n) { return with_nucleus(provider, n.p); },
            [&](const TableEdit& e) -> ProviderPtr {
              auto table = std::dynamic_pointer_cast<const TableLm>(provider);
              if (!table) {
                throw ArgumentError("table_edit needs a table LM, got " +
                                    provider->descriptor());
              }
              return table->with_rows(e.rows);
            },
            [&](const SymbolClamp& c) -> ProviderPtr {
              return std::make_shared<ClampedProvider>(provider, c.clamps);
            },
            [&](const RemoteConfig& r) -> ProviderPtr {
              auto remote =
                  std::dynamic_pointer_cast<const RemoteProvider>(provider);
              if (!remote) {
                throw ArgumentError("remote_config needs a remote provider, got " +
                                    provider->descriptor());
              }
              return remote->with_config(r.config);
            }},
        step);
  }
  return provider;
}

InterventionSpec compose(const std::vector<InterventionSpec>& specs) {
  InterventionSpec out;
  std::size_t clamp_index = SIZE_MAX;
  for (const auto& spec : specs) {
    for (const auto& step : spec.steps) {
      if (const auto* c = std::get_if<SymbolClamp>(&step)) {
        if (clamp_index == SIZE_MAX) {
          clamp_index = out.steps.size();
          out.steps.push_back(*c);
          continue;
        }
        auto& merged = std::get<SymbolClamp>(out.steps[clamp_index]).clamps;
        for (const auto& [pos, id] : c->clamps) {
          auto [it, inserted] = merged.emplace(pos, id);
          if (!inserted && it->second != id) {
            throw ArgumentError("conflicting clamps at position " +
                                std::to_string(pos));
          }
        }
        continue;
      }
      if (!out.steps.empty()) {
        auto& last = out.steps.back();
        const auto* b = std::get_if<LogitBias>(&step);
        auto* lb = std::get_if<LogitBias>(&last);
        if (b && lb) {
          if (b->bias.size() != lb->bias.size()) {
            throw DataError("composed biases differ in width");
          }
          for (std::size_t i = 0; i < b->bias.size(); ++i) {
            lb->bias[i] += b->bias[i];
          }
          continue;
        }
        const auto* t = std::get_if<Temperature>(&step);
        auto* lt = std::get_if<Temperature>(&last);
        if (t && lt) {
          lt->tau *= t->tau;
          continue;
        }
      }
      out.steps.push_back(step);
    }
  }
  return out;
}

}  // namespace gcf
