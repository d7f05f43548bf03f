// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gcf Authors

#pragma once

#include <map>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "gcf/provider.hpp"

namespace gcf {

struct LogitBias {
  std::vector<double> bias;
};
struct Temperature {
  double tau = 1.0;
};
struct TopK {
  std::size_t k = 1;
};
struct Nucleus {
  double p = 1.0;
};
/// Whole-row replacements for a table LM.
struct TableEdit {
  std::vector<std::pair<TokenSeq, LogitVector>> rows;
};
/// Generated position -> forced symbol.
struct SymbolClamp {
  std::map<std::size_t, TokenId> clamps;
};
/// Forwarded verbatim to a remote logit service in every request.
struct RemoteConfig {
  nlohmann::json config = nlohmann::json::object();
};

using InterventionStep = std::variant<LogitBias, Temperature, TopK, Nucleus,
                                      TableEdit, SymbolClamp, RemoteConfig>;

std::string kind_name(const InterventionStep& step);

/// Ordered list of edits turning an original provider into a counterfactual
/// one. Steps apply left to right. The empty spec is the identity.
struct InterventionSpec {
  std::vector<InterventionStep> steps;

  /// Parses one intervention object, a {"kind":"compose","specs":[..]}
  /// object, or a JSON array of either (composed left to right). Symbols are
  /// resolved against `vocab`; unspecified bias entries are 0.
  ///
  ///   {"kind":"logit_bias","bias":{"a":2.5}}
  ///   {"kind":"temperature","tau":0.7}
  ///   {"kind":"top_k","k":40}
  ///   {"kind":"nucleus","p":0.9}
  ///   {"kind":"table_edit","rows":{"a":[0,1,-1]}}
  ///   {"kind":"symbol_clamp","clamps":[{"position":0,"symbol":"b"}]}
  ///   {"kind":"remote_config","config":{...}}
  static InterventionSpec from_json(const nlohmann::json& j,
                                    const Vocabulary& vocab);
  nlohmann::json to_json(const Vocabulary& vocab) const;

  /// Throws DataError if a payload does not fit `vocab`, ArgumentError on
  /// invalid scalars (k, p, tau).
  void validate(const Vocabulary& vocab) const;
};

/// Wraps `provider` in the spec's steps. table_edit requires the provider
/// at that point of the chain to be a TableLm and remote_config a
/// RemoteProvider (ArgumentError otherwise).
ProviderPtr apply_intervention(ProviderPtr provider,
                               const InterventionSpec& spec);

/// Concatenates specs. Adjacent biases are summed and adjacent temperatures
/// multiplied; all clamps are merged into one step. Throws ArgumentError if
/// two specs clamp the same position to different symbols.
InterventionSpec compose(const std::vector<InterventionSpec>& specs);

}  // namespace gcf
