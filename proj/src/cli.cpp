// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gcf Authors

#include "gcf/cli.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "gcf/error.hpp"
#include "gcf/gsem.hpp"
#include "gcf/gumbel.hpp"
#include "gcf/hindsight.hpp"
#include "gcf/interventions.hpp"
#include "gcf/metrics.hpp"
#include "gcf/oracle.hpp"
#include "gcf/remote.hpp"
#include "gcf/stats.hpp"
#include "gcf/table_lm.hpp"

namespace gcf::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunConfig {
  std::string command;
  std::string original;
  std::string cf;
  std::string intervention;
  std::string prompts;
  std::size_t max_len = 25;
  std::uint64_t seed = 0;
  std::string out;
  std::string mode;
  bool force = false;
  std::size_t workers = 0;
  std::string noise_dtype = "f64";
  std::size_t top_n = 15;
  bool csv = false;
  std::size_t trials = 1'000'000;
  std::string corpus;
  std::string vocab;
  int order = 2;
  double alpha = 1.0;
  int listen = -1;
  bool stdio = false;

  // Everything that affects outputs; --force, --out and --workers do not.
  json to_json() const {
    return {{"command", command},     {"original", original},
            {"cf", cf},               {"intervention", intervention},
            {"prompts", prompts},     {"max_len", max_len},
            {"seed", seed},           {"mode", mode},
            {"noise", noise_dtype},   {"top_n", top_n},
            {"trials", trials},       {"corpus", corpus},
            {"vocab", vocab},         {"order", order},
            {"alpha", alpha}};
  }
};

void log(const std::string& msg) { std::cerr << "[gcf] " << msg << '\n'; }

std::string config_hash(const RunConfig& cfg) {
  // FNV-1a over the canonical JSON dump.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : cfg.to_json().dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

bool is_remote_source(const std::string& src) {
  return src.rfind("tcp://", 0) == 0 || src.rfind("exec:", 0) == 0;
}

ProviderPtr open_provider(std::string src) {
  if (src.empty() || src == "remote") {
    const char* env = std::getenv(kRemoteEnv);
    if (!env || !*env) {
      throw ArgumentError("no provider given: pass --original or set " +
                          std::string(kRemoteEnv));
    }
    src = env;
  }
  if (is_remote_source(src)) return RemoteProvider::connect(src);
  return TableLm::load(src);
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

std::vector<json> read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<json> out;
  std::size_t lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

/// Counterfactual provider: --cf (or the original) with --intervention on top.
ProviderPtr open_counterfactual(const RunConfig& cfg,
                                const ProviderPtr& original) {
  ProviderPtr base = cfg.cf.empty() ? original : open_provider(cfg.cf);
  if (cfg.intervention.empty()) {
    if (cfg.cf.empty()) {
      throw ArgumentError("need --cf and/or --intervention");
    }
    return base;
  }
  const auto spec = InterventionSpec::from_json(
      read_json_file(cfg.intervention), base->vocabulary());
  return apply_intervention(base, spec);
}

TokenSeq tokens_field(const json& rec, std::initializer_list<const char*> keys,
                      const std::string& text_key,
                      const LogitProvider& provider) {
  for (const char* k : keys) {
    if (rec.contains(k)) return rec.at(k).get<TokenSeq>();
  }
  if (!text_key.empty() && rec.contains(text_key)) {
    const auto* remote = dynamic_cast<const RemoteProvider*>(&provider);
    if (!remote) {
      throw DataError("'" + text_key +
                      "' needs a remote provider with an encode op");
    }
    return remote->encode(rec.at(text_key).get<std::string>());
  }
  std::string names;
  for (const char* k : keys) names += std::string(names.empty() ? "" : ", ") + k;
  throw DataError("record has none of: " + names +
                  (text_key.empty() ? "" : ", " + text_key));
}

TokenSeq prompt_of(const json& rec, const LogitProvider& provider) {
  return tokens_field(rec, {"prompt_tokens", "prompt"}, "prompt_text", provider);
}

/// Staging directory renamed onto --out when the run completes.
class OutputDir {
 public:
  OutputDir(const std::string& out, bool force) : final_(out) {
    if (out.empty()) throw ArgumentError("--out is required");
    if (fs::exists(final_) && !force) {
      throw ArgumentError(out + " exists; pass --force to overwrite");
    }
    staging_ = final_;
    staging_ += ".partial";
    fs::remove_all(staging_);
    fs::create_directories(staging_);
  }
  ~OutputDir() {
    if (!committed_) {
      std::error_code ec;
      fs::remove_all(staging_, ec);
    }
  }
  fs::path path() const { return staging_; }
  void commit() {
    fs::remove_all(final_);
    fs::rename(staging_, final_);
    committed_ = true;
  }

 private:
  fs::path final_;
  fs::path staging_;
  bool committed_ = false;
};

std::size_t worker_count(const RunConfig& cfg) {
  if (cfg.workers) return cfg.workers;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs `work(i)` for i in [0, n) on a bounded pool and hands the results
/// to `sink(i, result)` in input order.
template <typename Work, typename Sink>
void ordered_parallel(std::size_t n, std::size_t workers, Work work,
                      Sink sink) {
  using Result = decltype(work(std::size_t{}));
  constexpr std::size_t kChunk = 1024;
  for (std::size_t begin = 0; begin < n; begin += kChunk) {
    const std::size_t end = std::min(n, begin + kChunk);
    std::vector<std::optional<Result>> results(end - begin);
    std::atomic<std::size_t> next{begin};
    auto run = [&] {
      for (std::size_t i; (i = next.fetch_add(1)) < end;) {
        results[i - begin].emplace(work(i));
      }
    };
    const std::size_t pool = std::min(workers, end - begin);
    std::vector<std::thread> threads;
    for (std::size_t t = 1; t < pool; ++t) threads.emplace_back(run);
    run();
    for (auto& t : threads) t.join();
    for (std::size_t i = begin; i < end; ++i) sink(i, *results[i - begin]);
  }
}

std::optional<NoiseDtype> noise_dtype(const std::string& s) {
  if (s == "f64") return NoiseDtype::kF64;
  if (s == "f32") return NoiseDtype::kF32;
  if (s == "none") return std::nullopt;
  throw ArgumentError("--noise must be f64, f32 or none");
}

std::string noise_name(std::size_t index) {
  std::ostringstream os;
  os << "noise/" << std::setw(6) << std::setfill('0') << index << ".gnr";
  return os.str();
}

json stop_json(const CounterfactualPair& p) {
  return {{"observed", to_string(p.observed_stop)},
          {"cf", to_string(p.counterfactual_stop)}};
}

void write_run_json(const fs::path& dir, const RunConfig& cfg,
                    const json& summary) {
  std::ofstream out(dir / "run.json");
  out << json{{"config", cfg.to_json()},
              {"config_hash", config_hash(cfg)},
              {"summary", summary}}
             .dump(2)
      << '\n';
}

// ---------------------------------------------------------------- generate

int cmd_generate(const RunConfig& cfg) {
  auto provider = open_provider(cfg.original);
  const auto dtype = noise_dtype(cfg.noise_dtype);
  const auto records = read_jsonl(cfg.prompts);
  OutputDir out(cfg.out, cfg.force);
  if (dtype) fs::create_directories(out.path() / "noise");
  const std::string hash = config_hash(cfg);

  struct Item {
    std::optional<Generation> gen;
    std::string error;
  };
  std::ofstream jsonl(out.path() / "generations.jsonl");
  std::size_t ok = 0;
  std::size_t failed = 0;
  ordered_parallel(
      records.size(), worker_count(cfg),
      [&](std::size_t i) {
        Item item;
        try {
          RandomStream rng(derive_seed(cfg.seed, i));
          item.gen = generate(*provider, prompt_of(records[i], *provider),
                              cfg.max_len, rng);
        } catch (const std::exception& e) {
          item.error = e.what();
        }
        return item;
      },
      [&](std::size_t i, const Item& item) {
        json rec = {{"index", i},
                    {"seed", derive_seed(cfg.seed, i)},
                    {"run_seed", cfg.seed},
                    {"config_hash", hash}};
        if (!item.gen) {
          log("record " + std::to_string(i) + ": " + item.error);
          rec["error"] = item.error;
          ++failed;
        } else {
          const Generation& g = *item.gen;
          rec["prompt"] = g.prompt;
          rec["tokens"] = g.tokens;
          rec["stop"] = to_string(g.stop);
          rec["provider"] = g.provider_descriptor;
          if (dtype) {
            const std::string name = noise_name(i);
            g.noise.save(out.path() / name, *dtype);
            rec["noise_file"] = name;
          }
          ++ok;
        }
        jsonl << rec.dump() << '\n';
      });
  jsonl.close();
  write_run_json(out.path(), cfg, {{"records", ok}, {"errors", failed}});
  out.commit();
  log("generate: " + std::to_string(ok) + " records, " +
      std::to_string(failed) + " errors -> " + cfg.out);
  return failed && !ok ? kExitData : kExitOk;
}

// ---------------------------------------------------------- counterfactual

json pair_json(const CounterfactualPair& p, std::size_t index,
               std::uint64_t seed, const RunConfig& cfg,
               const std::string& hash) {
  json rec = {{"index", index},
              {"prompt", p.prompt},
              {"observed", p.observed},
              {"counterfactual", p.counterfactual},
              {"noise_file", p.noise_ref},
              {"orig", p.original_descriptor},
              {"cf", p.counterfactual_descriptor},
              {"stop", stop_json(p)},
              {"seed", seed},
              {"run_seed", cfg.seed},
              {"config_hash", hash}};
  if (p.metrics) rec["metrics"] = p.metrics->to_json();
  return rec;
}

MetricBundle pair_metrics(const CounterfactualPair& p,
                          const LogitProvider& original,
                          const LogitProvider& cf) {
  MetricBundle m;
  m.normalized_lcp = normalized_lcp(p.observed, p.counterfactual);
  // log p_cf - log p_orig over the observed tokens.
  try {
    m.per_token_log_ratio = token_log_ratio(cf, original, p.prompt, p.observed);
  } catch (const UndefinedPosteriorError&) {
    m.extra["log_ratio_error"] = "observed token masked under cf provider";
  }
  m.summary = summarize(m.per_token_log_ratio);
  return m;
}

int cmd_pairs(const RunConfig& cfg, bool joint) {
  auto original = open_provider(cfg.original);
  auto cf = open_counterfactual(cfg, original);
  const auto dtype = noise_dtype(cfg.noise_dtype);
  const auto records = read_jsonl(cfg.prompts);
  OutputDir out(cfg.out, cfg.force);
  if (dtype) fs::create_directories(out.path() / "noise");
  const std::string hash = config_hash(cfg);

  struct Item {
    std::optional<CounterfactualPair> pair;
    std::string error;
  };
  std::ofstream jsonl(out.path() / "pairs.jsonl");
  std::size_t ok = 0;
  std::size_t skipped = 0;
  std::vector<double> lcps;
  ordered_parallel(
      records.size(), worker_count(cfg),
      [&](std::size_t i) {
        Item item;
        try {
          const json& rec = records[i];
          if (rec.contains("error")) throw DataError(rec["error"].get<std::string>());
          RandomStream rng(derive_seed(cfg.seed, i));
          const TokenSeq prompt = prompt_of(rec, *original);
          CounterfactualPair p;
          if (joint) {
            p = joint_sample(*original, *cf, prompt, cfg.max_len, rng);
          } else {
            const TokenSeq observed = tokens_field(
                rec, {"observed", "tokens"}, "observed_text", *original);
            p = counterfactual(*original, *cf, prompt, observed,
                               std::max(cfg.max_len, observed.size()), rng);
          }
          if (!p.observed.empty()) p.metrics = pair_metrics(p, *original, *cf);
          item.pair = std::move(p);
        } catch (const std::exception& e) {
          item.error = e.what();
        }
        return item;
      },
      [&](std::size_t i, Item& item) {
        if (!item.pair) {
          log("skipping record " + std::to_string(i) + ": " + item.error);
          ++skipped;
          return;
        }
        CounterfactualPair& p = *item.pair;
        if (dtype) {
          p.noise_ref = noise_name(i);
          p.noise->save(out.path() / p.noise_ref, *dtype);
        }
        if (p.metrics) lcps.push_back(p.metrics->normalized_lcp);
        jsonl << pair_json(p, i, derive_seed(cfg.seed, i), cfg, hash).dump()
              << '\n';
        ++ok;
      });
  jsonl.close();
  const Summary lcp = summarize(lcps);
  write_run_json(out.path(), cfg,
                 {{"records", ok},
                  {"skipped", skipped},
                  {"lcp", {{"median", lcp.median}, {"mean", lcp.mean}}}});
  out.commit();
  log(std::string(joint ? "joint" : "counterfactual") + ": " +
      std::to_string(ok) + " pairs, " + std::to_string(skipped) +
      " skipped -> " + cfg.out);
  return skipped && !ok ? kExitData : kExitOk;
}

// -------------------------------------------------------------------- eval

int cmd_eval(const RunConfig& cfg) {
  const auto records = read_jsonl(cfg.prompts);
  if (records.empty()) throw DataError(cfg.prompts + ": no records");
  const std::string mode = cfg.mode.empty() ? "shared-prefix" : cfg.mode;
  if (mode != "shared-prefix" && mode != "paired-text") {
    throw ArgumentError("--mode for eval must be shared-prefix or paired-text");
  }

  std::vector<CounterfactualPair> pairs;
  std::vector<double> lcps;
  for (const auto& rec : records) {
    CounterfactualPair p;
    p.prompt = rec.at("prompt").get<TokenSeq>();
    p.observed = rec.at("observed").get<TokenSeq>();
    p.counterfactual = rec.at("counterfactual").get<TokenSeq>();
    if (p.observed.empty()) continue;
    lcps.push_back(normalized_lcp(p.observed, p.counterfactual));
    pairs.push_back(std::move(p));
  }
  const Summary lcp = summarize(lcps);
  json report = {{"n", pairs.size()},
                 {"lcp", {{"median", lcp.median}, {"mean", lcp.mean}}}};

  const bool have_models =
      !cfg.original.empty() || std::getenv(kRemoteEnv) != nullptr;
  if (have_models && (!cfg.cf.empty() || !cfg.intervention.empty())) {
    auto original = open_provider(cfg.original);
    auto cf = open_counterfactual(cfg, original);
    const auto ranked = aggregate_ratios(
        pairs, *cf, *original, cfg.top_n,
        mode == "paired-text" ? RatioMode::kPairedText
                              : RatioMode::kSharedPrefix);
    auto as_list = [](const auto& v) {
      json a = json::array();
      for (const auto& [label, mean] : v) a.push_back({label, mean});
      return a;
    };
    report["ratios"] = {{"mode", mode},
                        {"direction", "log p_cf - log p_orig"},
                        {"top_increased", as_list(ranked.top_increased)},
                        {"top_decreased", as_list(ranked.top_decreased)}};
  } else {
    log("eval: no providers given, skipping log-ratio analysis");
  }

  OutputDir out(cfg.out, cfg.force);
  std::ofstream(out.path() / "report.json") << report.dump(2) << '\n';
  if (cfg.csv) {
    std::ofstream csv(out.path() / "records.csv");
    csv << "index,observed_len,counterfactual_len,normalized_lcp\n";
    csv << std::setprecision(17);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      csv << i << ',' << pairs[i].observed.size() << ','
          << pairs[i].counterfactual.size() << ',' << lcps[i] << '\n';
    }
  }
  out.commit();
  log("eval: n=" + std::to_string(pairs.size()) +
      " median LCP=" + std::to_string(lcp.median));
  return kExitOk;
}

// ------------------------------------------------------------------ oracle

std::vector<double> random_logits(std::size_t width, RandomStream& rng,
                                  double scale) {
  std::vector<double> v(width);
  for (double& x : v) {
    const double u1 = rng.uniform_open();
    const double u2 = rng.uniform_open();
    x = scale * std::sqrt(-2.0 * std::log(u1)) *
        std::cos(6.283185307179586 * u2);
  }
  return v;
}

json oracle_stability(const RunConfig& cfg, bool& violated) {
  RandomStream rng(derive_seed(cfg.seed, 0));
  constexpr std::size_t kInstances = 100;
  const std::size_t per = std::max<std::size_t>(1, cfg.trials / kInstances);
  std::size_t violations = 0;
  std::size_t changed = 0;
  for (std::size_t k = 0; k < kInstances; ++k) {
    const auto phi = random_logits(5, rng, 1.5);
    const auto phi_cf = random_logits(5, rng, 1.5);
    auto r = check_counterfactual_stability(phi, phi_cf, per, rng);
    violations += r.violations;
    changed += r.changed;
  }
  RandomStream search(derive_seed(cfg.seed, 1));
  const auto witness = find_inverse_cdf_witness(3, 100000, search);
  violated = violated || violations > 0;
  json j = {{"check", "stability"},
            {"trials", per * kInstances},
            {"violations", violations},
            {"changed", changed},
            {"inverse_cdf_witness_found", witness.has_value()}};
  if (witness) {
    j["inverse_cdf_witness"] = {{"phi", witness->phi},
                                {"phi_cf", witness->phi_cf},
                                {"ordering", witness->ordering},
                                {"observed", witness->observed},
                                {"counterfactual", witness->counterfactual}};
  }
  return j;
}

json oracle_gumbel(const RunConfig& cfg, bool& violated) {
  RandomStream rng(derive_seed(cfg.seed, 2));
  constexpr std::size_t kDraws = 100000;
  constexpr double kTolerance = 0.01;
  double worst = 0.0;
  std::vector<double> noise;
  for (std::size_t k = 0; k < 20; ++k) {
    const std::size_t width = 2 + rng.uniform_index(9);
    const auto phi = random_logits(width, rng, 1.0);
    std::vector<double> counts(width, 0.0);
    noise.resize(width);
    for (std::size_t n = 0; n < kDraws; ++n) {
      for (double& u : noise) u = sample_standard_gumbel(rng);
      counts[static_cast<std::size_t>(perturbed_argmax(phi, noise))] += 1.0;
    }
    for (double& c : counts) c /= static_cast<double>(kDraws);
    worst = std::max(worst, stats::total_variation(counts, softmax(phi)));
  }
  violated = violated || worst >= kTolerance;
  return {{"check", "gumbel_max"},
          {"instances", 20},
          {"draws", kDraws},
          {"max_tv", worst},
          {"tolerance", kTolerance},
          {"violations", worst >= kTolerance ? 1 : 0}};
}

int cmd_oracle(const RunConfig& cfg) {
  const std::string mode = cfg.mode.empty() ? "all" : cfg.mode;
  OutputDir out(cfg.out, cfg.force);
  bool violated = false;
  json reports = json::array();
  bool known = false;
  if (mode == "stability" || mode == "all") {
    reports.push_back(oracle_stability(cfg, violated));
    known = true;
  }
  if (mode == "gumbel" || mode == "all") {
    reports.push_back(oracle_gumbel(cfg, violated));
    known = true;
  }
  if (mode == "enumerate" || (mode == "all" && !cfg.original.empty())) {
    auto provider = open_provider(cfg.original);
    TokenSeq prompt;
    if (!cfg.prompts.empty()) {
      const auto recs = read_jsonl(cfg.prompts);
      if (!recs.empty()) prompt = prompt_of(recs.front(), *provider);
    }
    const auto dist = enumerate_distribution(*provider, prompt, cfg.max_len);
    std::ofstream dump(out.path() / "enumeration.jsonl");
    dump << std::setprecision(17);
    for (const auto& [s, p] : dist.entries) {
      dump << json{{"string", s}, {"prob", p}}.dump() << '\n';
    }
    const bool bad = std::abs(dist.total() - 1.0) > 1e-10;
    violated = violated || bad;
    reports.push_back({{"check", "enumerate"},
                       {"strings", dist.entries.size()},
                       {"total", dist.total()},
                       {"cap_mass", dist.cap_mass()},
                       {"violations", bad ? 1 : 0}});
    known = true;
  }
  if (!known) {
    throw ArgumentError("--mode for oracle must be stability, gumbel, "
                        "enumerate or all");
  }
  std::ofstream(out.path() / "oracle.json") << reports.dump(2) << '\n';
  out.commit();
  for (const auto& r : reports) log("oracle: " + r.dump());
  return violated ? kExitViolation : kExitOk;
}

// --------------------------------------------------------------- fit-table

int cmd_fit_table(const RunConfig& cfg) {
  if (cfg.out.empty()) throw ArgumentError("--out is required");
  if (fs::exists(cfg.out) && !cfg.force) {
    throw ArgumentError(cfg.out + " exists; pass --force to overwrite");
  }
  const json vj = read_json_file(cfg.vocab);
  Vocabulary vocab(vj.at("vocab").get<std::vector<std::string>>(),
                   vj.at("eos").get<std::string>());
  std::vector<TokenSeq> corpus;
  for (const auto& rec : read_jsonl(cfg.corpus)) {
    corpus.push_back(rec.at("tokens").get<TokenSeq>());
  }
  const auto table = fit_table_lm(vocab, cfg.order, corpus, cfg.alpha);
  const fs::path tmp = cfg.out + ".partial";
  table->save(tmp);
  fs::rename(tmp, cfg.out);
  log("fit-table: " + std::to_string(table->rows().size()) + " rows from " +
      std::to_string(corpus.size()) + " sequences -> " + cfg.out);
  return kExitOk;
}

// ------------------------------------------------------------------- serve

int cmd_serve(const RunConfig& cfg) {
  auto provider = open_provider(cfg.original);
  if (cfg.stdio) {
    serve_stream(*provider, std::cin, std::cout);
    return kExitOk;
  }
  TcpServer server(provider, cfg.listen < 0 ? 0 : cfg.listen);
  log("serving " + provider->descriptor() + " on " + server.address());
  server.wait();
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  RunConfig cfg;
  CLI::App app{"Counterfactual generation with Gumbel-max language models"};
  app.set_config("--config", "", "Key-value config file mirroring the flags");
  app.require_subcommand(1);
  app.fallthrough();

  app.add_option("--original", cfg.original,
                 "Original provider: table LM file, tcp://host:port or "
                 "exec:<cmd>");
  app.add_option("--cf", cfg.cf, "Counterfactual provider source");
  app.add_option("--intervention", cfg.intervention,
                 "Intervention spec JSON applied to --cf (or --original)");
  app.add_option("--prompts", cfg.prompts, "Input JSONL records");
  app.add_option("--max-len", cfg.max_len, "Maximum generated tokens")
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", cfg.seed, "Run seed");
  app.add_option("--out", cfg.out, "Output directory (file for fit-table)");
  app.add_option("--mode", cfg.mode, "Subcommand mode");
  app.add_flag("--force", cfg.force, "Overwrite an existing output");
  app.add_option("--workers", cfg.workers, "Worker threads (0 = all cores)");
  app.add_option("--noise", cfg.noise_dtype, "Noise storage: f64, f32, none");
  app.add_option("--top-n", cfg.top_n, "Ranked words per list in eval");
  app.add_flag("--csv", cfg.csv, "Also write per-record CSV in eval");
  app.add_option("--trials", cfg.trials, "Stability oracle trials");
  app.add_option("--corpus", cfg.corpus, "Token-id corpus JSONL for fit-table");
  app.add_option("--vocab", cfg.vocab, "Vocabulary JSON for fit-table");
  app.add_option("--order", cfg.order, "Table LM order for fit-table")
      ->check(CLI::PositiveNumber);
  app.add_option("--alpha", cfg.alpha, "Additive smoothing for fit-table");
  app.add_option("--listen", cfg.listen, "TCP port for serve (0 = any)");
  app.add_flag("--stdio", cfg.stdio, "Serve on stdin/stdout");

  const std::pair<const char*, const char*> commands[] = {
      {"generate", "Sample strings and their noise from --original"},
      {"counterfactual", "Infer noise for observed strings, regenerate under the intervened model"},
      {"joint", "Decode one prior noise draw under both models"},
      {"eval", "Summarize pairs: LCP and per-symbol log ratios"},
      {"oracle", "Run stability, gumbel or enumeration checks"},
      {"fit-table", "Fit a count-based table LM from a token-id corpus"},
      {"serve", "Serve --original over the logit protocol"},
  };
  for (const auto& [name, help] : commands) {
    app.add_subcommand(name, help)->callback(
        [&cfg, name = name] { cfg.command = name; });
  }

  std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, std::cerr, std::cerr);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (cfg.command == "generate") return cmd_generate(cfg);
    if (cfg.command == "counterfactual") return cmd_pairs(cfg, false);
    if (cfg.command == "joint") return cmd_pairs(cfg, true);
    if (cfg.command == "eval") return cmd_eval(cfg);
    if (cfg.command == "oracle") return cmd_oracle(cfg);
    if (cfg.command == "fit-table") return cmd_fit_table(cfg);
    if (cfg.command == "serve") return cmd_serve(cfg);
  } catch (const ArgumentError& e) {
    log(std::string("usage error: ") + e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    log(std::string("error: ") + e.what());
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace gcf::cli
