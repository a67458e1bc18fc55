#include "autodsm/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <fstream>
#include <nlohmann/json.hpp>
#include <ostream>
#include <spdlog/spdlog.h>

#include "autodsm/corpus.hpp"
#include "autodsm/dsm.hpp"
#include "autodsm/http.hpp"
#include "autodsm/metrics.hpp"
#include "autodsm/remote_embedder.hpp"
#include "autodsm/retrieval.hpp"

namespace autodsm::cli {
namespace {

using Clock = std::chrono::steady_clock;

std::filesystem::path sibling(const std::filesystem::path& p, std::string_view suffix) {
  auto s = p;
  s += suffix;
  return s;
}

std::shared_ptr<oracle::ChatBackend> make_backend(const CliConfig& cfg) {
  if (cfg.backend == "scripted") {
    if (!cfg.script) throw ConfigError("--backend scripted requires --script");
    return std::make_shared<oracle::ScriptedBackend>(oracle::ScriptedBackend::load(*cfg.script));
  }
  if (cfg.backend == "remote" || cfg.backend == "cached-remote") {
    oracle::RemoteChatConfig rc;
    rc.base_url = cfg.endpoint;
    rc.api_key = http::api_key_from_env();
    rc.max_in_flight = cfg.max_in_flight;
    return std::make_shared<oracle::RemoteChatBackend>(std::move(rc));
  }
  throw ConfigError("unknown backend '" + cfg.backend +
                    "' (expected remote, scripted or cached-remote)");
}

std::optional<std::filesystem::path> cache_path(const CliConfig& cfg) {
  if (cfg.cache) return cfg.cache;
  if (cfg.backend == "cached-remote") return sibling(cfg.output, ".cache.jsonl");
  return std::nullopt;
}

std::unique_ptr<retrieval::Embedder> make_embedder(const CliConfig& cfg) {
  std::string kind = cfg.embedder;
  if (kind == "auto") kind = cfg.backend == "scripted" ? "offline" : "remote";
  if (kind == "offline") return std::make_unique<retrieval::OfflineEmbedder>(cfg.offline_dimension);
  if (kind == "remote") {
    retrieval::RemoteEmbedderConfig ec;
    ec.base_url = cfg.endpoint;
    ec.model = cfg.embedding_model;
    ec.dimension = cfg.embedding_dimension;
    ec.api_key = http::api_key_from_env();
    return std::make_unique<retrieval::RemoteEmbedder>(std::move(ec));
  }
  throw ConfigError("unknown embedder '" + cfg.embedder + "' (expected auto, offline or remote)");
}

retrieval::VectorIndex load_or_build_index(const CliConfig& cfg, std::vector<corpus::Chunk> chunks,
                                           const retrieval::Embedder& embedder) {
  if (cfg.index_cache && std::filesystem::exists(*cfg.index_cache)) {
    auto cached = retrieval::VectorIndex::load(*cfg.index_cache);
    if (cached.embedder_id() == embedder.id() && cached.chunks() == chunks) {
      spdlog::info("reusing vector index from {}", cfg.index_cache->string());
      return cached;
    }
    spdlog::info("index cache {} is stale; rebuilding", cfg.index_cache->string());
  }
  auto index = retrieval::build_index(std::move(chunks), embedder);
  if (cfg.index_cache) index.save(*cfg.index_cache);
  return index;
}

nlohmann::json run_log(const CliConfig& cfg, const qa::GenerationResult& r, double seconds,
                       std::string_view status) {
  const auto& h = r.dsm.headings();
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : r.pairs) {
    if (!p.answered) continue;
    pairs.push_back({{"row", h[p.row]},
                     {"column", h[p.col]},
                     {"answer", p.answer},
                     {"label", dsm::to_string(p.label)},
                     {"conforming", p.conforming},
                     {"cached", p.cached}});
  }
  nlohmann::json inputs = nlohmann::json::array();
  for (const auto& p : cfg.inputs) inputs.push_back(p.string());
  return {{"status", status},
          {"product", cfg.product},
          {"linkage_type", cfg.linkage_type},
          {"inputs", inputs},
          {"provenance", r.dsm.provenance()},
          {"components", h},
          {"elements_answer", r.elements_answer ? nlohmann::json(*r.elements_answer) : nlohmann::json()},
          {"pair_queries", r.pair_queries},
          {"nonconforming_answers", r.nonconforming},
          {"pairs", pairs},
          {"elapsed_seconds", seconds}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

std::vector<std::string> read_headings_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open headings file: " + path.string());
  std::vector<std::string> headings;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (dsm::trim(line).empty()) continue;
    headings.push_back(line);
  }
  return headings;
}

int run_generate(const CliConfig& cfg, std::ostream& out, std::ostream& err,
                 std::shared_ptr<oracle::ChatBackend> backend) {
  const auto started = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - started).count(); };

  qa::RunConfig rc;
  std::optional<std::vector<std::string>> override_headings;
  try {
    rc.mode = qa::parse_mode(cfg.mode);
    rc.top_k = cfg.top_k;
    rc.split = corpus::SplitConfig{cfg.chunk_size, cfg.overlap};
    rc.split.validate();
    rc.model_id = cfg.model;
    rc.temperature = cfg.temperature;
    rc.max_in_flight = cfg.max_in_flight;
    rc.context_budget = cfg.context_budget;
    if (cfg.product.empty()) throw ConfigError("--product is required");
    if (cfg.output.empty()) throw ConfigError("--output is required");
    if (rc.top_k == 0) throw ConfigError("--top-k must be positive");
    if (rc.max_in_flight == 0) throw ConfigError("--max-in-flight must be positive");
    if (rc.mode == qa::Mode::Retrieval && cfg.inputs.empty()) {
      throw ConfigError("--input is required unless --mode direct");
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }

  std::optional<qa::GenerationResult> partial;
  try {
    if (cfg.headings_override) override_headings = read_headings_file(*cfg.headings_override);
    if (!backend) backend = make_backend(cfg);
    if (const auto path = cache_path(cfg)) {
      backend = std::make_shared<oracle::CachingBackend>(std::move(backend), *path);
    }

    std::unique_ptr<retrieval::Embedder> embedder;
    std::optional<retrieval::VectorIndex> index;
    if (rc.mode == qa::Mode::Retrieval) {
      const auto docs = corpus::load_corpus(cfg.inputs);
      auto chunks = corpus::split_all(docs, rc.split);
      if (chunks.empty()) throw Error("input documents are empty; nothing to index");
      embedder = make_embedder(cfg);
      index = load_or_build_index(cfg, std::move(chunks), *embedder);
      spdlog::info("indexed {} chunks from {} document(s)", index->size(), docs.size());
    }

    const qa::ProductQuery q{cfg.product, cfg.linkage_type};
    qa::GenerationResult result = [&] {
      try {
        return qa::generate_dsm(index ? &*index : nullptr, q, rc, *backend, embedder.get(),
                                override_headings);
      } catch (const qa::GenerationAborted& e) {
        partial = e.partial();
        throw;
      }
    }();

    dsm::write_csv_file(result.dsm, cfg.output.string());
    write_text(sibling(cfg.output, ".log.json"), run_log(cfg, result, elapsed(), "ok").dump(2) + "\n");
    out << "wrote " << result.dsm.size() << "x" << result.dsm.size() << " DSM to "
        << cfg.output.string() << " (" << result.pair_queries << " pairwise questions, "
        << result.nonconforming << " non-conforming answers)\n";
    return kSuccess;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    if (partial) {
      try {
        const auto partial_csv = sibling(cfg.output, ".partial.csv");
        dsm::write_csv_file(partial->dsm, partial_csv.string());
        write_text(sibling(cfg.output, ".log.json"),
                   run_log(cfg, *partial, elapsed(), "aborted").dump(2) + "\n");
        err << "partial DSM written to " << partial_csv.string()
            << "; answers received so far are kept in the cache for resumption\n";
      } catch (const std::exception& inner) {
        err << "error: could not write partial results: " << inner.what() << '\n';
      }
    }
    return kPipelineFailure;
  }
}

int run_evaluate(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.generated.empty()) {
    err << "error: evaluate needs a generated DSM CSV\n";
    return kUsageError;
  }
  try {
    const auto generated = dsm::read_csv_file(cfg.generated.string());
    std::optional<dsm::Dsm> reference;
    if (cfg.reference) reference = dsm::read_csv_file(cfg.reference->string());
    const auto r = metrics::report(generated, reference ? &*reference : nullptr);
    out << metrics::format_table(r);
    const auto kv_path = cfg.metrics_out ? *cfg.metrics_out : sibling(cfg.generated, ".metrics.txt");
    write_text(kv_path, metrics::format_key_values(r));
    return kSuccess;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kPipelineFailure;
  }
}

int run_show_prompts(std::ostream& out) {
  out << "[elements question]\n" << qa::kElementsTemplate << "\n\n";
  out << "[link question]\n" << qa::kLinkTemplate << "\n\n";
  out << "[retrieval prompt header]\n" << qa::kContextHeader << '\n';
  return kSuccess;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Generate and evaluate Design Structure Matrices with a chat-completion model",
               "autodsm"};
  app.set_version_flag("--version", "autodsm 0.1.0");
  bool show_prompts = false;
  app.add_flag("--show-prompts", show_prompts, "Print the prompt templates and exit");
  app.require_subcommand(0, 1);

  CliConfig cfg;
  auto* gen = app.add_subcommand("generate", "Build a DSM from documents");
  gen->add_option("--input", cfg.inputs, "Plain-text input documents");
  gen->add_option("--product", cfg.product, "Product or system name, e.g. \"diesel engine\"")
      ->required();
  gen->add_option("--linkage-type", cfg.linkage_type, "Link qualifier, e.g. mechanically");
  gen->add_option("--output", cfg.output, "Output CSV path")->required();
  gen->add_option("--backend", cfg.backend, "remote | scripted | cached-remote")
      ->check(CLI::IsMember({"remote", "scripted", "cached-remote"}))
      ->capture_default_str();
  gen->add_option("--model", cfg.model, "Chat model id")->capture_default_str();
  gen->add_option("--endpoint", cfg.endpoint, "Base URL of the OpenAI-compatible API")
      ->capture_default_str();
  gen->add_option("--temperature", cfg.temperature)->capture_default_str();
  gen->add_option("--chunk-size", cfg.chunk_size)->capture_default_str();
  gen->add_option("--overlap", cfg.overlap)->capture_default_str();
  gen->add_option("--top-k", cfg.top_k)->capture_default_str();
  gen->add_option("--mode", cfg.mode, "retrieval | direct")
      ->check(CLI::IsMember({"retrieval", "direct"}))
      ->capture_default_str();
  gen->add_option("--headings-override", cfg.headings_override,
                  "File with one component per line; skips the elements question")
      ->check(CLI::ExistingFile);
  gen->add_option("--cache", cfg.cache, "Response cache file (JSON lines)");
  gen->add_option("--script", cfg.script, "Script file for the scripted backend")
      ->check(CLI::ExistingFile);
  gen->add_option("--max-in-flight", cfg.max_in_flight)->capture_default_str();
  gen->add_option("--context-budget", cfg.context_budget,
                  "Maximum characters in a retrieval prompt")
      ->capture_default_str();
  gen->add_option("--embedder", cfg.embedder, "auto | offline | remote")
      ->check(CLI::IsMember({"auto", "offline", "remote"}))
      ->capture_default_str();
  gen->add_option("--embedding-model", cfg.embedding_model)->capture_default_str();
  gen->add_option("--embedding-dimension", cfg.embedding_dimension)->capture_default_str();
  gen->add_option("--offline-dimension", cfg.offline_dimension)->capture_default_str();
  gen->add_option("--index-cache", cfg.index_cache, "Reuse or store the vector index here");
  gen->set_config("--config", "", "TOML/INI file with generate options");

  auto* eval = app.add_subcommand("evaluate", "Report metrics for a generated DSM");
  eval->add_option("generated", cfg.generated, "Generated DSM CSV")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--reference", cfg.reference, "Reference DSM CSV with the same headings")
      ->check(CLI::ExistingFile);
  eval->add_option("--metrics-out", cfg.metrics_out,
                   "key: value report path (default <generated>.metrics.txt)");

  auto* prompts = app.add_subcommand("show-prompts", "Print the prompt templates");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  if (show_prompts || prompts->parsed()) return run_show_prompts(out);
  if (gen->parsed()) return run_generate(cfg, out, err);
  if (eval->parsed()) return run_evaluate(cfg, out, err);
  err << app.help();
  return kUsageError;
}

}  // namespace autodsm::cli
