#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "autodsm/oracle.hpp"
#include "autodsm/qa.hpp"

namespace autodsm::cli {

enum ExitCode : int { kSuccess = 0, kUsageError = 1, kPipelineFailure = 2 };

struct CliConfig {
  // generate
  std::vector<std::filesystem::path> inputs;
  std::string product;
  std::string linkage_type;
  std::filesystem::path output;
  std::string backend = "remote";  // remote | scripted | cached-remote
  std::string model = oracle::kDefaultModel;
  std::string endpoint = "https://api.openai.com/v1";
  double temperature = 0.0;
  std::size_t chunk_size = 1000;
  std::size_t overlap = 150;
  std::size_t top_k = 4;
  std::string mode = "retrieval";
  std::optional<std::filesystem::path> headings_override;
  std::optional<std::filesystem::path> cache;
  std::optional<std::filesystem::path> script;
  std::size_t max_in_flight = 4;
  std::size_t context_budget = 12000;
  std::string embedder = "auto";  // auto | offline | remote
  std::string embedding_model = "text-embedding-ada-002";
  std::size_t embedding_dimension = 1536;
  std::size_t offline_dimension = 256;
  std::optional<std::filesystem::path> index_cache;

  // evaluate
  std::filesystem::path generated;
  std::optional<std::filesystem::path> reference;
  std::optional<std::filesystem::path> metrics_out;
};

/// One heading per line, order kept. Blank lines (and a trailing newline)
/// are skipped; lines are otherwise used verbatim.
std::vector<std::string> read_headings_file(const std::filesystem::path& path);

/// Runs the pipeline and writes `output` plus `<output>.log.json`. When
/// `backend` is given it replaces the backend the flags would build (the
/// cache wrapper is still applied if a cache path is set).
int run_generate(const CliConfig& cfg, std::ostream& out, std::ostream& err,
                 std::shared_ptr<oracle::ChatBackend> backend = nullptr);

int run_evaluate(const CliConfig& cfg, std::ostream& out, std::ostream& err);

/// Prints both question templates and the retrieval prompt header verbatim.
int run_show_prompts(std::ostream& out);

/// Full command line front end; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace autodsm::cli
