#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace autodsm::corpus {

/// A plain-text source document. `text` is well-formed UTF-8; all lengths
/// and offsets elsewhere in the library count Unicode scalar values.
struct Document {
  std::string source_id;
  std::string text;
};

/// A contiguous character span of one document.
struct Chunk {
  std::string source_id;
  std::size_t ordinal = 0;
  std::string text;
  std::size_t start_offset = 0;  // in scalar values

  friend bool operator==(const Chunk&, const Chunk&) = default;
};

struct SplitConfig {
  std::size_t chunk_size = 1000;
  std::size_t overlap = 150;

  std::size_t stride() const { return chunk_size - overlap; }
  /// Throws ConfigError unless chunk_size > 0 and overlap < chunk_size.
  void validate() const;
};

/// Reads each path as UTF-8 text, in input order. Missing files raise
/// IoError naming the path; malformed bytes raise ParseError with the
/// byte offset.
std::vector<Document> load_corpus(std::span<const std::filesystem::path> paths);

Document load_document(const std::filesystem::path& path);

/// Fixed-stride character splitting: chunk i starts at i * stride and is at
/// most chunk_size long. Stops once a chunk reaches the end of the document.
std::vector<Chunk> split(const Document& doc, const SplitConfig& cfg);

/// Splits every document independently; chunks never span documents.
std::vector<Chunk> split_all(std::span<const Document> docs, const SplitConfig& cfg);

}  // namespace autodsm::corpus
