#include "autodsm/corpus.hpp"

#include <fstream>
#include <iterator>

#include "autodsm/error.hpp"
#include "autodsm/utf8.hpp"

namespace autodsm::corpus {

void SplitConfig::validate() const {
  if (chunk_size == 0) throw ConfigError("chunk_size must be positive");
  if (overlap >= chunk_size) {
    throw ConfigError("overlap (" + std::to_string(overlap) +
                      ") must be smaller than chunk_size (" +
                      std::to_string(chunk_size) + ")");
  }
}

Document load_document(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open input file: " + path.string());
  std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (in.bad()) throw IoError("failed reading input file: " + path.string());
  try {
    utf8::scalar_offsets(text);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return Document{path.string(), std::move(text)};
}

std::vector<Document> load_corpus(std::span<const std::filesystem::path> paths) {
  std::vector<Document> docs;
  docs.reserve(paths.size());
  for (const auto& p : paths) docs.push_back(load_document(p));
  return docs;
}

std::vector<Chunk> split(const Document& doc, const SplitConfig& cfg) {
  cfg.validate();
  const auto offsets = utf8::scalar_offsets(doc.text);
  const std::size_t len = offsets.size() - 1;
  std::vector<Chunk> chunks;
  if (len == 0) return chunks;

  const std::size_t stride = cfg.stride();
  for (std::size_t start = 0;; start += stride) {
    const std::size_t end = std::min(start + cfg.chunk_size, len);
    const auto first = offsets[start];
    chunks.push_back(Chunk{doc.source_id, chunks.size(),
                           doc.text.substr(first, offsets[end] - first), start});
    // A further stride would start inside this chunk's overlap tail and be
    // fully contained in it.
    if (end == len) break;
  }
  return chunks;
}

std::vector<Chunk> split_all(std::span<const Document> docs, const SplitConfig& cfg) {
  std::vector<Chunk> out;
  for (const auto& d : docs) {
    auto chunks = split(d, cfg);
    out.insert(out.end(), std::make_move_iterator(chunks.begin()),
               std::make_move_iterator(chunks.end()));
  }
  return out;
}

}  // namespace autodsm::corpus
