#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "autodsm/corpus.hpp"
#include "autodsm/error.hpp"

namespace autodsm::retrieval {

using EmbeddingVector = std::vector<double>;

class EmbeddingError : public Error {
 public:
  using Error::Error;
};

/// Cosine similarity. Throws EmbeddingError on dimension mismatch or when
/// either vector has zero norm.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// Deterministic hashed character-trigram signature of the lowercased text,
/// normalized to unit length. The empty string (or any text whose signed
/// bucket counts cancel to zero) maps to (1, 0, ..., 0).
/// Requires dimension >= 8.
EmbeddingVector offline_embed(std::string_view text, std::size_t dimension);

/// Writes offline_embed(text, out.size()) into `out` without allocating the
/// result vector.
void offline_embed_into(std::string_view text, std::span<double> out);

/// Abstract text embedder. Implementations must be safe to call
/// concurrently.
class Embedder {
 public:
  virtual ~Embedder() = default;

  virtual std::string id() const = 0;
  virtual std::size_t dimension() const = 0;
  virtual EmbeddingVector embed(std::string_view text) const = 0;

  /// Embeds many texts, returning vectors in input order.
  virtual std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const;
};

class OfflineEmbedder final : public Embedder {
 public:
  explicit OfflineEmbedder(std::size_t dimension = 256);

  std::string id() const override;
  std::size_t dimension() const override { return dimension_; }
  EmbeddingVector embed(std::string_view text) const override;
  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const override;

 private:
  std::size_t dimension_;
};

struct ScoredChunk {
  const corpus::Chunk* chunk;
  double score;
};

/// Immutable in-memory store of chunk embeddings searched by exact linear scan.
class VectorIndex {
 public:
  VectorIndex(std::string embedder_id, std::size_t dimension,
              std::vector<corpus::Chunk> chunks, std::vector<double> matrix);

  const std::string& embedder_id() const { return embedder_id_; }
  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return chunks_.size(); }
  bool empty() const { return chunks_.empty(); }
  const std::vector<corpus::Chunk>& chunks() const { return chunks_; }
  std::span<const double> vector(std::size_t i) const;

  /// Scores every entry against `query` using the parallel kernel.
  std::vector<double> scores(std::span<const double> query) const;

  /// min(k, size()) best entries for an already embedded query, by
  /// descending similarity, ties by ascending (source_id, ordinal).
  std::vector<ScoredChunk> search(std::span<const double> query, std::size_t k) const;

  /// Flat record file: one header line then one JSON object per entry.
  void save(const std::filesystem::path& path) const;
  static VectorIndex load(const std::filesystem::path& path);

 private:
  std::string embedder_id_;
  std::size_t dimension_;
  std::vector<corpus::Chunk> chunks_;
  std::vector<double> matrix_;
  std::vector<double> norms_;
};

/// Embeds every chunk (order preserved). Throws EmbeddingError for an empty
/// chunk list, or naming (source_id, ordinal) of a chunk the embedder failed on.
VectorIndex build_index(std::vector<corpus::Chunk> chunks, const Embedder& embedder);

/// The k chunks most similar to `query`. Throws EmbeddingError if the index
/// is empty or was built by a different embedder.
std::vector<corpus::Chunk> top_k(const VectorIndex& index, std::string_view query,
                                 std::size_t k, const Embedder& embedder);

std::vector<ScoredChunk> top_k_scored(const VectorIndex& index, std::string_view query,
                                      std::size_t k, const Embedder& embedder);

}  // namespace autodsm::retrieval
