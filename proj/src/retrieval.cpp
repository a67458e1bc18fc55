#include "autodsm/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numeric>

#include "autodsm/kernels.hpp"
#include "autodsm/utf8.hpp"

namespace autodsm::retrieval {
namespace {

constexpr std::size_t kNgram = 3;

char32_t fold_case(char32_t c) {
  if (c >= U'A' && c <= U'Z') return c + 32;
  // Latin-1 capitals, excluding the multiplication sign.
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 32;
  return c;
}

std::uint64_t mix(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

std::uint64_t hash_gram(std::u32string_view gram) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (char32_t c : gram) {
    for (int shift = 0; shift < 32; shift += 8) {
      h ^= (static_cast<std::uint64_t>(c) >> shift) & 0xFF;
      h *= 0x100000001b3ULL;
    }
  }
  return mix(h);
}

bool ranks_before(const ScoredChunk& a, const ScoredChunk& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.chunk->source_id != b.chunk->source_id) return a.chunk->source_id < b.chunk->source_id;
  return a.chunk->ordinal < b.chunk->ordinal;
}

}  // namespace

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw EmbeddingError("dimension mismatch: " + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()));
  }
  const double na = kernels::norm(a);
  const double nb = kernels::norm(b);
  if (na == 0.0 || nb == 0.0) throw EmbeddingError("zero-norm embedding vector");
  return kernels::dot(a, b) / (na * nb);
}

void offline_embed_into(std::string_view text, std::span<double> out) {
  const std::size_t dim = out.size();
  if (dim < 8) throw ConfigError("offline embedder dimension must be at least 8");
  std::fill(out.begin(), out.end(), 0.0);

  std::u32string padded = U" ";
  for (char32_t c : utf8::decode(text)) padded.push_back(fold_case(c));
  padded.push_back(U' ');

  if (!text.empty()) {
    for (std::size_t i = 0; i + kNgram <= padded.size(); ++i) {
      const auto h = hash_gram(std::u32string_view(padded).substr(i, kNgram));
      out[h % dim] += (h >> 63) ? -1.0 : 1.0;
    }
  }
  const double n = kernels::norm(out);
  if (n == 0.0) {
    out[0] = 1.0;
    return;
  }
  for (double& v : out) v /= n;
}

EmbeddingVector offline_embed(std::string_view text, std::size_t dimension) {
  EmbeddingVector v(dimension);
  offline_embed_into(text, v);
  return v;
}

std::vector<EmbeddingVector> Embedder::embed_batch(std::span<const std::string> texts) const {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed(t));
  return out;
}

OfflineEmbedder::OfflineEmbedder(std::size_t dimension) : dimension_(dimension) {
  if (dimension_ < 8) throw ConfigError("offline embedder dimension must be at least 8");
}

std::string OfflineEmbedder::id() const {
  return "offline-char3-d" + std::to_string(dimension_);
}

EmbeddingVector OfflineEmbedder::embed(std::string_view text) const {
  return offline_embed(text, dimension_);
}

std::vector<EmbeddingVector> OfflineEmbedder::embed_batch(
    std::span<const std::string> texts) const {
  std::vector<double> flat(texts.size() * dimension_);
  kernels::offline_embed_rows_parallel(texts, dimension_, flat);
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    auto first = flat.begin() + static_cast<std::ptrdiff_t>(i * dimension_);
    out.emplace_back(first, first + static_cast<std::ptrdiff_t>(dimension_));
  }
  return out;
}

VectorIndex::VectorIndex(std::string embedder_id, std::size_t dimension,
                         std::vector<corpus::Chunk> chunks, std::vector<double> matrix)
    : embedder_id_(std::move(embedder_id)),
      dimension_(dimension),
      chunks_(std::move(chunks)),
      matrix_(std::move(matrix)) {
  if (dimension_ == 0) throw EmbeddingError("embedding dimension must be positive");
  if (matrix_.size() != chunks_.size() * dimension_) {
    throw EmbeddingError("index matrix size does not match chunk count x dimension");
  }
  norms_.resize(chunks_.size());
  for (std::size_t i = 0; i < chunks_.size(); ++i) {
    norms_[i] = kernels::norm(vector(i));
    if (norms_[i] == 0.0) {
      throw EmbeddingError("zero-norm embedding for chunk (" + chunks_[i].source_id + ", " +
                           std::to_string(chunks_[i].ordinal) + ")");
    }
  }
}

std::span<const double> VectorIndex::vector(std::size_t i) const {
  return std::span<const double>(matrix_).subspan(i * dimension_, dimension_);
}

std::vector<double> VectorIndex::scores(std::span<const double> query) const {
  if (query.size() != dimension_) {
    throw EmbeddingError("query dimension " + std::to_string(query.size()) +
                         " does not match index dimension " + std::to_string(dimension_));
  }
  if (kernels::norm(query) == 0.0) throw EmbeddingError("zero-norm query embedding");
  std::vector<double> out(chunks_.size());
  kernels::cosine_scores_parallel(matrix_, dimension_, norms_, query, out);
  return out;
}

std::vector<ScoredChunk> VectorIndex::search(std::span<const double> query,
                                             std::size_t k) const {
  if (empty()) throw EmbeddingError("cannot search an empty index");
  const auto s = scores(query);
  std::vector<ScoredChunk> ranked;
  ranked.reserve(chunks_.size());
  for (std::size_t i = 0; i < chunks_.size(); ++i) ranked.push_back({&chunks_[i], s[i]});
  const auto take = std::min(k, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(take),
                    ranked.end(), ranks_before);
  ranked.resize(take);
  return ranked;
}

void VectorIndex::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write index file: " + path.string());
  out << nlohmann::json{{"embedder_id", embedder_id_}, {"dimension", dimension_}}.dump()
      << '\n';
  for (std::size_t i = 0; i < chunks_.size(); ++i) {
    const auto& c = chunks_[i];
    const auto v = vector(i);
    nlohmann::json rec{{"source_id", c.source_id},
                       {"ordinal", c.ordinal},
                       {"start_offset", c.start_offset},
                       {"text", c.text},
                       {"vector", std::vector<double>(v.begin(), v.end())}};
    out << rec.dump() << '\n';
  }
  if (!out) throw IoError("failed writing index file: " + path.string());
}

VectorIndex VectorIndex::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open index file: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty index file: " + path.string());
  try {
    const auto header = nlohmann::json::parse(line);
    auto id = header.at("embedder_id").get<std::string>();
    const auto dim = header.at("dimension").get<std::size_t>();
    std::vector<corpus::Chunk> chunks;
    std::vector<double> matrix;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto rec = nlohmann::json::parse(line);
      chunks.push_back(corpus::Chunk{rec.at("source_id").get<std::string>(),
                                     rec.at("ordinal").get<std::size_t>(),
                                     rec.at("text").get<std::string>(),
                                     rec.at("start_offset").get<std::size_t>()});
      const auto v = rec.at("vector").get<std::vector<double>>();
      if (v.size() != dim) {
        throw ParseError("index record " + std::to_string(chunks.size()) +
                         " has dimension " + std::to_string(v.size()));
      }
      matrix.insert(matrix.end(), v.begin(), v.end());
    }
    return VectorIndex(std::move(id), dim, std::move(chunks), std::move(matrix));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("malformed index file " + path.string() + ": " + e.what());
  }
}

VectorIndex build_index(std::vector<corpus::Chunk> chunks, const Embedder& embedder) {
  if (chunks.empty()) throw EmbeddingError("cannot build an index from zero chunks");
  std::vector<std::string> texts;
  texts.reserve(chunks.size());
  for (const auto& c : chunks) texts.push_back(c.text);

  std::vector<EmbeddingVector> vectors;
  try {
    vectors = embedder.embed_batch(texts);
  } catch (const Error& batch_error) {
    // Re-embed one at a time to name the failing chunk.
    for (const auto& c : chunks) {
      try {
        embedder.embed(c.text);
      } catch (const Error& e) {
        throw EmbeddingError("embedding failed for chunk (" + c.source_id + ", " +
                             std::to_string(c.ordinal) + "): " + e.what());
      }
    }
    throw EmbeddingError(std::string("embedding failed: ") + batch_error.what());
  }
  if (vectors.size() != chunks.size()) {
    throw EmbeddingError("embedder returned " + std::to_string(vectors.size()) +
                         " vectors for " + std::to_string(chunks.size()) + " chunks");
  }

  const std::size_t dim = embedder.dimension();
  std::vector<double> matrix;
  matrix.reserve(chunks.size() * dim);
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].size() != dim) {
      throw EmbeddingError("embedding for chunk (" + chunks[i].source_id + ", " +
                           std::to_string(chunks[i].ordinal) + ") has dimension " +
                           std::to_string(vectors[i].size()) + ", expected " +
                           std::to_string(dim));
    }
    matrix.insert(matrix.end(), vectors[i].begin(), vectors[i].end());
  }
  return VectorIndex(embedder.id(), dim, std::move(chunks), std::move(matrix));
}

std::vector<ScoredChunk> top_k_scored(const VectorIndex& index, std::string_view query,
                                      std::size_t k, const Embedder& embedder) {
  if (index.empty()) throw EmbeddingError("cannot retrieve from an empty index");
  if (k == 0) throw ConfigError("top_k must be positive");
  if (embedder.id() != index.embedder_id()) {
    throw EmbeddingError("embedder '" + embedder.id() + "' does not match index embedder '" +
                         index.embedder_id() + "'");
  }
  const auto q = embedder.embed(query);
  return index.search(q, k);
}

std::vector<corpus::Chunk> top_k(const VectorIndex& index, std::string_view query,
                                 std::size_t k, const Embedder& embedder) {
  std::vector<corpus::Chunk> out;
  for (const auto& s : top_k_scored(index, query, k, embedder)) out.push_back(*s.chunk);
  return out;
}

}  // namespace autodsm::retrieval
