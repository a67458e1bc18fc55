#pragma once

#include <cstddef>
#include <string>

#include "autodsm/http.hpp"
#include "autodsm/retrieval.hpp"

namespace autodsm::retrieval {

struct RemoteEmbedderConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string model = "text-embedding-ada-002";
  std::size_t dimension = 1536;
  std::size_t batch_size = 64;
  std::string api_key;
  http::RetryPolicy retry;
};

/// Embeddings over the common `POST {base}/embeddings` wire shape:
/// {"model": ..., "input": [...]} -> {"data": [{"index": i, "embedding": [...]}]}.
class RemoteEmbedder final : public Embedder {
 public:
  explicit RemoteEmbedder(RemoteEmbedderConfig config);

  std::string id() const override;
  std::size_t dimension() const override { return config_.dimension; }
  EmbeddingVector embed(std::string_view text) const override;
  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const override;

 private:
  RemoteEmbedderConfig config_;
  http::Endpoint endpoint_;
};

}  // namespace autodsm::retrieval
