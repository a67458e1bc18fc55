#include "autodsm/remote_embedder.hpp"

#include <nlohmann/json.hpp>

namespace autodsm::retrieval {

RemoteEmbedder::RemoteEmbedder(RemoteEmbedderConfig config)
    : config_(std::move(config)), endpoint_(http::Endpoint::parse(config_.base_url)) {
  if (config_.dimension == 0) throw ConfigError("embedding dimension must be positive");
  if (config_.batch_size == 0) throw ConfigError("embedding batch size must be positive");
}

std::string RemoteEmbedder::id() const {
  return "remote:" + config_.model + "@" + endpoint_.origin + endpoint_.base_path;
}

EmbeddingVector RemoteEmbedder::embed(std::string_view text) const {
  const std::string one(text);
  return embed_batch(std::span<const std::string>(&one, 1)).front();
}

std::vector<EmbeddingVector> RemoteEmbedder::embed_batch(
    std::span<const std::string> texts) const {
  std::vector<EmbeddingVector> out(texts.size());
  http::PostOptions options{config_.api_key, std::chrono::seconds(120), config_.retry};

  for (std::size_t first = 0; first < texts.size(); first += config_.batch_size) {
    const auto count = std::min(config_.batch_size, texts.size() - first);
    nlohmann::json request{{"model", config_.model},
                           {"input", std::vector<std::string>(texts.begin() + first,
                                                              texts.begin() + first + count)}};
    const auto response = http::post_json(endpoint_, "/embeddings", request.dump(), options);
    try {
      const auto body = nlohmann::json::parse(response.body);
      const auto& data = body.at("data");
      if (data.size() != count) {
        throw EmbeddingError("embeddings response has " + std::to_string(data.size()) +
                             " items for " + std::to_string(count) + " inputs");
      }
      for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& item = data[i];
        const auto slot = item.contains("index") ? item.at("index").get<std::size_t>() : i;
        if (slot >= count) throw EmbeddingError("embeddings response index out of range");
        auto v = item.at("embedding").get<EmbeddingVector>();
        if (v.size() != config_.dimension) {
          throw EmbeddingError("embedding has dimension " + std::to_string(v.size()) +
                               ", expected " + std::to_string(config_.dimension));
        }
        out[first + slot] = std::move(v);
      }
    } catch (const nlohmann::json::exception& e) {
      throw EmbeddingError(std::string("malformed embeddings response: ") + e.what());
    }
  }
  return out;
}

}  // namespace autodsm::retrieval
