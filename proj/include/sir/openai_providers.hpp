#pragma once

#include <chrono>
#include <memory>
#include <string>

#include "sir/providers.hpp"

namespace sir {

/// Endpoint settings for an OpenAI-compatible chat-completions/embeddings API.
struct LiveProviderSettings {
  std::string base_url;  // e.g. "https://api.openai.com"
  std::string api_key;
  std::string generation_model = "gpt-4o";
  std::string vision_model = "gpt-4o";
  std::string embedding_model = "text-embedding-3-small";
  std::size_t embedding_dimension = 1536;
  std::chrono::milliseconds timeout{30000};

  /// Fills base_url/api_key from SIR_PROVIDER_URL / SIR_PROVIDER_KEY when set.
  void apply_env();
};

std::unique_ptr<VisionProvider> make_live_vision_provider(const LiveProviderSettings& s);
std::unique_ptr<EmbeddingProvider> make_live_embedding_provider(const LiveProviderSettings& s);
std::unique_ptr<GenerationProvider> make_live_generation_provider(const LiveProviderSettings& s);

std::string base64_encode(std::string_view bytes);

}  // namespace sir
