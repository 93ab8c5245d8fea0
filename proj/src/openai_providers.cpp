#include "sir/openai_providers.hpp"

#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

#include "sir/error.hpp"

namespace sir {

using json = nlohmann::json;

void LiveProviderSettings::apply_env() {
  if (const char* url = std::getenv("SIR_PROVIDER_URL"); url && *url) base_url = url;
  if (const char* key = std::getenv("SIR_PROVIDER_KEY"); key && *key) api_key = key;
}

std::string base64_encode(std::string_view bytes) {
  static constexpr char kAlphabet[] =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    std::uint32_t n = (static_cast<unsigned char>(bytes[i]) << 16) |
                      (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                      static_cast<unsigned char>(bytes[i + 2]);
    out += kAlphabet[(n >> 18) & 63];
    out += kAlphabet[(n >> 12) & 63];
    out += kAlphabet[(n >> 6) & 63];
    out += kAlphabet[n & 63];
  }
  if (std::size_t rest = bytes.size() - i; rest > 0) {
    std::uint32_t n = static_cast<unsigned char>(bytes[i]) << 16;
    if (rest == 2) n |= static_cast<unsigned char>(bytes[i + 1]) << 8;
    out += kAlphabet[(n >> 18) & 63];
    out += kAlphabet[(n >> 12) & 63];
    out += rest == 2 ? kAlphabet[(n >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

namespace {

class ApiClient {
 public:
  explicit ApiClient(const LiveProviderSettings& s) : settings_(s) {
    if (settings_.base_url.empty()) {
      throw Error(Errc::InvalidArgument, "provider URL not configured (SIR_PROVIDER_URL)");
    }
  }

  json post(const std::string& path, const json& body) const {
    httplib::Client cli(settings_.base_url);
    const auto secs = settings_.timeout.count() / 1000;
    const auto usecs = (settings_.timeout.count() % 1000) * 1000;
    cli.set_connection_timeout(secs, usecs);
    cli.set_read_timeout(secs, usecs);
    cli.set_write_timeout(secs, usecs);
    httplib::Headers headers;
    if (!settings_.api_key.empty()) headers.emplace("Authorization", "Bearer " + settings_.api_key);
    auto res = cli.Post(path, headers, body.dump(), "application/json");
    if (!res) {
      throw Error(Errc::ProviderFailure, "request to " + path + " failed: " + httplib::to_string(res.error()),
                  true);
    }
    if (res->status >= 500 || res->status == 429) {
      throw Error(Errc::ProviderFailure, path + " returned HTTP " + std::to_string(res->status), true);
    }
    if (res->status >= 300) {
      throw Error(Errc::ProviderFailure, path + " returned HTTP " + std::to_string(res->status) + ": " + res->body);
    }
    try {
      return json::parse(res->body);
    } catch (const json::exception& e) {
      throw Error(Errc::ProviderFailure, "unparseable provider response: " + std::string(e.what()));
    }
  }

  const LiveProviderSettings& settings() const { return settings_; }

 private:
  LiveProviderSettings settings_;
};

std::string first_choice_text(const json& resp) {
  try {
    return resp.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(Errc::ProviderFailure, "malformed chat completion: " + std::string(e.what()));
  }
}

class LiveVision final : public VisionProvider {
 public:
  explicit LiveVision(const LiveProviderSettings& s) : client_(s) {}
  std::string provider_id() const override { return "openai-vision:" + client_.settings().vision_model; }

 protected:
  std::string do_describe(std::string_view image, ImageType type, std::string_view text) override {
    std::string instruction =
        "Describe this lecture slide for a retrieval index. Cover the textual content, "
        "any diagrams or images, and the layout. Be factual and concise.";
    if (!text.empty()) instruction += "\nText layer of the slide:\n" + std::string(text);
    const std::string data_uri =
        "data:" + std::string(mime_type(type)) + ";base64," + base64_encode(image);
    json body{{"model", client_.settings().vision_model},
              {"messages",
               {{{"role", "user"},
                 {"content",
                  {{{"type", "text"}, {"text", instruction}},
                   {{"type", "image_url"}, {"image_url", {{"url", data_uri}}}}}}}}}};
    return first_choice_text(client_.post("/v1/chat/completions", body));
  }

 private:
  ApiClient client_;
};

class LiveEmbedding final : public EmbeddingProvider {
 public:
  explicit LiveEmbedding(const LiveProviderSettings& s) : client_(s) {}
  std::size_t dimension() const override { return client_.settings().embedding_dimension; }
  std::string provider_id() const override {
    return "openai-embedding:" + client_.settings().embedding_model;
  }

 protected:
  std::vector<float> do_embed(std::string_view text) override {
    json body{{"model", client_.settings().embedding_model}, {"input", std::string(text)}};
    auto resp = client_.post("/v1/embeddings", body);
    try {
      return resp.at("data").at(0).at("embedding").get<std::vector<float>>();
    } catch (const json::exception& e) {
      throw Error(Errc::ProviderFailure, "malformed embeddings response: " + std::string(e.what()));
    }
  }

 private:
  ApiClient client_;
};

class LiveGeneration final : public GenerationProvider {
 public:
  explicit LiveGeneration(const LiveProviderSettings& s) : client_(s) {}
  std::string provider_id() const override {
    return "openai-chat:" + client_.settings().generation_model;
  }

 protected:
  std::string do_generate(std::string_view prompt) override {
    json body{{"model", client_.settings().generation_model},
              {"messages", {{{"role", "user"}, {"content", std::string(prompt)}}}}};
    return first_choice_text(client_.post("/v1/chat/completions", body));
  }

 private:
  ApiClient client_;
};

}  // namespace

std::unique_ptr<VisionProvider> make_live_vision_provider(const LiveProviderSettings& s) {
  return std::make_unique<LiveVision>(s);
}

std::unique_ptr<EmbeddingProvider> make_live_embedding_provider(const LiveProviderSettings& s) {
  return std::make_unique<LiveEmbedding>(s);
}

std::unique_ptr<GenerationProvider> make_live_generation_provider(const LiveProviderSettings& s) {
  return std::make_unique<LiveGeneration>(s);
}

}  // namespace sir
