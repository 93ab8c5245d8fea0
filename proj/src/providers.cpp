#include "sir/providers.hpp"

#include <cctype>
#include <cmath>
#include <thread>

#include "sir/error.hpp"
#include "sir/hash.hpp"

namespace sir {

std::string VisionProvider::describe(std::string_view image, ImageType type,
                                     std::string_view extracted_text) {
  ++calls_;
  auto out = do_describe(image, type, extracted_text);
  if (out.empty()) throw Error(Errc::ProviderFailure, provider_id() + " returned an empty description", true);
  return out;
}

std::vector<float> EmbeddingProvider::embed(std::string_view text) {
  ++calls_;
  auto v = do_embed(text);
  if (v.size() != dimension()) {
    throw Error(Errc::DimensionMismatch, provider_id() + " returned " + std::to_string(v.size()) +
                                             " values, expected " + std::to_string(dimension()));
  }
  return v;
}

std::string GenerationProvider::generate(std::string_view prompt) {
  ++calls_;
  auto out = do_generate(prompt);
  if (out.empty()) throw Error(Errc::ProviderFailure, provider_id() + " returned empty text", true);
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (c < 0x80 && std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

FeatureHashEmbedder::FeatureHashEmbedder(std::size_t dimension) : dim_(dimension) {
  if (dim_ == 0) throw Error(Errc::InvalidArgument, "embedding dimension must be positive");
}

std::string FeatureHashEmbedder::provider_id() const {
  return "feature-hash-fnv1a64-fmix-d" + std::to_string(dim_);
}

std::vector<float> FeatureHashEmbedder::do_embed(std::string_view text) {
  std::vector<double> acc(dim_, 0.0);
  bool any = false;
  for (const auto& tok : tokenize(text)) {
    const std::uint64_t h = token_hash(tok);
    acc[h % dim_] += (h >> 63) ? -1.0 : 1.0;
    any = true;
  }
  if (!any) throw Error(Errc::EmptyInput, "no tokens to embed");
  double norm = 0;
  for (double x : acc) norm += x * x;
  norm = std::sqrt(norm);
  if (norm == 0) throw Error(Errc::DegenerateData, "tokens cancelled to a zero vector");
  std::vector<float> out(dim_);
  for (std::size_t i = 0; i < dim_; ++i) out[i] = static_cast<float>(acc[i] / norm);
  return out;
}

std::string MockVisionProvider::do_describe(std::string_view image, ImageType,
                                            std::string_view extracted_text) {
  {
    std::lock_guard lock(mu_);
    if (fail_ && fail_(extracted_text)) {
      throw Error(Errc::ProviderFailure, "mock vision provider timeout", true);
    }
  }
  if (!extracted_text.empty()) return std::string(extracted_text);
  return "image-only slide visual-" + to_hex(fnv1a64(image)).substr(0, 8);
}

std::string MockGenerationProvider::reply_for(std::string_view prompt) {
  return "Thanks for your answer. [mock feedback " + to_hex(fnv1a64(prompt)) + "]";
}

std::string MockGenerationProvider::do_generate(std::string_view prompt) {
  if (auto d = delay_ms_.load(); d > 0) std::this_thread::sleep_for(std::chrono::milliseconds(d));
  if (failing_) throw Error(Errc::ProviderFailure, "mock generation provider failure", true);
  return reply_for(prompt);
}

}  // namespace sir
