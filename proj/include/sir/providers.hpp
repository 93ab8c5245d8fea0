#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "sir/content_store.hpp"

namespace sir {

/// Turns a slide image (plus its text layer) into a textual description.
class VisionProvider {
 public:
  virtual ~VisionProvider() = default;

  /// Counts the call, forwards to the backend and rejects empty output.
  std::string describe(std::string_view image, ImageType type, std::string_view extracted_text);
  std::uint64_t call_count() const { return calls_.load(); }
  virtual std::string provider_id() const = 0;

 protected:
  virtual std::string do_describe(std::string_view image, ImageType type,
                                  std::string_view extracted_text) = 0;

 private:
  std::atomic<std::uint64_t> calls_{0};
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  /// Raw provider output; checked to have dimension() entries.
  std::vector<float> embed(std::string_view text);
  std::uint64_t call_count() const { return calls_.load(); }
  virtual std::size_t dimension() const = 0;
  virtual std::string provider_id() const = 0;

 protected:
  virtual std::vector<float> do_embed(std::string_view text) = 0;

 private:
  std::atomic<std::uint64_t> calls_{0};
};

class GenerationProvider {
 public:
  virtual ~GenerationProvider() = default;

  std::string generate(std::string_view prompt);
  std::uint64_t call_count() const { return calls_.load(); }
  virtual std::string provider_id() const = 0;

 protected:
  virtual std::string do_generate(std::string_view prompt) = 0;

 private:
  std::atomic<std::uint64_t> calls_{0};
};

/// Lowercased alphanumeric tokens of `text`.
std::vector<std::string> tokenize(std::string_view text);

/// Deterministic bag-of-words embedder. Each token is hashed with token_hash
/// (FNV-1a, then the MurmurHash3 finalizer); it adds +1 (top bit clear) or -1 (top bit set) at index h mod D and
/// the result is L2-normalized. Shared vocabulary means high cosine.
class FeatureHashEmbedder final : public EmbeddingProvider {
 public:
  static constexpr std::size_t kDefaultDimension = 256;

  explicit FeatureHashEmbedder(std::size_t dimension = kDefaultDimension);
  std::size_t dimension() const override { return dim_; }
  std::string provider_id() const override;

 protected:
  std::vector<float> do_embed(std::string_view text) override;

 private:
  std::size_t dim_;
};

/// Mock vision model: echoes the slide's text layer; image-only slides get a
/// description derived from the image digest. Failures can be injected.
class MockVisionProvider final : public VisionProvider {
 public:
  using FailurePredicate = std::function<bool(std::string_view extracted_text)>;

  std::string provider_id() const override { return "mock-vision-v1"; }
  void set_failure(FailurePredicate pred) {
    std::lock_guard lock(mu_);
    fail_ = std::move(pred);
  }

 protected:
  std::string do_describe(std::string_view image, ImageType type,
                          std::string_view extracted_text) override;

 private:
  std::mutex mu_;
  FailurePredicate fail_;
};

/// Mock generator: returns a fixed-format reply carrying a fingerprint of
/// the prompt, so equal prompts give equal text.
class MockGenerationProvider final : public GenerationProvider {
 public:
  std::string provider_id() const override { return "mock-generation-v1"; }
  void set_failing(bool failing) { failing_ = failing; }
  void set_delay(std::chrono::milliseconds d) { delay_ms_ = d.count(); }

  /// The text a given prompt produces.
  static std::string reply_for(std::string_view prompt);

 protected:
  std::string do_generate(std::string_view prompt) override;

 private:
  std::atomic<bool> failing_{false};
  std::atomic<long long> delay_ms_{0};
};

}  // namespace sir
