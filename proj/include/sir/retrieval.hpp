#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "sir/content_store.hpp"
#include "sir/json_io.hpp"
#include "sir/providers.hpp"

namespace sir {

inline constexpr std::size_t kGroundingSlides = 3;

/// Dot product of two unit vectors, clamped to [-1, 1].
double cosine(std::span<const float> a, std::span<const float> b);

struct RetrievalHit {
  std::string deck_id;
  int page_no = 0;
  double score = 0;

  PageRef ref() const { return {deck_id, page_no}; }
  friend bool operator==(const RetrievalHit&, const RetrievalHit&) = default;
};

struct RetrievalResult {
  std::string question_id;
  std::string range_fingerprint;
  std::vector<RetrievalHit> hits;  // score descending, then (deck_id, page_no) ascending
  std::int64_t computed_at = 0;    // unix milliseconds

  friend bool operator==(const RetrievalResult&, const RetrievalResult&) = default;
};

void to_json(json& j, const RetrievalHit& h);
void from_json(const json& j, RetrievalHit& h);
void to_json(json& j, const RetrievalResult& r);
void from_json(const json& j, RetrievalResult& r);

struct CachedRetrieval {
  RetrievalResult result;
  bool cache_hit = false;
};

/// Exact top-k by exhaustive scan. Throws IncompleteCorpus if any page in
/// `pages` lacks an embedding.
std::vector<RetrievalHit> rank_pages(const ContentStore& store, std::span<const float> query,
                                     std::span<const PageRef> pages, std::size_t k);

/// Question-to-slide matcher with a per-(question, range fingerprint) cache
/// persisted under `<cache_dir>/<question_id>.json`.
class Retriever {
 public:
  /// cache_dir defaults to `<store root>/cache/retrieval`.
  Retriever(const ContentStore& store, EmbeddingProvider& embedder,
            std::optional<std::filesystem::path> cache_dir = std::nullopt);

  RetrievalResult retrieve(const std::string& question_id, std::size_t k = kGroundingSlides);
  RetrievalResult retrieve(const Question& question, std::size_t k = kGroundingSlides);

  /// Returns the cached result when the fingerprint still matches, otherwise
  /// computes, caches and returns a fresh one.
  CachedRetrieval retrieve_cached(const std::string& question_id);
  CachedRetrieval retrieve_cached(const Question& question);

  /// Hash of the question text, embedder, and every resolved page with its
  /// embedding digest. Changes when the range or any member embedding does.
  std::string fingerprint(const Question& question) const;

  std::uint64_t scans() const { return scans_.load(); }
  std::uint64_t cache_hits() const { return hits_.load(); }
  std::uint64_t cache_misses() const { return misses_.load(); }

 private:
  const Question& lookup(const std::string& question_id,
                         std::shared_ptr<const Course>& keep) const;
  std::optional<RetrievalResult> load_cached(const std::string& question_id,
                                             const std::string& fingerprint);

  const ContentStore& store_;
  EmbeddingProvider& embedder_;
  std::filesystem::path cache_dir_;
  std::shared_mutex mu_;
  std::map<std::string, RetrievalResult> cache_;  // latest result per question
  std::atomic<std::uint64_t> scans_{0};
  std::atomic<std::uint64_t> hits_{0};
  std::atomic<std::uint64_t> misses_{0};
};

/// The single slide shown to students: hits[0]. Throws EmptyRetrieval.
PageRef primary_slide(const RetrievalResult& result);

}  // namespace sir
