#include "sir/ingest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "sir/error.hpp"
#include "sir/hash.hpp"

namespace sir {

std::string embedding_input(const SlidePage& page) {
  return page.extracted_text + "\n" + page.vision_description.value_or("");
}

std::vector<float> normalize(std::vector<float> v) {
  double norm = 0;
  for (float f : v) norm += static_cast<double>(f) * f;
  norm = std::sqrt(norm);
  if (!(norm > 0) || !std::isfinite(norm)) {
    throw Error(Errc::DegenerateData, "cannot normalize a zero or non-finite vector");
  }
  for (auto& f : v) f = static_cast<float>(f / norm);
  return v;
}

namespace {

std::string embed_key(const SlidePage& page, const EmbeddingProvider& ep) {
  return Hasher{}.add(embedding_input(page)).add(ep.provider_id()).hex();
}

// Returns true when the provider was called.
bool describe_impl(ContentStore& store, const PageRef& ref, VisionProvider& vp) {
  auto page = store.get_page(ref.deck_id, ref.page_no);
  auto image = store.page_image(ref.deck_id, ref.page_no);
  auto hash = page_source_hash(image.bytes, page.extracted_text);
  if (page.vision_description && page.source_hash == hash) return false;
  auto desc = vp.describe(image.bytes, image.type, page.extracted_text);
  store.set_description(ref, std::move(desc), std::move(hash));
  return true;
}

bool embed_impl(ContentStore& store, const PageRef& ref, EmbeddingProvider& ep) {
  auto page = store.get_page(ref.deck_id, ref.page_no);
  if (!page.vision_description) {
    throw Error(Errc::MissingDescription,
                "page " + std::to_string(ref.page_no) + " of deck '" + ref.deck_id + "'");
  }
  auto key = embed_key(page, ep);
  if (page.embedding && page.embed_input_hash == key) return false;
  store.set_embedding(ref, normalize(ep.embed(embedding_input(page))), std::move(key));
  return true;
}

}  // namespace

SlidePage describe_page(ContentStore& store, const PageRef& ref, VisionProvider& vp) {
  describe_impl(store, ref, vp);
  return store.get_page(ref.deck_id, ref.page_no);
}

SlidePage embed_page(ContentStore& store, const PageRef& ref, EmbeddingProvider& ep) {
  embed_impl(store, ref, ep);
  return store.get_page(ref.deck_id, ref.page_no);
}

std::vector<float> embed_question(const Question& q, EmbeddingProvider& ep) {
  if (q.prompt_text.empty()) {
    throw Error(Errc::EmptyInput, "question '" + q.question_id + "' has an empty prompt");
  }
  return normalize(ep.embed(q.prompt_text));
}

IngestReport ingest_deck(ContentStore& store, const std::string& deck_id, VisionProvider& vp,
                         EmbeddingProvider& ep, const IngestOptions& opts) {
  const auto deck = store.get_deck(deck_id);
  const auto& pages = deck.pages;

  IngestReport report;
  std::mutex report_mu;
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < pages.size(); i = next++) {
      const auto ref = pages[i].ref();
      bool described = false;
      bool embedded = false;
      std::string error;
      try {
        described = describe_impl(store, ref, vp);
        embedded = embed_impl(store, ref, ep);
      } catch (const std::exception& e) {
        error = e.what();
      }
      std::lock_guard lock(report_mu);
      report.pages_described += described;
      report.pages_embedded += embedded;
      if (!error.empty()) {
        report.failures.push_back({ref, std::move(error)});
      } else if (!described && !embedded) {
        ++report.cache_hits;
      }
    }
  };

  const std::size_t n_threads = std::clamp<std::size_t>(opts.max_inflight, 1, pages.size());
  std::vector<std::jthread> threads;
  for (std::size_t t = 1; t < n_threads; ++t) threads.emplace_back(worker);
  worker();
  threads.clear();

  std::sort(report.failures.begin(), report.failures.end(),
            [](const PageFailure& a, const PageFailure& b) { return a.page < b.page; });
  return report;
}

}  // namespace sir
