#include "sir/retrieval.hpp"

#include <algorithm>
#include <chrono>

#include "sir/error.hpp"
#include "sir/fsutil.hpp"
#include "sir/hash.hpp"
#include "sir/ingest.hpp"

namespace sir {

double cosine(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw Error(Errc::DimensionMismatch,
                std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  double dot = 0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += static_cast<double>(a[i]) * b[i];
  return std::clamp(dot, -1.0, 1.0);
}

void to_json(json& j, const RetrievalHit& h) {
  j = json{{"deck_id", h.deck_id}, {"page_no", h.page_no}, {"score", h.score}};
}

void from_json(const json& j, RetrievalHit& h) {
  h.deck_id = j.at("deck_id").get<std::string>();
  h.page_no = j.at("page_no").get<int>();
  h.score = j.at("score").get<double>();
}

void to_json(json& j, const RetrievalResult& r) {
  j = json{{"question_id", r.question_id},
           {"range_fingerprint", r.range_fingerprint},
           {"hits", r.hits},
           {"computed_at", r.computed_at}};
}

void from_json(const json& j, RetrievalResult& r) {
  r.question_id = j.at("question_id").get<std::string>();
  r.range_fingerprint = j.at("range_fingerprint").get<std::string>();
  r.hits = j.at("hits").get<std::vector<RetrievalHit>>();
  r.computed_at = j.at("computed_at").get<std::int64_t>();
}

std::vector<RetrievalHit> rank_pages(const ContentStore& store, std::span<const float> query,
                                     std::span<const PageRef> pages, std::size_t k) {
  if (k == 0) throw Error(Errc::InvalidArgument, "k must be positive");
  std::vector<RetrievalHit> scored;
  std::vector<std::string> missing;
  scored.reserve(pages.size());
  for (const auto& ref : pages) {
    auto page = store.get_page(ref.deck_id, ref.page_no);
    if (!page.embedding) {
      missing.push_back(ref.deck_id + "#" + std::to_string(ref.page_no));
      continue;
    }
    scored.push_back({ref.deck_id, ref.page_no, cosine(query, *page.embedding)});
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw Error(Errc::IncompleteCorpus, "unembedded pages: " + list);
  }
  const auto better = [](const RetrievalHit& a, const RetrievalHit& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.deck_id != b.deck_id) return a.deck_id < b.deck_id;
    return a.page_no < b.page_no;
  };
  const auto n = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(), better);
  scored.resize(n);
  return scored;
}

Retriever::Retriever(const ContentStore& store, EmbeddingProvider& embedder,
                     std::optional<std::filesystem::path> cache_dir)
    : store_(store),
      embedder_(embedder),
      cache_dir_(cache_dir.value_or(store.root() / "cache" / "retrieval")) {}

const Question& Retriever::lookup(const std::string& question_id,
                                  std::shared_ptr<const Course>& keep) const {
  keep = store_.course();
  const auto* q = keep->find_question(question_id);
  if (!q) throw Error(Errc::UnknownQuestion, "question '" + question_id + "'");
  return *q;
}

std::string Retriever::fingerprint(const Question& question) const {
  Hasher h;
  h.add(question.prompt_text).add(embedder_.provider_id());
  for (const auto& ref : store_.list_pages(question.retrieval_range)) {
    h.add(ref.deck_id).add(static_cast<std::uint64_t>(ref.page_no)).add(store_.embedding_digest(ref));
  }
  return h.hex();
}

RetrievalResult Retriever::retrieve(const std::string& question_id, std::size_t k) {
  std::shared_ptr<const Course> keep;
  return retrieve(lookup(question_id, keep), k);
}

RetrievalResult Retriever::retrieve(const Question& question, std::size_t k) {
  const auto pages = store_.list_pages(question.retrieval_range);
  RetrievalResult result;
  result.question_id = question.question_id;
  result.range_fingerprint = fingerprint(question);
  const auto query = embed_question(question, embedder_);
  ++scans_;
  result.hits = rank_pages(store_, query, pages, k);
  result.computed_at = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::system_clock::now().time_since_epoch())
                           .count();
  return result;
}

std::optional<RetrievalResult> Retriever::load_cached(const std::string& question_id,
                                                      const std::string& fp) {
  {
    std::shared_lock lock(mu_);
    if (auto it = cache_.find(question_id); it != cache_.end() && it->second.range_fingerprint == fp) {
      return it->second;
    }
  }
  const auto path = cache_dir_ / (question_id + ".json");
  if (!std::filesystem::exists(path)) return std::nullopt;
  try {
    auto r = json::parse(fsutil::read_file(path)).get<RetrievalResult>();
    if (r.range_fingerprint != fp || r.question_id != question_id) return std::nullopt;
    std::unique_lock lock(mu_);
    cache_[question_id] = r;
    return r;
  } catch (const std::exception&) {
    return std::nullopt;  // unreadable cache entry counts as a miss
  }
}

CachedRetrieval Retriever::retrieve_cached(const std::string& question_id) {
  std::shared_ptr<const Course> keep;
  return retrieve_cached(lookup(question_id, keep));
}

CachedRetrieval Retriever::retrieve_cached(const Question& question) {
  const auto fp = fingerprint(question);
  if (auto cached = load_cached(question.question_id, fp)) {
    ++hits_;
    return {std::move(*cached), true};
  }
  ++misses_;
  auto result = retrieve(question, kGroundingSlides);
  fsutil::write_file_atomic(cache_dir_ / (question.question_id + ".json"), json(result).dump(2));
  {
    std::unique_lock lock(mu_);
    cache_[question.question_id] = result;
  }
  return {std::move(result), false};
}

PageRef primary_slide(const RetrievalResult& result) {
  if (result.hits.empty()) {
    throw Error(Errc::EmptyRetrieval, "no hits for question '" + result.question_id + "'");
  }
  return result.hits.front().ref();
}

}  // namespace sir
