#include <catch_amalgamated.hpp>

#include "corpus.hpp"
#include "sir/error.hpp"
#include "sir/retrieval.hpp"

using namespace sir;
using namespace sir::testing;

namespace {

struct Fixture {
  TempDir dir;
  ContentStore store{dir.path()};
  MockVisionProvider vp;
  FeatureHashEmbedder ep;

  void ingest(const std::string& deck) { REQUIRE(ingest_deck(store, deck, vp, ep).failures.empty()); }
};

DeckWindow whole(const std::string& id) { return {id, std::nullopt, std::nullopt}; }

}  // namespace

TEST_CASE("cosine") {
  const std::vector<float> a{1, 0}, b{0, 1};
  const float r = static_cast<float>(1 / std::sqrt(2.0));
  CHECK(cosine(a, a) == 1.0);
  CHECK(cosine(a, b) == 0.0);
  CHECK(cosine(a, std::vector<float>{r, r}) == Catch::Approx(0.70710678).margin(1e-8));
  CHECK_THROWS_AS(cosine(a, std::vector<float>{1, 0, 0}), Error);
}

TEST_CASE("planted corpus of 10 pages: recall@3 = 1") {
  Fixture f;
  auto c = planted_corpus(f.store, 1, 10, 1, 7);
  f.ingest("deck0");
  Retriever r(f.store, f.ep);
  const auto& q = c.questions[0];
  const auto res = r.retrieve(q);
  REQUIRE(res.hits.size() == 3);
  std::set<PageRef> got;
  for (const auto& h : res.hits) got.insert(h.ref());
  CHECK(got == c.relevant[q.question_id]);
  const auto oracle_hits = oracle_rank(f.store, q, 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(res.hits[i].deck_id == oracle_hits[i].deck);
    CHECK(res.hits[i].page_no == oracle_hits[i].page);
    CHECK(res.hits[i].score == oracle_hits[i].score);
  }
}

TEST_CASE("singleton corpus scores 1.0 iff page text equals question text") {
  Fixture f;
  f.store.put_deck(make_deck("d1", {"What is the multimedia principle?"}));
  f.store.put_deck(make_deck("d2", {"Something else entirely"}));
  f.ingest("d1");
  f.ingest("d2");
  Retriever r(f.store, f.ep);
  auto same = r.retrieve(open_question("q", "What is the multimedia principle?", {whole("d1")}), 1);
  REQUIRE(same.hits.size() == 1);
  CHECK(same.hits[0].score == Catch::Approx(1.0).margin(1e-9));
  auto other = r.retrieve(open_question("q", "What is the multimedia principle?", {whole("d2")}), 1);
  CHECK(other.hits[0].score < 0.999);
}

TEST_CASE("ties break by deck then page") {
  Fixture f;
  f.store.put_deck(make_deck("b", {"same words", "same words"}));
  f.store.put_deck(make_deck("a", {"other", "same words"}));
  f.ingest("a");
  f.ingest("b");
  Retriever r(f.store, f.ep);
  const auto res = r.retrieve(open_question("q", "same words", {whole("b"), whole("a")}));
  REQUIRE(res.hits.size() == 3);
  CHECK(res.hits[0].ref() == PageRef{"a", 2});
  CHECK(res.hits[1].ref() == PageRef{"b", 1});
  CHECK(res.hits[2].ref() == PageRef{"b", 2});
  CHECK(primary_slide(res) == PageRef{"a", 2});
}

TEST_CASE("hits are capped by corpus size and monotone") {
  Fixture f;
  f.store.put_deck(make_deck("d", {"alpha beta", "beta gamma"}));
  f.ingest("d");
  Retriever r(f.store, f.ep);
  const auto res = r.retrieve(open_question("q", "beta", {whole("d")}), 3);
  REQUIRE(res.hits.size() == 2);
  CHECK(res.hits[0].score >= res.hits[1].score);
  for (const auto& h : res.hits) {
    CHECK(h.score <= 1.0 + 1e-9);
    CHECK(h.score >= -1.0 - 1e-9);
  }
}

TEST_CASE("unembedded pages are listed") {
  Fixture f;
  f.store.put_deck(make_deck("d", {"a", "b", "c"}));
  describe_page(f.store, {"d", 1}, f.vp);
  embed_page(f.store, {"d", 1}, f.ep);
  Retriever r(f.store, f.ep);
  try {
    r.retrieve(open_question("q", "a", {whole("d")}));
    FAIL("expected IncompleteCorpus");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::IncompleteCorpus);
    CHECK(std::string(e.what()).find("d#2, d#3") != std::string::npos);
  }
}

TEST_CASE("primary_slide of an empty result") {
  RetrievalResult empty;
  try {
    primary_slide(empty);
    FAIL("expected EmptyRetrieval");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::EmptyRetrieval);
  }
}

TEST_CASE("retrieve_cached: miss, hit, invalidation") {
  Fixture f;
  f.store.put_deck(make_deck("d", {"multimedia words pictures", "coherence music", "segmenting"}));
  f.store.put_deck(make_deck("e", {"multimedia pictures"}));
  f.ingest("d");
  f.ingest("e");
  f.store.put_course(make_course({open_question("q1", "multimedia pictures", {whole("d")})}));
  Retriever r(f.store, f.ep);

  const auto first = r.retrieve_cached("q1");
  CHECK_FALSE(first.cache_hit);
  const auto calls = f.ep.call_count();
  const auto scans = r.scans();
  const auto second = r.retrieve_cached("q1");
  CHECK(second.cache_hit);
  CHECK(second.result == first.result);
  CHECK(f.ep.call_count() == calls);
  CHECK(r.scans() == scans);
  CHECK(r.cache_hits() == 1);
  CHECK(r.cache_misses() == 1);
  CHECK(std::filesystem::exists(f.dir / "cache/retrieval/q1.json"));

  // A fresh retriever picks up the persisted entry.
  Retriever again(f.store, f.ep);
  const auto persisted = again.retrieve_cached("q1");
  CHECK(persisted.cache_hit);
  CHECK(persisted.result == first.result);

  // Range edit changes the fingerprint.
  auto course = *f.store.course();
  course.questions[0].retrieval_range.decks.push_back(whole("e"));
  f.store.put_course(course);
  const auto widened = r.retrieve_cached("q1");
  CHECK_FALSE(widened.cache_hit);
  CHECK(widened.result.range_fingerprint != first.result.range_fingerprint);

  // A changed member embedding changes the fingerprint too.
  const auto fp = r.fingerprint(course.questions[0]);
  auto emb = *f.store.get_page("d", 3).embedding;
  std::reverse(emb.begin(), emb.end());
  f.store.set_embedding({"d", 3}, emb, "manual");
  CHECK(r.fingerprint(course.questions[0]) != fp);
  CHECK_FALSE(r.retrieve_cached("q1").cache_hit);
  CHECK(r.retrieve_cached("q1").cache_hit);
}

TEST_CASE("retrieve matches the brute-force oracle on random corpora") {
  std::mt19937_64 rng(20240601);
  for (int trial = 0; trial < 40; ++trial) {
    Fixture f;
    std::uniform_int_distribution<int> n_pages(1, 25);
    const auto texts = random_texts(rng, n_pages(rng), 12, 5);
    f.store.put_deck(make_deck("d", texts));
    f.ingest("d");
    Retriever r(f.store, f.ep);
    const auto q = open_question("q", random_texts(rng, 1, 12, 4)[0], {whole("d")});
    for (std::size_t k = 1; k <= 3; ++k) {
      const auto got = r.retrieve(q, k);
      const auto want = oracle_rank(f.store, q, k);
      REQUIRE(got.hits.size() == want.size());
      for (std::size_t i = 0; i < want.size(); ++i) {
        CHECK(got.hits[i].deck_id == want[i].deck);
        CHECK(got.hits[i].page_no == want[i].page);
        CHECK(got.hits[i].score == want[i].score);
      }
    }
  }
}

TEST_CASE("retrieval result JSON round-trip") {
  RetrievalResult r{"q", "fp", {{"d", 1, 0.123456789012345}, {"e", 2, -0.5}}, 1700000000000};
  CHECK(json(r).get<RetrievalResult>() == r);
}
