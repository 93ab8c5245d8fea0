#include <catch_amalgamated.hpp>

#include <thread>

#include "oracles.hpp"
#include "sir/error.hpp"
#include "sir/ingest.hpp"
#include "test_support.hpp"

using namespace sir;
using namespace sir::testing;

namespace {

// Records the peak number of concurrent describe() calls.
class SlowVision final : public VisionProvider {
 public:
  std::string provider_id() const override { return "slow"; }
  int peak() const { return peak_.load(); }

 protected:
  std::string do_describe(std::string_view, ImageType, std::string_view text) override {
    const int now = ++active_;
    int prev = peak_.load();
    while (now > prev && !peak_.compare_exchange_weak(prev, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    --active_;
    return "slow " + std::string(text);
  }

 private:
  std::atomic<int> active_{0};
  std::atomic<int> peak_{0};
};

std::string read_all_derived(const std::filesystem::path& root) {
  std::string out;
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
    if (e.is_regular_file() && e.path().parent_path().filename() == "derived") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) out += f.filename().string() + ":" + fsutil::read_file(f) + "\n";
  return out;
}

}  // namespace

TEST_CASE("describe_page is a cache hit on unchanged input") {
  TempDir dir;
  ContentStore store(dir.path());
  store.put_deck(make_deck("d1", {"multimedia principle"}));
  MockVisionProvider vp;
  const auto p = describe_page(store, {"d1", 1}, vp);
  CHECK(p.vision_description == "multimedia principle");
  CHECK(vp.call_count() == 1);
  describe_page(store, {"d1", 1}, vp);
  CHECK(vp.call_count() == 1);
}

TEST_CASE("describe_page failure leaves the page untouched") {
  TempDir dir;
  ContentStore store(dir.path());
  store.put_deck(make_deck("d1", {"boom"}));
  MockVisionProvider vp;
  vp.set_failure([](std::string_view t) { return t == "boom"; });
  try {
    describe_page(store, {"d1", 1}, vp);
    FAIL("expected failure");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ProviderFailure);
    CHECK(e.retryable());
  }
  CHECK_FALSE(store.get_page("d1", 1).vision_description);
}

TEST_CASE("image-only page gets a description from the image") {
  TempDir dir;
  ContentStore store(dir.path());
  store.put_deck(make_deck("d1", {""}));
  MockVisionProvider vp;
  const auto p = describe_page(store, {"d1", 1}, vp);
  REQUIRE(p.vision_description);
  CHECK(p.vision_description->starts_with("image-only slide visual-"));
}

TEST_CASE("embed_page stores the normalized oracle vector") {
  TempDir dir;
  ContentStore store(dir.path());
  store.put_deck(make_deck("d1", {"multimedia principle"}));
  FeatureHashEmbedder ep;
  CHECK_THROWS_AS(embed_page(store, {"d1", 1}, ep), Error);
  MockVisionProvider vp;
  describe_page(store, {"d1", 1}, vp);
  const auto p = embed_page(store, {"d1", 1}, ep);
  REQUIRE(p.embedding);
  CHECK(p.embedding->size() == 256);

  // The embedding input is text, newline, description; the oracle normalizes
  // in double, rounds to float, and the stored vector is renormalized.
  const auto raw = oracle::to_float(oracle::feature_hash("multimedia principle\nmultimedia principle"));
  double ss = 0;
  for (float f : raw) ss += static_cast<double>(f) * f;
  std::vector<float> expected;
  for (float f : raw) expected.push_back(static_cast<float>(f / std::sqrt(ss)));
  CHECK(*p.embedding == expected);

  double norm = 0;
  for (float f : *p.embedding) norm += static_cast<double>(f) * f;
  CHECK(std::abs(std::sqrt(norm) - 1.0) <= 1e-6);

  embed_page(store, {"d1", 1}, ep);
  CHECK(ep.call_count() == 1);
}

TEST_CASE("embed_question") {
  FeatureHashEmbedder ep;
  auto q = open_question("q", "What is the multimedia principle in e-learning design?", {});
  const auto v = embed_question(q, ep);
  CHECK(v == embed_question(q, ep));
  const auto oracle_v = oracle::feature_hash(q.prompt_text);
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(std::abs(v[i] - oracle_v[i]) <= 1e-7);

  q.kind = QuestionKind::Mcq;
  q.options = {"completely unrelated words", "more"};
  CHECK(embed_question(q, ep) == v);

  q.prompt_text = "";
  try {
    embed_question(q, ep);
    FAIL("expected EmptyInput");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::EmptyInput);
  }
}

TEST_CASE("ingest_deck report counts") {
  TempDir dir;
  ContentStore store(dir.path());
  store.put_deck(make_deck("d1", {"one", "two", "three"}));
  MockVisionProvider vp;
  FeatureHashEmbedder ep;

  auto r = ingest_deck(store, "d1", vp, ep);
  CHECK(r.pages_described == 3);
  CHECK(r.pages_embedded == 3);
  CHECK(r.cache_hits == 0);
  CHECK(r.failures.empty());

  r = ingest_deck(store, "d1", vp, ep);
  CHECK(r.pages_described == 0);
  CHECK(r.pages_embedded == 0);
  CHECK(r.cache_hits == 3);
  CHECK(vp.call_count() == 3);
  CHECK(ep.call_count() == 3);
  store.check_invariants();
}

TEST_CASE("ingest_deck partial failure") {
  TempDir dir;
  ContentStore store(dir.path());
  store.put_deck(make_deck("d1", {"one", "two", "three"}));
  MockVisionProvider vp;
  vp.set_failure([](std::string_view t) { return t == "two"; });
  FeatureHashEmbedder ep;

  auto r = ingest_deck(store, "d1", vp, ep);
  CHECK(r.pages_described == 2);
  CHECK(r.pages_embedded == 2);
  CHECK(r.cache_hits == 0);
  REQUIRE(r.failures.size() == 1);
  CHECK(r.failures[0].page == PageRef{"d1", 2});
  CHECK(store.get_page("d1", 1).embedding);
  CHECK_FALSE(store.get_page("d1", 2).vision_description);

  vp.set_failure(nullptr);
  r = ingest_deck(store, "d1", vp, ep);
  CHECK(r.pages_described == 1);
  CHECK(r.cache_hits == 2);
  CHECK(r.failures.empty());
}

TEST_CASE("ingest_deck respects max_inflight") {
  TempDir dir;
  ContentStore store(dir.path());
  std::vector<std::string> texts;
  for (int i = 0; i < 12; ++i) texts.push_back("page " + std::to_string(i));
  store.put_deck(make_deck("d1", texts));
  SlowVision vp;
  FeatureHashEmbedder ep;
  ingest_deck(store, "d1", vp, ep, IngestOptions{3});
  CHECK(vp.peak() <= 3);
  CHECK(vp.peak() >= 2);
  CHECK(vp.call_count() == 12);
}

TEST_CASE("ingest from scratch is bit-identical") {
  TempDir a, b;
  for (const auto* d : {&a, &b}) {
    ContentStore store(d->path());
    store.import_deck_dir(kFixtures / "decks/multimedia-principle");
    MockVisionProvider vp;
    FeatureHashEmbedder ep;
    auto r = ingest_deck(store, "multimedia-principle", vp, ep, IngestOptions{4});
    CHECK(r.failures.empty());
  }
  CHECK(read_all_derived(a.path()) == read_all_derived(b.path()));
}

TEST_CASE("changed page text re-describes only that page") {
  TempDir dir;
  ContentStore store(dir.path());
  store.put_deck(make_deck("d1", {"one", "two"}));
  MockVisionProvider vp;
  FeatureHashEmbedder ep;
  ingest_deck(store, "d1", vp, ep);
  store.put_deck(make_deck("d1", {"one", "two edited"}), true);
  const auto r = ingest_deck(store, "d1", vp, ep);
  CHECK(r.pages_described == 1);
  CHECK(r.cache_hits == 1);
  CHECK(vp.call_count() == 3);
}
