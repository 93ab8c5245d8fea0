#include <catch_amalgamated.hpp>

#include <set>
#include <sstream>
#include <thread>

#include "sir/error.hpp"
#include "sir/experiment.hpp"
#include "sir/simulation.hpp"
#include "test_support.hpp"

using namespace sir;
using namespace sir::testing;

namespace {

std::shared_ptr<const Course> small_course() {
  return std::make_shared<const Course>(
      make_course({open_question("q1", "Explain one", {{"d", {}, {}}}),
                   open_question("q2", "Explain two", {{"d", {}, {}}})}));
}

std::map<std::string, int> all_keys(const TestPaper& paper) {
  std::map<std::string, int> r;
  for (const auto& it : paper.items) r[it.item_id] = it.key;
  r[paper.attention_check.item_id] = paper.attention_check.key;
  return r;
}

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return Errc::Io;
}

// Walks a session through all five phases.
void complete(SessionStore& st, const std::string& id, bool attentive = true) {
  const auto& c = st.course();
  st.score_test(id, TestPhase::Pre, all_keys(c.pre_test));
  st.advance(id);
  st.submit_answer(id, "q1", "answer one");
  st.advance(id);
  st.score_test(id, TestPhase::Post, all_keys(c.post_test));
  st.submit_survey(id, {{"Q1", 4}, {"Q2", attentive ? 1 : 3}}, "");
}

}  // namespace

TEST_CASE("assignment is a deterministic function of participant and seed") {
  for (int i = 0; i < 50; ++i) {
    const auto p = "p" + std::to_string(i);
    CHECK(assign_condition(p, 7) == assign_condition(p, 7));
  }
  int differ = 0;
  for (int i = 0; i < 200; ++i) {
    const auto p = "p" + std::to_string(i);
    differ += assign_condition(p, 7) != assign_condition(p, 8);
  }
  CHECK(differ > 100);
}

TEST_CASE("assignment is balanced over many draws") {
  std::map<Condition, int> counts;
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++counts[assign_condition("participant-" + std::to_string(i), 42)];
  for (auto c : kAllConditions) {
    CAPTURE(condition_name(c));
    CHECK(std::abs(counts[c] / double(n) - 0.25) < 0.01);
  }
}

TEST_CASE("scoring") {
  TestPaper paper;
  for (int i = 0; i < 15; ++i) paper.items.push_back({"t" + std::to_string(i), "", {"a", "b", "c", "d"}, i % 4});
  paper.attention_check = {"attn", "", {"a", "b"}, 1};
  auto right = all_keys(paper);
  auto r = score_paper(paper, right);
  CHECK(r.score == 15);
  CHECK(r.attention_pass);

  auto wrong = right;
  for (auto& item : paper.items) wrong[item.item_id] = (item.key + 1) % 4;
  wrong.erase("attn");
  r = score_paper(paper, wrong);
  CHECK(r.score == 0);
  CHECK_FALSE(r.attention_pass);

  auto ten = wrong;
  for (int i = 0; i < 10; ++i) ten["t" + std::to_string(i)] = paper.items[i].key;
  CHECK(score_paper(paper, ten).score == 10);

  auto missing = right;
  missing.erase("t3");
  CHECK(code_of([&] { score_paper(paper, missing); }) == Errc::IncompleteResponses);
}

TEST_CASE("filter keeps completed attentive sessions") {
  std::vector<Session> sessions;
  for (int i = 0; i < 100; ++i) {
    Session s;
    s.session_id = "s" + std::to_string(i);
    s.completed = true;
    s.attention = {{"pre", true}, {"post", true}, {"survey", true}};
    if (i < 3) s.attention["pre"] = false;
    else if (i < 6) s.attention["post"] = false;
    else if (i < 9) s.attention["survey"] = false;
    sessions.push_back(s);
  }
  CHECK(filter_sessions(sessions).size() == 91);
  sessions[50].completed = false;
  CHECK(filter_sessions(sessions).size() == 90);
}

TEST_CASE("session lifecycle and phase rules") {
  TempDir dir;
  SessionStore st(dir / "sessions", small_course(), 1);
  const auto s = st.create_session("alice");
  CHECK(s.phase == Phase::PreTest);
  CHECK(s.condition == assign_condition("alice", 1));
  CHECK(s.max_score == 3);
  CHECK(code_of([&] { st.create_session("alice"); }) == Errc::AlreadyAssigned);

  const auto& id = s.session_id;
  CHECK(code_of([&] { st.submit_answer(id, "q1", "x"); }) == Errc::PhaseViolation);
  CHECK(code_of([&] { st.advance(id); }) == Errc::PhaseViolation);
  CHECK(code_of([&] { st.score_test(id, TestPhase::Post, {}); }) == Errc::PhaseViolation);
  CHECK(code_of([&] { st.submit_survey(id, {}, ""); }) == Errc::PhaseViolation);

  const auto pre = st.score_test(id, TestPhase::Pre, {{"t1", 1}, {"t2", 0}, {"t3", 1}, {"attn-pre", 0}});
  CHECK(pre.score == 1);
  CHECK(st.get(id).phase == Phase::LearningI);
  CHECK(code_of([&] { st.score_test(id, TestPhase::Pre, {}); }) == Errc::PhaseViolation);
  CHECK(code_of([&] { st.submit_answer(id, "q1", "x"); }) == Errc::PhaseViolation);
  CHECK(st.advance(id) == Phase::LearningII);

  CHECK(code_of([&] { st.submit_answer(id, "nope", "x"); }) == Errc::UnknownQuestion);
  CHECK(code_of([&] { st.submit_answer(id, "q1", " \t"); }) == Errc::EmptyResponse);
  st.submit_answer(id, "q1", "first");
  st.submit_answer(id, "q1", "second");
  const auto rec = st.submit_answer(id, "q1", "third");
  CHECK(rec.latest_text == "third");
  CHECK(rec.history == std::vector<std::string>{"first", "second", "third"});
  CHECK(rec.submitted_at > 0);
  st.attach_feedback(id, "q1", "abc");
  CHECK(st.get(id).answers.at("q1").feedback_bundle_ref == "abc");
  CHECK(code_of([&] { st.attach_feedback(id, "q2", "abc"); }) == Errc::NotFound);

  CHECK(st.advance(id) == Phase::PostTest);
  CHECK(code_of([&] { st.submit_answer(id, "q1", "late"); }) == Errc::PhaseViolation);
  CHECK(code_of([&] { st.score_test(id, TestPhase::Post, {{"t1", 1}}); }) == Errc::IncompleteResponses);
  CHECK(st.get(id).phase == Phase::PostTest);
  st.score_test(id, TestPhase::Post, all_keys(st.course().post_test));
  CHECK(st.get(id).phase == Phase::Survey);

  CHECK(code_of([&] { st.submit_survey(id, {{"Q1", 6}}, ""); }) == Errc::OutOfRange);
  CHECK(code_of([&] { st.submit_survey(id, {{"Q9", 3}}, ""); }) == Errc::UnknownQuestion);
  CHECK(code_of([&] { st.submit_survey(id, {{"Q1", 3}, {"Q1", 3}}, ""); }) == Errc::InvalidArgument);
  st.submit_survey(id, {{"Q1", 5}, {"Q2", 1}}, "fine");
  const auto done = st.get(id);
  CHECK(done.completed);
  CHECK(done.pre_score == 1);
  CHECK(done.post_score == 3);
  CHECK(done.attention == std::map<std::string, bool>{{"pre", true}, {"post", true}, {"survey", true}});
  CHECK(code_of([&] { st.submit_survey(id, {{"Q1", 5}}, ""); }) == Errc::PhaseViolation);
  CHECK(code_of([&] { st.get("missing"); }) == Errc::NotFound);
}

TEST_CASE("state survives a restart") {
  TempDir dir;
  const auto course = small_course();
  std::string a, b;
  Session before_a, before_b;
  {
    SessionStore st(dir / "sessions", course, 3);
    a = st.create_session("a").session_id;
    b = st.create_session("b").session_id;
    complete(st, a);
    st.score_test(b, TestPhase::Pre, all_keys(course->pre_test));
    st.advance(b);
    st.submit_answer(b, "q1", "one");
    st.submit_answer(b, "q2", "two");
    st.submit_answer(b, "q1", "one again");
    before_a = st.get(a);
    before_b = st.get(b);
  }
  SessionStore st(dir / "sessions", course, 3);
  CHECK(st.get(a) == before_a);
  CHECK(st.get(b) == before_b);
  CHECK(st.get(b).answers.at("q1").history.size() == 2);
  CHECK(code_of([&] { st.create_session("a"); }) == Errc::AlreadyAssigned);
  st.submit_answer(b, "q2", "two again");
  CHECK(st.get(b).last_seq == before_b.last_seq + 1);
}

TEST_CASE("concurrent sessions stay independent") {
  TempDir dir;
  SessionStore st(dir / "sessions", small_course(), 5);
  std::vector<std::string> ids(16);
  {
    std::vector<std::jthread> threads;
    for (int i = 0; i < 16; ++i) {
      threads.emplace_back([&, i] {
        ids[i] = st.create_session("p" + std::to_string(i)).session_id;
        complete(st, ids[i], i % 2 == 0);
      });
    }
  }
  CHECK(st.all().size() == 16);
  CHECK(filter_sessions(st.all()).size() == 8);
  for (const auto& id : ids) CHECK(st.get(id).answers.at("q1").history.size() == 1);
}

TEST_CASE("export round-trips") {
  TempDir dir;
  SessionStore st(dir / "sessions", small_course(), 9);
  for (int i = 0; i < 5; ++i) {
    const auto id = st.create_session("p" + std::to_string(i)).session_id;
    if (i % 2) complete(st, id);
  }
  std::stringstream out;
  st.export_ndjson(out);
  const auto text = out.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 5);
  auto read = read_sessions_ndjson(out);
  auto all = st.all();
  std::sort(all.begin(), all.end(), [](auto& x, auto& y) { return x.session_id < y.session_id; });
  CHECK(read == all);
  for (std::size_t i = 1; i < read.size(); ++i) CHECK(read[i - 1].session_id < read[i].session_id);

  std::istringstream bad("{\"session_id\": 1}\n");
  CHECK(code_of([&] { read_sessions_ndjson(bad); }) == Errc::Parse);
}

TEST_CASE("simulated post-test scores follow boost and noise") {
  TempDir dir;
  ServiceConfig cfg;
  cfg.store_root = dir.path();
  Service svc(cfg);
  svc.ingest(kFixtures / "decks/multimedia-principle", false);
  svc.ingest(kFixtures / "decks/coherence-principle", false);
  svc.load_course(fixture_course());
  const int max_score = static_cast<int>(svc.store().course()->pre_test.items.size());

  SimulationOptions opts;
  opts.participants = 40;
  opts.seed = 5;
  opts.answer_questions = false;
  opts.boost = {{Condition::Combined, 3}};
  for (const auto& p : simulate_study(svc, opts)) {
    CHECK(p.post - p.pre == (p.condition == Condition::Combined ? 3 : 0));
  }

  opts.seed = 6;
  opts.noise = 2;
  std::set<int> gains;
  for (const auto& p : simulate_study(svc, opts)) {
    const int base = p.pre + (p.condition == Condition::Combined ? 3 : 0);
    CHECK(p.post >= 0);
    CHECK(p.post <= max_score);
    CHECK(std::abs(p.post - base) <= 2);
    gains.insert(p.post - p.pre);
  }
  CHECK(gains.size() > 2);

  opts.noise = -1;
  CHECK(code_of([&] { simulate_study(svc, opts); }) == Errc::InvalidArgument);
}
