#include "sir/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <istream>
#include <random>
#include <set>

#include "sir/error.hpp"
#include "sir/fsutil.hpp"
#include "sir/hash.hpp"

namespace sir {

namespace fs = std::filesystem;

namespace {

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::string new_session_id() {
  static thread_local std::mt19937_64 rng{std::random_device{}() ^
                                          (static_cast<std::uint64_t>(std::random_device{}()) << 32)};
  return to_hex(rng()) + to_hex(rng());
}

bool blank(std::string_view s) { return s.find_first_not_of(" \t\r\n") == std::string_view::npos; }

}  // namespace

std::string_view phase_name(Phase p) {
  switch (p) {
    case Phase::PreTest: return "PRE_TEST";
    case Phase::LearningI: return "LEARNING_I";
    case Phase::LearningII: return "LEARNING_II";
    case Phase::PostTest: return "POST_TEST";
    case Phase::Survey: return "SURVEY";
  }
  return "?";
}

Phase parse_phase(std::string_view s) {
  for (auto p : {Phase::PreTest, Phase::LearningI, Phase::LearningII, Phase::PostTest, Phase::Survey}) {
    if (phase_name(p) == s) return p;
  }
  throw Error(Errc::Parse, "unknown phase '" + std::string(s) + "'");
}

void to_json(json& j, const ResponseRecord& r) {
  j = json{{"question_id", r.question_id},
           {"latest_text", r.latest_text},
           {"submitted_at", r.submitted_at},
           {"history", r.history},
           {"feedback_bundle_ref", r.feedback_bundle_ref}};
}

void from_json(const json& j, ResponseRecord& r) {
  r.question_id = j.at("question_id").get<std::string>();
  r.latest_text = j.at("latest_text").get<std::string>();
  r.submitted_at = j.at("submitted_at").get<std::int64_t>();
  r.history = j.at("history").get<std::vector<std::string>>();
  r.feedback_bundle_ref = j.value("feedback_bundle_ref", "");
}

void to_json(json& j, const LikertAnswer& a) { j = json{{"item_id", a.item_id}, {"value", a.value}}; }

void from_json(const json& j, LikertAnswer& a) {
  a.item_id = j.at("item_id").get<std::string>();
  a.value = j.at("value").get<int>();
}

void to_json(json& j, const Session& s) {
  j = json{{"session_id", s.session_id},
           {"participant_id", s.participant_id},
           {"condition", condition_name(s.condition)},
           {"phase", phase_name(s.phase)},
           {"completed", s.completed},
           {"created_at", s.created_at},
           {"answers", s.answers},
           {"pre_score", nullptr},
           {"post_score", nullptr},
           {"max_score", s.max_score},
           {"survey", s.survey},
           {"survey_comment", s.survey_comment},
           {"attention", s.attention},
           {"last_seq", s.last_seq}};
  if (s.pre_score) j["pre_score"] = *s.pre_score;
  if (s.post_score) j["post_score"] = *s.post_score;
}

void from_json(const json& j, Session& s) {
  s.session_id = j.at("session_id").get<std::string>();
  s.participant_id = j.at("participant_id").get<std::string>();
  s.condition = parse_condition(j.at("condition").get<std::string>());
  s.phase = parse_phase(j.at("phase").get<std::string>());
  s.completed = j.value("completed", false);
  s.created_at = j.value("created_at", std::int64_t{0});
  s.answers = j.value("answers", std::map<std::string, ResponseRecord>{});
  s.pre_score.reset();
  s.post_score.reset();
  if (j.contains("pre_score") && !j["pre_score"].is_null()) s.pre_score = j["pre_score"].get<int>();
  if (j.contains("post_score") && !j["post_score"].is_null()) s.post_score = j["post_score"].get<int>();
  s.max_score = j.value("max_score", 0);
  s.survey = j.value("survey", std::vector<LikertAnswer>{});
  s.survey_comment = j.value("survey_comment", "");
  s.attention = j.value("attention", std::map<std::string, bool>{});
  s.last_seq = j.value("last_seq", std::uint64_t{0});
}

Condition assign_condition(std::string_view participant_id, std::uint64_t seed) {
  std::mt19937_64 rng(Hasher{}.add(seed).add(participant_id).value());
  return kAllConditions[rng() >> 62];  // top two bits: exactly uniform over 4
}

PaperScore score_paper(const TestPaper& paper, const std::map<std::string, int>& responses) {
  PaperScore out;
  std::vector<std::string> missing;
  for (const auto& item : paper.items) {
    auto it = responses.find(item.item_id);
    if (it == responses.end()) {
      missing.push_back(item.item_id);
      continue;
    }
    out.score += it->second == item.key;
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw Error(Errc::IncompleteResponses, "no response for: " + list);
  }
  auto att = responses.find(paper.attention_check.item_id);
  out.attention_pass = att != responses.end() && att->second == paper.attention_check.key;
  return out;
}

std::vector<Session> filter_sessions(std::span<const Session> sessions) {
  std::vector<Session> out;
  for (const auto& s : sessions) {
    if (!s.completed) continue;
    const bool all_pass = std::all_of(s.attention.begin(), s.attention.end(),
                                      [](const auto& kv) { return kv.second; });
    if (all_pass) out.push_back(s);
  }
  return out;
}

void apply_record(Session& s, const json& r) {
  const auto op = r.at("op").get<std::string>();
  if (op == "create") {
    s.session_id = r.at("session_id").get<std::string>();
    s.participant_id = r.at("participant_id").get<std::string>();
    s.condition = parse_condition(r.at("condition").get<std::string>());
    s.phase = Phase::PreTest;
    s.created_at = r.at("created_at").get<std::int64_t>();
    s.max_score = r.at("max_score").get<int>();
  } else if (op == "answer") {
    const auto qid = r.at("question_id").get<std::string>();
    auto& rec = s.answers[qid];
    rec.question_id = qid;
    rec.latest_text = r.at("text").get<std::string>();
    rec.history.push_back(rec.latest_text);
    rec.submitted_at = r.at("ts").get<std::int64_t>();
  } else if (op == "feedback") {
    s.answers.at(r.at("question_id").get<std::string>()).feedback_bundle_ref =
        r.at("ref").get<std::string>();
  } else if (op == "score") {
    const bool pre = r.at("test").get<std::string>() == "pre";
    (pre ? s.pre_score : s.post_score) = r.at("score").get<int>();
    s.attention[pre ? "pre" : "post"] = r.at("attention").get<bool>();
    s.phase = pre ? Phase::LearningI : Phase::Survey;
  } else if (op == "advance") {
    s.phase = parse_phase(r.at("to").get<std::string>());
  } else if (op == "survey") {
    s.survey = r.at("answers").get<std::vector<LikertAnswer>>();
    s.survey_comment = r.at("comment").get<std::string>();
    s.attention["survey"] = r.at("attention").get<bool>();
    s.completed = true;
  } else {
    throw Error(Errc::Parse, "unknown log op '" + op + "'");
  }
  s.last_seq = r.at("seq").get<std::uint64_t>();
}

SessionStore::SessionStore(fs::path dir, std::shared_ptr<const Course> course, std::uint64_t seed)
    : dir_(std::move(dir)), course_(std::move(course)), seed_(seed) {
  if (!course_) throw Error(Errc::InvalidArgument, "session store needs a course");
  fs::create_directories(dir_);
  load();
}

fs::path SessionStore::snapshot_path(const std::string& id) const { return dir_ / (id + ".snap.json"); }

AppendLog SessionStore::log_for(const std::string& id) const { return AppendLog(dir_ / (id + ".wal")); }

void SessionStore::load() {
  std::set<std::string> ids;
  for (const auto& e : fs::directory_iterator(dir_)) {
    const auto name = e.path().filename().string();
    for (std::string_view suffix : {".snap.json", ".wal"}) {
      if (name.size() > suffix.size() && name.ends_with(suffix)) {
        ids.insert(name.substr(0, name.size() - suffix.size()));
      }
    }
  }
  for (const auto& id : ids) {
    Session s;
    if (fs::exists(snapshot_path(id))) {
      s = json::parse(fsutil::read_file(snapshot_path(id))).get<Session>();
    }
    for (const auto& payload : log_for(id).replay()) {
      auto record = json::parse(payload);
      if (record.at("seq").get<std::uint64_t>() <= s.last_seq) continue;
      apply_record(s, record);
    }
    if (s.session_id.empty()) continue;  // log held nothing durable
    by_participant_[s.participant_id] = s.session_id;
    auto entry = std::make_unique<Entry>();
    entry->session = std::move(s);
    sessions_[id] = std::move(entry);
  }
}

SessionStore::Entry& SessionStore::entry(const std::string& session_id) const {
  std::shared_lock lock(mu_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw Error(Errc::NotFound, "session '" + session_id + "'");
  return *it->second;
}

void SessionStore::commit(Entry& e, json record, bool compact) {
  record["seq"] = e.session.last_seq + 1;
  Session next = e.session;
  apply_record(next, record);  // validates the record before it becomes durable
  const auto log = log_for(next.session_id);
  log.append(record.dump());
  e.session = std::move(next);
  if (compact) {
    fsutil::write_file_atomic(snapshot_path(e.session.session_id), json(e.session).dump());
    log.reset();
  }
}

Session SessionStore::create_session(const std::string& participant_id) {
  if (participant_id.empty()) throw Error(Errc::InvalidArgument, "empty participant id");
  std::lock_guard create_lock(create_mu_);
  {
    std::shared_lock lock(mu_);
    if (by_participant_.count(participant_id)) {
      throw Error(Errc::AlreadyAssigned, "participant '" + participant_id + "' already has a session");
    }
  }
  auto e = std::make_unique<Entry>();
  e->session.session_id = new_session_id();
  json record{{"op", "create"},
              {"session_id", e->session.session_id},
              {"participant_id", participant_id},
              {"condition", condition_name(assign_condition(participant_id, seed_))},
              {"created_at", now_ms()},
              {"max_score", static_cast<int>(course_->pre_test.items.size())}};
  commit(*e, std::move(record), true);
  Session out = e->session;
  std::unique_lock lock(mu_);
  by_participant_[participant_id] = out.session_id;
  sessions_[out.session_id] = std::move(e);
  return out;
}

Session SessionStore::get(const std::string& session_id) const {
  auto& e = entry(session_id);
  std::lock_guard lock(e.mu);
  return e.session;
}

bool SessionStore::contains(const std::string& session_id) const {
  std::shared_lock lock(mu_);
  return sessions_.count(session_id) != 0;
}

std::vector<Session> SessionStore::all() const {
  std::vector<Entry*> entries;
  {
    std::shared_lock lock(mu_);
    for (const auto& [_, e] : sessions_) entries.push_back(e.get());
  }
  std::vector<Session> out;
  out.reserve(entries.size());
  for (auto* e : entries) {
    std::lock_guard lock(e->mu);
    out.push_back(e->session);
  }
  return out;
}

ResponseRecord SessionStore::submit_answer(const std::string& session_id,
                                           const std::string& question_id,
                                           const std::string& text) {
  auto& e = entry(session_id);
  if (!course_->find_question(question_id)) {
    throw Error(Errc::UnknownQuestion, "question '" + question_id + "'");
  }
  if (blank(text)) throw Error(Errc::EmptyResponse, "empty answer to '" + question_id + "'");
  std::lock_guard lock(e.mu);
  if (e.session.phase != Phase::LearningII) {
    throw Error(Errc::PhaseViolation, "answers are accepted only in LEARNING_II, session is in " +
                                          std::string(phase_name(e.session.phase)));
  }
  commit(e, json{{"op", "answer"}, {"question_id", question_id}, {"text", text}, {"ts", now_ms()}},
         false);
  return e.session.answers.at(question_id);
}

void SessionStore::attach_feedback(const std::string& session_id, const std::string& question_id,
                                   const std::string& bundle_ref) {
  auto& e = entry(session_id);
  std::lock_guard lock(e.mu);
  if (!e.session.answers.count(question_id)) {
    throw Error(Errc::NotFound, "no answer to '" + question_id + "' yet");
  }
  commit(e, json{{"op", "feedback"}, {"question_id", question_id}, {"ref", bundle_ref}}, false);
}

PaperScore SessionStore::score_test(const std::string& session_id, TestPhase phase,
                                    const std::map<std::string, int>& responses) {
  auto& e = entry(session_id);
  std::lock_guard lock(e.mu);
  const Phase required = phase == TestPhase::Pre ? Phase::PreTest : Phase::PostTest;
  if (e.session.phase != required) {
    throw Error(Errc::PhaseViolation, std::string(phase == TestPhase::Pre ? "pre" : "post") +
                                          "-test not open, session is in " +
                                          std::string(phase_name(e.session.phase)));
  }
  const auto& paper = phase == TestPhase::Pre ? course_->pre_test : course_->post_test;
  const auto result = score_paper(paper, responses);
  commit(e,
         json{{"op", "score"},
              {"test", phase == TestPhase::Pre ? "pre" : "post"},
              {"score", result.score},
              {"attention", result.attention_pass}},
         true);
  return result;
}

Phase SessionStore::advance(const std::string& session_id) {
  auto& e = entry(session_id);
  std::lock_guard lock(e.mu);
  Phase to;
  switch (e.session.phase) {
    case Phase::LearningI: to = Phase::LearningII; break;
    case Phase::LearningII: to = Phase::PostTest; break;
    default:
      throw Error(Errc::PhaseViolation,
                  "cannot advance from " + std::string(phase_name(e.session.phase)));
  }
  commit(e, json{{"op", "advance"}, {"to", phase_name(to)}}, true);
  return to;
}

void SessionStore::submit_survey(const std::string& session_id,
                                 const std::vector<LikertAnswer>& answers,
                                 const std::string& comment) {
  std::map<std::string, const SurveyItem*> items;
  for (const auto& item : course_->survey) items[item.item_id] = &item;
  std::set<std::string> seen;
  bool attention = true;
  for (const auto& a : answers) {
    if (a.value < 1 || a.value > 5) {
      throw Error(Errc::OutOfRange, "Likert value " + std::to_string(a.value) + " for " + a.item_id);
    }
    auto it = items.find(a.item_id);
    if (it == items.end()) throw Error(Errc::UnknownQuestion, "survey item '" + a.item_id + "'");
    if (!seen.insert(a.item_id).second) {
      throw Error(Errc::InvalidArgument, "survey item '" + a.item_id + "' answered twice");
    }
  }
  for (const auto& [id, item] : items) {
    if (!item->attention_expected) continue;
    auto it = std::find_if(answers.begin(), answers.end(), [&](const auto& a) { return a.item_id == id; });
    attention = attention && it != answers.end() && it->value == *item->attention_expected;
  }

  auto& e = entry(session_id);
  std::lock_guard lock(e.mu);
  if (e.session.phase != Phase::Survey || e.session.completed) {
    throw Error(Errc::PhaseViolation, "survey not open, session is in " +
                                          std::string(phase_name(e.session.phase)));
  }
  commit(e, json{{"op", "survey"}, {"answers", answers}, {"comment", comment}, {"attention", attention}},
         true);
}

void SessionStore::export_ndjson(std::ostream& out) const {
  auto sessions = all();
  std::sort(sessions.begin(), sessions.end(),
            [](const Session& a, const Session& b) { return a.session_id < b.session_id; });
  for (const auto& s : sessions) out << json(s).dump() << '\n';
}

std::vector<Session> read_sessions_ndjson(std::istream& in) {
  std::vector<Session> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    try {
      out.push_back(json::parse(line).get<Session>());
    } catch (const json::exception& e) {
      throw Error(Errc::Parse, "sessions line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace sir
