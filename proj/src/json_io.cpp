#include "sir/json_io.hpp"

#include <set>

#include "sir/error.hpp"

namespace sir {

namespace {

std::string_view kind_name(QuestionKind k) {
  return k == QuestionKind::Mcq ? "MCQ" : "OPEN_ENDED";
}

QuestionKind parse_kind(const std::string& s) {
  if (s == "MCQ") return QuestionKind::Mcq;
  if (s == "OPEN_ENDED") return QuestionKind::OpenEnded;
  throw Error(Errc::Parse, "unknown question kind '" + s + "'");
}

}  // namespace

void to_json(json& j, const DeckWindow& w) {
  j = json{{"deck_id", w.deck_id}};
  if (w.first_page) j["first_page"] = *w.first_page;
  if (w.last_page) j["last_page"] = *w.last_page;
}

void from_json(const json& j, DeckWindow& w) {
  w.deck_id = j.at("deck_id").get<std::string>();
  w.first_page.reset();
  w.last_page.reset();
  if (j.contains("first_page")) w.first_page = j.at("first_page").get<int>();
  if (j.contains("last_page")) w.last_page = j.at("last_page").get<int>();
}

void to_json(json& j, const RetrievalRange& r) { j = json{{"decks", r.decks}}; }

void from_json(const json& j, RetrievalRange& r) {
  r.decks = j.at("decks").get<std::vector<DeckWindow>>();
}

void to_json(json& j, const Question& q) {
  j = json{{"question_id", q.question_id},
           {"kind", kind_name(q.kind)},
           {"prompt_text", q.prompt_text},
           {"learning_objective_id", q.learning_objective_id},
           {"retrieval_range", q.retrieval_range},
           {"human_feedback_text", q.human_feedback_text}};
  if (q.kind == QuestionKind::Mcq) {
    j["options"] = q.options;
    if (q.answer_key) j["answer_key"] = *q.answer_key;
  }
}

void from_json(const json& j, Question& q) {
  q.question_id = j.at("question_id").get<std::string>();
  q.kind = parse_kind(j.at("kind").get<std::string>());
  q.prompt_text = j.at("prompt_text").get<std::string>();
  q.options = j.value("options", std::vector<std::string>{});
  q.answer_key.reset();
  if (j.contains("answer_key")) q.answer_key = j.at("answer_key").get<int>();
  q.learning_objective_id = j.value("learning_objective_id", "");
  q.retrieval_range = j.at("retrieval_range").get<RetrievalRange>();
  q.human_feedback_text = j.value("human_feedback_text", "");
}

void to_json(json& j, const TestItem& t) {
  j = json{{"item_id", t.item_id}, {"prompt", t.prompt}, {"options", t.options}, {"key", t.key}};
}

void from_json(const json& j, TestItem& t) {
  t.item_id = j.at("item_id").get<std::string>();
  t.prompt = j.value("prompt", "");
  t.options = j.value("options", std::vector<std::string>{});
  t.key = j.at("key").get<int>();
}

void to_json(json& j, const TestPaper& t) {
  j = json{{"items", t.items}, {"attention_check", t.attention_check}};
}

void from_json(const json& j, TestPaper& t) {
  t.items = j.at("items").get<std::vector<TestItem>>();
  t.attention_check = j.at("attention_check").get<TestItem>();
}

void to_json(json& j, const SurveyItem& s) {
  j = json{{"item_id", s.item_id}, {"text", s.text}};
  if (s.attention_expected) j["attention_expected"] = *s.attention_expected;
}

void from_json(const json& j, SurveyItem& s) {
  s.item_id = j.at("item_id").get<std::string>();
  s.text = j.value("text", "");
  s.attention_expected.reset();
  if (j.contains("attention_expected")) s.attention_expected = j.at("attention_expected").get<int>();
}

void to_json(json& j, const Course& c) {
  j = json{{"course_id", c.course_id},
           {"questions", c.questions},
           {"pre_test", c.pre_test},
           {"post_test", c.post_test},
           {"survey", c.survey}};
}

void from_json(const json& j, Course& c) {
  c.course_id = j.at("course_id").get<std::string>();
  c.questions = j.at("questions").get<std::vector<Question>>();
  c.pre_test = j.at("pre_test").get<TestPaper>();
  c.post_test = j.at("post_test").get<TestPaper>();
  c.survey = j.value("survey", std::vector<SurveyItem>{});
}

void validate_question(const Question& q) {
  const auto fail = [&](const std::string& why) {
    throw Error(Errc::InvalidArgument, "question '" + q.question_id + "': " + why);
  };
  if (q.question_id.empty()) fail("empty id");
  if (q.prompt_text.empty()) fail("empty prompt");
  if (q.kind == QuestionKind::Mcq) {
    if (q.options.size() < 2) fail("MCQ needs at least 2 options");
    if (!q.answer_key) fail("MCQ needs an answer key");
    if (*q.answer_key < 0 || *q.answer_key >= static_cast<int>(q.options.size())) {
      fail("answer key out of range");
    }
  } else {
    if (q.answer_key) fail("open-ended question must not have an answer key");
    if (!q.options.empty()) fail("open-ended question must not have options");
  }
  if (q.retrieval_range.decks.empty()) fail("empty retrieval range");
}

namespace {

void validate_item(const TestItem& t) {
  if (t.item_id.empty()) throw Error(Errc::InvalidArgument, "test item with empty id");
  if (t.options.size() < 2 || t.key < 0 || t.key >= static_cast<int>(t.options.size())) {
    throw Error(Errc::InvalidArgument, "test item '" + t.item_id + "' has invalid options/key");
  }
}

}  // namespace

void validate_course_shape(const Course& c) {
  std::set<std::string> ids;
  for (const auto& q : c.questions) {
    validate_question(q);
    if (!ids.insert(q.question_id).second) {
      throw Error(Errc::InvalidArgument, "duplicate question id '" + q.question_id + "'");
    }
  }
  for (const auto* paper : {&c.pre_test, &c.post_test}) {
    if (paper->items.empty()) throw Error(Errc::InvalidArgument, "test paper has no items");
    for (const auto& item : paper->items) validate_item(item);
    validate_item(paper->attention_check);
  }
  if (c.pre_test.items != c.post_test.items) {
    throw Error(Errc::InvalidArgument, "post-test items must equal pre-test items");
  }
  std::set<std::string> survey_ids;
  for (const auto& s : c.survey) {
    if (!survey_ids.insert(s.item_id).second) {
      throw Error(Errc::InvalidArgument, "duplicate survey item '" + s.item_id + "'");
    }
    if (s.attention_expected && (*s.attention_expected < 1 || *s.attention_expected > 5)) {
      throw Error(Errc::InvalidArgument, "survey attention value outside 1..5");
    }
  }
}

}  // namespace sir
