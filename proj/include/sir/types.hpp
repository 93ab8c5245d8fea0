#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sir {

/// Address of one slide page inside the store.
struct PageRef {
  std::string deck_id;
  int page_no = 0;

  friend auto operator<=>(const PageRef&, const PageRef&) = default;
  friend bool operator==(const PageRef&, const PageRef&) = default;
};

struct SlidePage {
  std::string deck_id;
  int page_no = 0;  // 1-based
  // Path relative to the deck directory, e.g. "pages/2.png".
  std::string image_ref;
  std::string extracted_text;
  std::optional<std::string> vision_description;
  std::optional<std::vector<float>> embedding;

  // Change-detection digests kept beside the derived artifacts.
  std::string source_hash;       // hash(image bytes, extracted_text) the description was made from
  std::string embed_input_hash;  // hash(embedding input, embedder id) the embedding was made from

  PageRef ref() const { return {deck_id, page_no}; }
  friend bool operator==(const SlidePage&, const SlidePage&) = default;
};

struct SlideDeck {
  std::string deck_id;
  std::string title;
  std::vector<SlidePage> pages;
  std::string source_uri;

  friend bool operator==(const SlideDeck&, const SlideDeck&) = default;
};

/// Optional inclusive page window for one deck in a retrieval range.
struct DeckWindow {
  std::string deck_id;
  std::optional<int> first_page;
  std::optional<int> last_page;

  friend bool operator==(const DeckWindow&, const DeckWindow&) = default;
};

struct RetrievalRange {
  std::vector<DeckWindow> decks;

  friend bool operator==(const RetrievalRange&, const RetrievalRange&) = default;
};

enum class QuestionKind { Mcq, OpenEnded };

struct Question {
  std::string question_id;
  QuestionKind kind = QuestionKind::OpenEnded;
  std::string prompt_text;
  std::vector<std::string> options;  // MCQ only
  std::optional<int> answer_key;     // MCQ only, index into options
  std::string learning_objective_id;
  RetrievalRange retrieval_range;
  std::string human_feedback_text;

  friend bool operator==(const Question&, const Question&) = default;
};

/// One multiple-choice item of the pre/post test.
struct TestItem {
  std::string item_id;
  std::string prompt;
  std::vector<std::string> options;
  int key = 0;

  friend bool operator==(const TestItem&, const TestItem&) = default;
};

struct TestPaper {
  std::vector<TestItem> items;  // scored items (15 in the study)
  TestItem attention_check;     // instructed-response item, scored separately

  friend bool operator==(const TestPaper&, const TestPaper&) = default;
};

struct SurveyItem {
  std::string item_id;  // "Q1".."Q11", ...
  std::string text;
  // Set on the instructed-response item: the only passing value.
  std::optional<int> attention_expected;

  friend bool operator==(const SurveyItem&, const SurveyItem&) = default;
};

/// Experiment artifacts for one course: learning-phase questions, tests, survey.
struct Course {
  std::string course_id;
  std::vector<Question> questions;
  TestPaper pre_test;
  TestPaper post_test;
  std::vector<SurveyItem> survey;

  const Question* find_question(std::string_view id) const {
    for (const auto& q : questions) {
      if (q.question_id == id) return &q;
    }
    return nullptr;
  }

  friend bool operator==(const Course&, const Course&) = default;
};

}  // namespace sir
