#pragma once

#include <array>
#include <atomic>
#include <filesystem>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sir/content_store.hpp"
#include "sir/json_io.hpp"
#include "sir/providers.hpp"
#include "sir/retrieval.hpp"

namespace sir {

/// The four cells of the feedback-source x slide-presence design.
enum class Condition { HumanText, SlideOnly, AiText, Combined };

inline constexpr std::array<Condition, 4> kAllConditions = {
    Condition::HumanText, Condition::SlideOnly, Condition::AiText, Condition::Combined};

std::string_view condition_name(Condition c);  // "HUMAN_TEXT", ...
Condition parse_condition(std::string_view name);

/// Factor codings used by the two-way ANOVA.
inline bool has_ai_text(Condition c) { return c == Condition::AiText || c == Condition::Combined; }
inline bool has_slide(Condition c) { return c == Condition::SlideOnly || c == Condition::Combined; }
inline bool has_text(Condition c) { return c != Condition::SlideOnly; }

enum class Provenance { CannedHuman, Generated, None };
std::string_view provenance_name(Provenance p);

struct SlidePayload {
  std::string image_ref;  // API path of the full-resolution image
  std::string deck_id;
  int page_no = 0;
  friend bool operator==(const SlidePayload&, const SlidePayload&) = default;
};

struct FeedbackBundle {
  std::string question_id;
  Condition condition = Condition::HumanText;
  std::optional<std::string> text_feedback;
  std::optional<SlidePayload> slide;
  std::optional<std::string> vision_explanation;
  double latency_ms = 0;
  Provenance text_provenance = Provenance::None;
  Provenance explanation_provenance = Provenance::None;
  bool degraded = false;  // generation failed; text is a placeholder

  friend bool operator==(const FeedbackBundle&, const FeedbackBundle&) = default;
};

void to_json(json& j, const FeedbackBundle& b);
void from_json(const json& j, FeedbackBundle& b);

/// Throws Error(Integrity) if the present fields do not match the condition.
void check_bundle(const FeedbackBundle& b);

inline constexpr std::string_view kDegradedText = "feedback temporarily unavailable";
inline constexpr std::size_t kMaxFeedbackWords = 150;

std::string slide_image_path(const PageRef& ref);

/// Feedback prompt template with {question}, {response}, {slides} and
/// {format_rules} placeholders, in that order. Leading '#' lines are comments.
class PromptTemplate {
 public:
  static PromptTemplate from_file(const std::filesystem::path& path);
  static PromptTemplate from_text(std::string text);
  /// Copy of templates/feedback_prompt.txt compiled into the library.
  static PromptTemplate builtin();

  std::string render(std::string_view question, std::string_view response,
                     std::string_view slides, std::string_view format_rules) const;
  const std::string& body() const { return body_; }
  const std::string& version() const { return version_; }

 private:
  std::string body_;
  std::string version_;
};

struct SlideContext {
  PageRef ref;
  std::string description;
};

std::string format_rules();

/// Assembles the generation prompt. At most three slide blocks are included,
/// each introduced by "[SLIDE <deck_id> p<page_no>]". Throws EmptyResponse.
std::string build_prompt(const PromptTemplate& tmpl, const Question& question,
                         std::string_view response, std::span<const SlideContext> slides);

struct ComposerOptions {
  bool grounding = true;
};

/// Builds the condition-dependent bundle. Generated feedback is produced once
/// per (session, question, response); identical resubmissions are served
/// from a cache persisted under `<cache_dir>/<key>.json`.
class FeedbackComposer {
 public:
  FeedbackComposer(const ContentStore& store, Retriever& retriever, GenerationProvider& generator,
                   PromptTemplate tmpl, ComposerOptions opts = {},
                   std::optional<std::filesystem::path> cache_dir = std::nullopt);

  FeedbackBundle compose(const std::string& session_id, const Question& question,
                         std::string_view response, Condition condition);

  /// Bundle delivered when generation cannot finish in time: slide parts and
  /// canned text as usual, generated text replaced by the placeholder.
  FeedbackBundle degraded_bundle(const Question& question, Condition condition);

  /// The prompt an AI condition would send for this response.
  std::string prompt_for(const Question& question, std::string_view response);

  static std::string cache_key(std::string_view session_id, std::string_view question_id,
                               std::string_view response, Condition condition);

  std::uint64_t cache_hits() const { return cache_hits_.load(); }

 private:
  std::vector<SlideContext> grounding_slides(const Question& question);
  FeedbackBundle compose_uncached(const Question& question, std::string_view response,
                                  Condition condition, bool generate);
  std::optional<FeedbackBundle> load(const std::string& key) const;

  const ContentStore& store_;
  Retriever& retriever_;
  GenerationProvider& generator_;
  PromptTemplate tmpl_;
  ComposerOptions opts_;
  std::filesystem::path cache_dir_;
  std::array<std::mutex, 64> stripes_;
  std::atomic<std::uint64_t> cache_hits_{0};
};

}  // namespace sir
