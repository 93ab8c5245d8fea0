#include "sir/feedback.hpp"

#include <chrono>
#include <iostream>
#include <sstream>

#include "sir/error.hpp"
#include "sir/fsutil.hpp"
#include "sir/hash.hpp"

namespace sir {

extern const char* const kBuiltinFeedbackPrompt;  // generated from templates/feedback_prompt.txt

std::string_view condition_name(Condition c) {
  switch (c) {
    case Condition::HumanText: return "HUMAN_TEXT";
    case Condition::SlideOnly: return "SLIDE_ONLY";
    case Condition::AiText: return "AI_TEXT";
    case Condition::Combined: return "COMBINED";
  }
  return "?";
}

Condition parse_condition(std::string_view name) {
  for (auto c : kAllConditions) {
    if (condition_name(c) == name) return c;
  }
  throw Error(Errc::Parse, "unknown condition '" + std::string(name) + "'");
}

std::string_view provenance_name(Provenance p) {
  switch (p) {
    case Provenance::CannedHuman: return "CANNED_HUMAN";
    case Provenance::Generated: return "GENERATED";
    case Provenance::None: return "NONE";
  }
  return "?";
}

namespace {

Provenance parse_provenance(std::string_view s) {
  for (auto p : {Provenance::CannedHuman, Provenance::Generated, Provenance::None}) {
    if (provenance_name(p) == s) return p;
  }
  throw Error(Errc::Parse, "unknown provenance '" + std::string(s) + "'");
}

bool blank(std::string_view s) { return s.find_first_not_of(" \t\r\n") == std::string_view::npos; }

}  // namespace

void to_json(json& j, const FeedbackBundle& b) {
  j = json{{"question_id", b.question_id},
           {"condition", condition_name(b.condition)},
           {"text_feedback", nullptr},
           {"slide", nullptr},
           {"vision_explanation", nullptr},
           {"latency_ms", b.latency_ms},
           {"provenance",
            {{"text_feedback", provenance_name(b.text_provenance)},
             {"vision_explanation", provenance_name(b.explanation_provenance)}}},
           {"degraded", b.degraded}};
  if (b.text_feedback) j["text_feedback"] = *b.text_feedback;
  if (b.slide) {
    j["slide"] = {{"image_ref", b.slide->image_ref},
                  {"deck_id", b.slide->deck_id},
                  {"page_no", b.slide->page_no}};
  }
  if (b.vision_explanation) j["vision_explanation"] = *b.vision_explanation;
}

void from_json(const json& j, FeedbackBundle& b) {
  b.question_id = j.at("question_id").get<std::string>();
  b.condition = parse_condition(j.at("condition").get<std::string>());
  b.text_feedback.reset();
  b.slide.reset();
  b.vision_explanation.reset();
  if (!j.at("text_feedback").is_null()) b.text_feedback = j["text_feedback"].get<std::string>();
  if (!j.at("slide").is_null()) {
    const auto& s = j["slide"];
    b.slide = SlidePayload{s.at("image_ref").get<std::string>(), s.at("deck_id").get<std::string>(),
                           s.at("page_no").get<int>()};
  }
  if (!j.at("vision_explanation").is_null()) {
    b.vision_explanation = j["vision_explanation"].get<std::string>();
  }
  b.latency_ms = j.at("latency_ms").get<double>();
  b.text_provenance = parse_provenance(j.at("provenance").at("text_feedback").get<std::string>());
  b.explanation_provenance =
      parse_provenance(j.at("provenance").at("vision_explanation").get<std::string>());
  b.degraded = j.value("degraded", false);
}

void check_bundle(const FeedbackBundle& b) {
  const auto fail = [&](const std::string& why) {
    throw Error(Errc::Integrity,
                std::string(condition_name(b.condition)) + " bundle for '" + b.question_id + "': " + why);
  };
  if (b.text_feedback.has_value() != has_text(b.condition)) fail("text presence");
  if (b.slide.has_value() != has_slide(b.condition)) fail("slide presence");
  if (b.vision_explanation.has_value() != has_slide(b.condition)) fail("explanation presence");
  const auto expected_text = b.condition == Condition::HumanText ? Provenance::CannedHuman
                             : has_ai_text(b.condition)          ? Provenance::Generated
                                                                 : Provenance::None;
  if (b.text_provenance != expected_text) fail("text provenance");
  const auto expected_expl = has_slide(b.condition) ? Provenance::Generated : Provenance::None;
  if (b.explanation_provenance != expected_expl) fail("explanation provenance");
  if (b.degraded && !has_ai_text(b.condition)) fail("only generated text can be degraded");
  if (b.latency_ms < 0) fail("negative latency");
}

std::string slide_image_path(const PageRef& ref) {
  return "/v1/slides/" + ref.deck_id + "/" + std::to_string(ref.page_no) + "/image";
}

PromptTemplate PromptTemplate::from_file(const std::filesystem::path& path) {
  return from_text(fsutil::read_file(path));
}

PromptTemplate PromptTemplate::builtin() { return from_text(kBuiltinFeedbackPrompt); }

PromptTemplate PromptTemplate::from_text(std::string text) {
  static constexpr std::string_view kVersion = "# feedback-prompt version:";
  PromptTemplate t;
  std::istringstream in(text);
  std::string line;
  std::string body;
  bool header = true;
  while (std::getline(in, line)) {
    if (header && line.starts_with("#")) {
      if (line.starts_with(kVersion)) {
        auto v = line.substr(kVersion.size());
        v.erase(0, v.find_first_not_of(' '));
        t.version_ = v;
      }
      continue;
    }
    header = false;
    body += line;
    body += '\n';
  }
  std::size_t last = 0;
  for (std::string_view ph : {"{question}", "{response}", "{slides}", "{format_rules}"}) {
    auto pos = body.find(ph);
    if (pos == std::string::npos || pos < last) {
      throw Error(Errc::Parse, "prompt template must contain " + std::string(ph) + " in order");
    }
    last = pos;
  }
  t.body_ = std::move(body);
  return t;
}

std::string PromptTemplate::render(std::string_view question, std::string_view response,
                                   std::string_view slides, std::string_view rules) const {
  // Single pass, so placeholder text inside a student response stays literal.
  const std::pair<std::string_view, std::string_view> subs[] = {
      {"{question}", question}, {"{response}", response}, {"{slides}", slides}, {"{format_rules}", rules}};
  std::string out;
  out.reserve(body_.size() + question.size() + response.size() + slides.size() + rules.size());
  std::size_t i = 0;
  while (i < body_.size()) {
    bool replaced = false;
    if (body_[i] == '{') {
      for (const auto& [ph, value] : subs) {
        if (std::string_view(body_).substr(i, ph.size()) == ph) {
          out += value;
          i += ph.size();
          replaced = true;
          break;
        }
      }
    }
    if (!replaced) out += body_[i++];
  }
  return out;
}

std::string format_rules() {
  return "Write at most " + std::to_string(kMaxFeedbackWords) +
         " words in plain language. Use short sentences and no headings.";
}

std::string build_prompt(const PromptTemplate& tmpl, const Question& question,
                         std::string_view response, std::span<const SlideContext> slides) {
  if (blank(response)) throw Error(Errc::EmptyResponse, "empty response to '" + question.question_id + "'");
  std::string block;
  const auto n = std::min(slides.size(), kGroundingSlides);
  for (std::size_t i = 0; i < n; ++i) {
    if (!block.empty()) block += '\n';
    block += "[SLIDE " + slides[i].ref.deck_id + " p" + std::to_string(slides[i].ref.page_no) + "]\n";
    block += slides[i].description;
    block += '\n';
  }
  if (block.empty()) block = "(no slides available)\n";
  return tmpl.render(question.prompt_text, response, block, format_rules());
}

FeedbackComposer::FeedbackComposer(const ContentStore& store, Retriever& retriever,
                                   GenerationProvider& generator, PromptTemplate tmpl,
                                   ComposerOptions opts,
                                   std::optional<std::filesystem::path> cache_dir)
    : store_(store),
      retriever_(retriever),
      generator_(generator),
      tmpl_(std::move(tmpl)),
      opts_(opts),
      cache_dir_(cache_dir.value_or(store.root() / "cache" / "feedback")) {}

std::string FeedbackComposer::cache_key(std::string_view session_id, std::string_view question_id,
                                        std::string_view response, Condition condition) {
  return Hasher{}.add(session_id).add(question_id).add(response).add(condition_name(condition)).hex();
}

std::vector<SlideContext> FeedbackComposer::grounding_slides(const Question& question) {
  std::vector<SlideContext> out;
  if (!opts_.grounding) return out;
  auto retrieved = retriever_.retrieve_cached(question);
  for (const auto& hit : retrieved.result.hits) {
    auto page = store_.get_page(hit.deck_id, hit.page_no);
    out.push_back({hit.ref(), page.vision_description.value_or(page.extracted_text)});
  }
  return out;
}

std::string FeedbackComposer::prompt_for(const Question& question, std::string_view response) {
  if (blank(response)) throw Error(Errc::EmptyResponse, "empty response to '" + question.question_id + "'");
  auto slides = grounding_slides(question);
  return build_prompt(tmpl_, question, response, slides);
}

std::optional<FeedbackBundle> FeedbackComposer::load(const std::string& key) const {
  const auto path = cache_dir_ / (key + ".json");
  if (!std::filesystem::exists(path)) return std::nullopt;
  try {
    return json::parse(fsutil::read_file(path)).get<FeedbackBundle>();
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

FeedbackBundle FeedbackComposer::compose(const std::string& session_id, const Question& question,
                                         std::string_view response, Condition condition) {
  if (blank(response)) throw Error(Errc::EmptyResponse, "empty response to '" + question.question_id + "'");
  const auto key = cache_key(session_id, question.question_id, response, condition);
  std::lock_guard lock(stripes_[std::hash<std::string>{}(key) % stripes_.size()]);
  if (auto cached = load(key)) {
    ++cache_hits_;
    return *cached;
  }
  auto bundle = compose_uncached(question, response, condition, true);
  check_bundle(bundle);
  if (!bundle.degraded) fsutil::write_file_atomic(cache_dir_ / (key + ".json"), json(bundle).dump());
  return bundle;
}

FeedbackBundle FeedbackComposer::degraded_bundle(const Question& question, Condition condition) {
  auto bundle = compose_uncached(question, {}, condition, false);
  check_bundle(bundle);
  return bundle;
}

FeedbackBundle FeedbackComposer::compose_uncached(const Question& question,
                                                  std::string_view response, Condition condition,
                                                  bool generate) {
  const auto start = std::chrono::steady_clock::now();
  FeedbackBundle b;
  b.question_id = question.question_id;
  b.condition = condition;

  if (condition == Condition::HumanText) {
    if (question.human_feedback_text.empty()) {
      throw Error(Errc::InvalidArgument,
                  "question '" + question.question_id + "' has no human feedback text");
    }
    b.text_feedback = question.human_feedback_text;
    b.text_provenance = Provenance::CannedHuman;
  }

  if (has_slide(condition)) {
    auto retrieved = retriever_.retrieve_cached(question);
    const auto ref = primary_slide(retrieved.result);
    auto page = store_.get_page(ref.deck_id, ref.page_no);
    if (!page.vision_description) {
      throw Error(Errc::MissingDescription,
                  "retrieved slide " + ref.deck_id + " p" + std::to_string(ref.page_no));
    }
    b.slide = SlidePayload{slide_image_path(ref), ref.deck_id, ref.page_no};
    b.vision_explanation = *page.vision_description;
    b.explanation_provenance = Provenance::Generated;
  }

  if (has_ai_text(condition)) {
    b.text_provenance = Provenance::Generated;
    if (generate) {
      try {
        b.text_feedback = generator_.generate(prompt_for(question, response));
      } catch (const Error& e) {
        if (e.code() != Errc::ProviderFailure) throw;
        std::cerr << "sir: feedback generation failed for '" << question.question_id
                  << "': " << e.what() << '\n';
      }
    }
    if (!b.text_feedback) {
      b.text_feedback = std::string(kDegradedText);
      b.degraded = true;
    }
  }

  b.latency_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return b;
}

}  // namespace sir
