#include "sir/service.hpp"

#include <future>
#include <sstream>
#include <thread>

#include "sir/error.hpp"

namespace sir {

Providers Providers::from_config(const ServiceConfig& cfg) {
  Providers p;
  if (cfg.mock_providers) {
    p.vision = std::make_shared<MockVisionProvider>();
    p.embedding = std::make_shared<FeatureHashEmbedder>();
    p.generation = std::make_shared<MockGenerationProvider>();
  } else {
    p.vision = make_live_vision_provider(cfg.live);
    p.embedding = make_live_embedding_provider(cfg.live);
    p.generation = make_live_generation_provider(cfg.live);
  }
  return p;
}

Service::Service(ServiceConfig cfg, Providers providers) : cfg_(std::move(cfg)) {
  auto defaults = (providers.vision && providers.embedding && providers.generation)
                      ? Providers{}
                      : Providers::from_config(cfg_);
  providers_.vision = providers.vision ? providers.vision : defaults.vision;
  providers_.embedding = providers.embedding ? providers.embedding : defaults.embedding;
  providers_.generation = providers.generation ? providers.generation : defaults.generation;

  store_ = std::make_unique<ContentStore>(cfg_.store_root);
  retriever_ = std::make_unique<Retriever>(*store_, *providers_.embedding);
  auto tmpl = cfg_.prompt_template ? PromptTemplate::from_file(*cfg_.prompt_template)
                                   : PromptTemplate::builtin();
  composer_ = std::make_unique<FeedbackComposer>(*store_, *retriever_, *providers_.generation,
                                                 std::move(tmpl), ComposerOptions{cfg_.grounding});
  if (store_->has_course()) {
    sessions_ = std::make_shared<SessionStore>(cfg_.store_root / "sessions", store_->course(),
                                               cfg_.seed);
  }
}

Service::~Service() {
  std::unique_lock lock(bg_mu_);
  bg_cv_.wait(lock, [&] { return bg_running_ == 0; });
}

std::shared_ptr<SessionStore> Service::sessions() const {
  std::lock_guard lock(sessions_mu_);
  if (!sessions_) throw Error(Errc::Unavailable, "no course loaded");
  return sessions_;
}

Session Service::create_session(const std::string& participant_id) {
  if (participant_id.empty()) throw Error(Errc::InvalidArgument, "participant_id is empty");
  return sessions()->create_session(participant_id);
}

Session Service::state(const std::string& session_id) const { return sessions()->get(session_id); }

FeedbackBundle Service::compose_with_deadline(const std::string& session_id, const Question& q,
                                              const std::string& text, Condition condition) {
  if (!has_ai_text(condition)) return composer_->compose(session_id, q, text, condition);

  auto task = std::make_shared<std::packaged_task<FeedbackBundle()>>(
      [this, session_id, q, text, condition] {
        return composer_->compose(session_id, q, text, condition);
      });
  auto result = task->get_future();
  {
    std::lock_guard lock(bg_mu_);
    ++bg_running_;
  }
  std::thread([this, task] {
    (*task)();
    std::lock_guard lock(bg_mu_);
    --bg_running_;
    bg_cv_.notify_all();
  }).detach();

  if (result.wait_for(cfg_.request_timeout) == std::future_status::ready) return result.get();
  return composer_->degraded_bundle(q, condition);
}

AnswerResult Service::submit_answer(const std::string& session_id, const std::string& question_id,
                                    const std::string& text) {
  auto ss = sessions();
  AnswerResult out;
  out.record = ss->submit_answer(session_id, question_id, text);

  const auto* q = ss->course().find_question(question_id);
  if (q->kind == QuestionKind::Mcq && q->answer_key) {
    const auto key = static_cast<std::size_t>(*q->answer_key);
    out.correct = text == std::to_string(key) || (key < q->options.size() && text == q->options[key]);
  }

  if (q->kind != QuestionKind::OpenEnded) return out;

  const auto condition = ss->get(session_id).condition;
  auto bundle = compose_with_deadline(session_id, *q, text, condition);
  const auto ref = bundle.degraded
                       ? std::string("degraded")
                       : FeedbackComposer::cache_key(session_id, question_id, text, condition);
  ss->attach_feedback(session_id, question_id, ref);
  out.record.feedback_bundle_ref = ref;
  out.feedback = std::move(bundle);
  return out;
}

PaperScore Service::submit_test(const std::string& session_id, TestPhase phase,
                                const std::map<std::string, int>& responses) {
  return sessions()->score_test(session_id, phase, responses);
}

Phase Service::advance(const std::string& session_id) { return sessions()->advance(session_id); }

void Service::submit_survey(const std::string& session_id, const std::vector<LikertAnswer>& answers,
                            const std::string& comment) {
  sessions()->submit_survey(session_id, answers, comment);
}

namespace {

json test_items(const TestPaper& paper) {
  json items = json::array();
  auto add = [&](const TestItem& t) {
    items.push_back({{"item_id", t.item_id}, {"prompt", t.prompt}, {"options", t.options}});
  };
  for (const auto& t : paper.items) add(t);
  add(paper.attention_check);
  return items;
}

}  // namespace

json Service::phase_items(const std::string& session_id) const {
  auto ss = sessions();
  const auto s = ss->get(session_id);
  const auto& course = ss->course();
  json out{{"session_id", s.session_id}, {"phase", phase_name(s.phase)}, {"items", json::array()}};
  switch (s.phase) {
    case Phase::PreTest: out["items"] = test_items(course.pre_test); break;
    case Phase::PostTest: out["items"] = test_items(course.post_test); break;
    case Phase::LearningI: {
      for (const auto& id : store_->deck_ids()) {
        const auto deck = store_->get_deck(id);
        out["items"].push_back({{"deck_id", deck.deck_id},
                                {"title", deck.title},
                                {"pages", deck.pages.size()}});
      }
      break;
    }
    case Phase::LearningII: {
      for (const auto& q : course.questions) {
        json item{{"question_id", q.question_id},
                  {"kind", q.kind == QuestionKind::Mcq ? "MCQ" : "OPEN_ENDED"},
                  {"prompt", q.prompt_text},
                  {"options", q.options},
                  {"latest_text", nullptr}};
        if (auto it = s.answers.find(q.question_id); it != s.answers.end()) {
          item["latest_text"] = it->second.latest_text;
        }
        out["items"].push_back(std::move(item));
      }
      break;
    }
    case Phase::Survey: {
      if (!s.completed) {
        for (const auto& item : course.survey) {
          out["items"].push_back({{"item_id", item.item_id}, {"text", item.text}});
        }
      }
      break;
    }
  }
  return out;
}

PageImage Service::slide_image(const std::string& deck_id, int page_no) const {
  return store_->page_image(deck_id, page_no);
}

IngestReport Service::ingest(const std::filesystem::path& deck_dir, bool overwrite) {
  const auto id = store_->import_deck_dir(deck_dir, overwrite);
  return ingest_deck(*store_, id, *providers_.vision, *providers_.embedding,
                     IngestOptions{cfg_.max_inflight});
}

void Service::load_course(Course course) {
  validate_course_shape(course);
  check_course_integrity(course, *store_);
  std::lock_guard lock(sessions_mu_);
  if (sessions_ && !sessions_->all().empty() && sessions_->course() != course) {
    throw Error(Errc::Integrity, "course cannot change once sessions exist");
  }
  store_->put_course(std::move(course));
  sessions_ = std::make_shared<SessionStore>(cfg_.store_root / "sessions", store_->course(),
                                             cfg_.seed);
}

std::vector<RetrievalResult> Service::precompute(const std::optional<std::string>& question_id) {
  const auto course = store_->course();
  std::vector<RetrievalResult> out;
  for (const auto& q : course->questions) {
    if (question_id && q.question_id != *question_id) continue;
    out.push_back(retriever_->retrieve_cached(q).result);
  }
  if (question_id && out.empty()) throw Error(Errc::UnknownQuestion, "question '" + *question_id + "'");
  return out;
}

std::string Service::export_sessions() const {
  std::ostringstream out;
  sessions()->export_ndjson(out);
  return out.str();
}

}  // namespace sir
