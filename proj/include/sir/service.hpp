#pragma once

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "sir/content_store.hpp"
#include "sir/experiment.hpp"
#include "sir/feedback.hpp"
#include "sir/ingest.hpp"
#include "sir/openai_providers.hpp"
#include "sir/providers.hpp"
#include "sir/retrieval.hpp"

namespace sir {

struct ServiceConfig {
  std::filesystem::path store_root = "store";
  std::uint64_t seed = 0;
  std::chrono::milliseconds request_timeout{10000};
  bool mock_providers = true;
  LiveProviderSettings live;
  std::optional<std::filesystem::path> prompt_template;
  std::size_t max_inflight = 4;
  bool grounding = true;
};

/// Provider set used by a service. Null members are created from the config.
struct Providers {
  std::shared_ptr<VisionProvider> vision;
  std::shared_ptr<EmbeddingProvider> embedding;
  std::shared_ptr<GenerationProvider> generation;

  static Providers from_config(const ServiceConfig& cfg);
};

struct AnswerResult {
  ResponseRecord record;
  std::optional<FeedbackBundle> feedback;  // open-ended questions only
  std::optional<bool> correct;             // MCQ questions only
};

/// The runtime loop behind the HTTP API: sessions, answers with feedback,
/// slide images and the admin operations.
class Service {
 public:
  explicit Service(ServiceConfig cfg, Providers providers = {});
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  Session create_session(const std::string& participant_id);
  Session state(const std::string& session_id) const;

  /// Persists the answer, then composes feedback. If composition exceeds the
  /// request timeout, a degraded bundle is returned and generation finishes
  /// in the background (its result serves later identical submissions).
  AnswerResult submit_answer(const std::string& session_id, const std::string& question_id,
                             const std::string& text);

  PaperScore submit_test(const std::string& session_id, TestPhase phase,
                         const std::map<std::string, int>& responses);
  Phase advance(const std::string& session_id);
  void submit_survey(const std::string& session_id, const std::vector<LikertAnswer>& answers,
                     const std::string& comment);

  /// Items the session should see in its current phase, without answer keys.
  json phase_items(const std::string& session_id) const;

  PageImage slide_image(const std::string& deck_id, int page_no) const;

  IngestReport ingest(const std::filesystem::path& deck_dir, bool overwrite);
  void load_course(Course course);
  std::vector<RetrievalResult> precompute(const std::optional<std::string>& question_id);
  std::string export_sessions() const;

  ContentStore& store() { return *store_; }
  Retriever& retriever() { return *retriever_; }
  FeedbackComposer& composer() { return *composer_; }
  /// Throws Unavailable until a course is loaded.
  std::shared_ptr<SessionStore> sessions() const;
  const Providers& providers() const { return providers_; }
  const ServiceConfig& config() const { return cfg_; }

 private:
  FeedbackBundle compose_with_deadline(const std::string& session_id, const Question& q,
                                       const std::string& text, Condition condition);

  ServiceConfig cfg_;
  Providers providers_;
  std::unique_ptr<ContentStore> store_;
  std::unique_ptr<Retriever> retriever_;
  std::unique_ptr<FeedbackComposer> composer_;
  mutable std::mutex sessions_mu_;
  std::shared_ptr<SessionStore> sessions_;

  std::mutex bg_mu_;
  std::condition_variable bg_cv_;
  int bg_running_ = 0;
};

}  // namespace sir
