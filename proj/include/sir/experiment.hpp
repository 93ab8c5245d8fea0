#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "sir/feedback.hpp"
#include "sir/json_io.hpp"
#include "sir/types.hpp"
#include "sir/wal.hpp"

namespace sir {

/// The five study steps, in the only order a session may move through them.
enum class Phase { PreTest = 1, LearningI = 2, LearningII = 3, PostTest = 4, Survey = 5 };
enum class TestPhase { Pre, Post };

std::string_view phase_name(Phase p);
Phase parse_phase(std::string_view s);

struct ResponseRecord {
  std::string question_id;
  std::string latest_text;
  std::int64_t submitted_at = 0;
  std::vector<std::string> history;  // append-only; back() == latest_text
  std::string feedback_bundle_ref;

  friend bool operator==(const ResponseRecord&, const ResponseRecord&) = default;
};

struct LikertAnswer {
  std::string item_id;
  int value = 0;  // 1..5
  friend bool operator==(const LikertAnswer&, const LikertAnswer&) = default;
};

struct Session {
  std::string session_id;
  std::string participant_id;
  Condition condition = Condition::HumanText;
  Phase phase = Phase::PreTest;
  bool completed = false;  // survey submitted
  std::int64_t created_at = 0;
  std::map<std::string, ResponseRecord> answers;
  std::optional<int> pre_score;
  std::optional<int> post_score;
  int max_score = 0;
  std::vector<LikertAnswer> survey;
  std::string survey_comment;
  std::map<std::string, bool> attention;  // "pre", "post", "survey"
  std::uint64_t last_seq = 0;

  friend bool operator==(const Session&, const Session&) = default;
};

void to_json(json& j, const ResponseRecord& r);
void from_json(const json& j, ResponseRecord& r);
void to_json(json& j, const LikertAnswer& a);
void from_json(const json& j, LikertAnswer& a);
void to_json(json& j, const Session& s);
void from_json(const json& j, Session& s);

/// Uniform draw over the four conditions, a pure function of (participant, seed).
Condition assign_condition(std::string_view participant_id, std::uint64_t seed);

struct PaperScore {
  int score = 0;
  bool attention_pass = false;
};

/// Counts key matches over the scored items. Every scored item must have a
/// response (IncompleteResponses); a missing attention response fails the check.
PaperScore score_paper(const TestPaper& paper, const std::map<std::string, int>& responses);

/// Sessions that completed the study and passed every attention check.
std::vector<Session> filter_sessions(std::span<const Session> sessions);

/// Durable participant sessions. Every mutation is appended to the
/// session's write-ahead log and synced before the call returns; phase
/// changes compact the log into `<id>.snap.json`. Operations on one session
/// are serialized; different sessions proceed independently.
class SessionStore {
 public:
  SessionStore(std::filesystem::path dir, std::shared_ptr<const Course> course, std::uint64_t seed);

  /// Assigns the condition and starts the session in the pre-test phase.
  /// Throws AlreadyAssigned for a participant that already has a session.
  Session create_session(const std::string& participant_id);

  Session get(const std::string& session_id) const;
  bool contains(const std::string& session_id) const;
  std::vector<Session> all() const;

  /// Learning phase II answer. Durable when this returns.
  ResponseRecord submit_answer(const std::string& session_id, const std::string& question_id,
                               const std::string& text);
  void attach_feedback(const std::string& session_id, const std::string& question_id,
                       const std::string& bundle_ref);

  /// Scores the pre- or post-test and moves to the next phase.
  PaperScore score_test(const std::string& session_id, TestPhase phase,
                        const std::map<std::string, int>& responses);
  /// LearningI -> LearningII -> PostTest. Other phases end via scoring/survey.
  Phase advance(const std::string& session_id);
  void submit_survey(const std::string& session_id, const std::vector<LikertAnswer>& answers,
                     const std::string& comment);

  /// One JSON object per line, sessions ordered by session_id.
  void export_ndjson(std::ostream& out) const;

  const Course& course() const { return *course_; }
  std::uint64_t seed() const { return seed_; }

 private:
  struct Entry {
    mutable std::mutex mu;
    Session session;
  };

  Entry& entry(const std::string& session_id) const;
  AppendLog log_for(const std::string& session_id) const;
  std::filesystem::path snapshot_path(const std::string& session_id) const;
  void commit(Entry& e, json record, bool compact);
  void load();

  std::filesystem::path dir_;
  std::shared_ptr<const Course> course_;
  std::uint64_t seed_;
  mutable std::shared_mutex mu_;
  std::mutex create_mu_;
  std::map<std::string, std::unique_ptr<Entry>> sessions_;
  std::map<std::string, std::string> by_participant_;
};

/// Applies one log record to a session; shared by live writes and replay.
void apply_record(Session& s, const json& record);

std::vector<Session> read_sessions_ndjson(std::istream& in);

}  // namespace sir
