#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sir/service.hpp"

namespace sir {

struct SimulationOptions {
  std::size_t participants = 100;
  std::uint64_t seed = 1;
  // Items gained from pre- to post-test, per condition. Missing means 0.
  std::map<Condition, int> boost;
  // Post-test score varies by up to +-noise items around pre + boost.
  int noise = 0;
  // Share of participants who miss one attention check.
  double inattentive_rate = 0.09;
  // Submit open-ended and MCQ answers in learning phase II.
  bool answer_questions = true;
};

struct SimulatedParticipant {
  std::string participant_id;
  std::string session_id;
  Condition condition = Condition::HumanText;
  int pre = 0;
  int post = 0;
  bool attentive = true;
};

/// Drives seeded mock participants through all five phases of the study
/// via the service. Pre-test scores are drawn at random; the post-test
/// score is pre + boost[condition], exactly when noise is 0, otherwise
/// shifted uniformly within +-noise and clamped to the test range.
std::vector<SimulatedParticipant> simulate_study(Service& svc, const SimulationOptions& opts);

}  // namespace sir
