#include "sir/simulation.hpp"

#include <algorithm>
#include <random>

#include "sir/error.hpp"
#include "sir/hash.hpp"

namespace sir {

namespace {

int wrong_option(const TestItem& item) {
  return static_cast<int>((static_cast<std::size_t>(item.key) + 1) % std::max<std::size_t>(item.options.size(), 2));
}

// Answers the first `correct` items right (in a shuffled order) and the rest wrong.
std::map<std::string, int> answer_paper(const TestPaper& paper, int correct, bool pass_attention,
                                        std::mt19937_64& rng) {
  std::vector<std::size_t> order(paper.items.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  std::map<std::string, int> out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& item = paper.items[order[i]];
    out[item.item_id] = static_cast<int>(i) < correct ? item.key : wrong_option(item);
  }
  const auto& ac = paper.attention_check;
  out[ac.item_id] = pass_attention ? ac.key : wrong_option(ac);
  return out;
}

}  // namespace

std::vector<SimulatedParticipant> simulate_study(Service& svc, const SimulationOptions& opts) {
  const auto course = svc.store().course();
  const int max_score = static_cast<int>(course->pre_test.items.size());
  int max_boost = 0;
  for (const auto& [c, b] : opts.boost) {
    if (b < 0 || b > max_score) throw Error(Errc::InvalidArgument, "boost out of range");
    max_boost = std::max(max_boost, b);
  }
  if (opts.noise < 0) throw Error(Errc::InvalidArgument, "noise must be non-negative");
  std::uniform_int_distribution<int> jitter(-opts.noise, opts.noise);

  std::mt19937_64 rng(Hasher{}.add("simulate").add(opts.seed).value());
  std::uniform_int_distribution<int> pre_dist(0, max_score - max_boost);
  std::uniform_int_distribution<int> likert(1, 5);
  std::uniform_int_distribution<int> which_check(0, 2);
  std::bernoulli_distribution inattentive(opts.inattentive_rate);

  std::vector<SimulatedParticipant> out;
  out.reserve(opts.participants);
  for (std::size_t i = 0; i < opts.participants; ++i) {
    SimulatedParticipant p;
    p.participant_id = "sim-" + std::to_string(opts.seed) + "-" + std::to_string(i);
    const auto s = svc.create_session(p.participant_id);
    p.session_id = s.session_id;
    p.condition = s.condition;
    p.attentive = !inattentive(rng);
    const int missed = p.attentive ? -1 : which_check(rng);

    auto boost = opts.boost.find(p.condition);
    p.pre = pre_dist(rng);
    p.post = p.pre + (boost == opts.boost.end() ? 0 : boost->second);
    if (opts.noise > 0) p.post = std::clamp(p.post + jitter(rng), 0, max_score);

    svc.submit_test(p.session_id, TestPhase::Pre,
                    answer_paper(course->pre_test, p.pre, missed != 0, rng));
    svc.advance(p.session_id);
    if (opts.answer_questions) {
      for (const auto& q : course->questions) {
        std::string text;
        if (q.kind == QuestionKind::Mcq) {
          text = std::to_string(std::uniform_int_distribution<std::size_t>(0, q.options.size() - 1)(rng));
        } else {
          text = "participant " + std::to_string(i) + " thinks " + q.prompt_text;
        }
        svc.submit_answer(p.session_id, q.question_id, text);
      }
    }
    svc.advance(p.session_id);
    svc.submit_test(p.session_id, TestPhase::Post,
                    answer_paper(course->post_test, p.post, missed != 1, rng));

    std::vector<LikertAnswer> answers;
    bool survey_check = false;
    for (const auto& item : course->survey) {
      int v = likert(rng);
      if (item.attention_expected) {
        v = *item.attention_expected;
        survey_check = true;
        if (missed == 2) v = v == 1 ? 2 : 1;
      }
      answers.push_back({item.item_id, v});
    }
    if (missed == 2 && !survey_check) p.attentive = true;
    svc.submit_survey(p.session_id, answers, "");
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace sir
