#include <catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "sir/analytics/report.hpp"
#include "sir/fsutil.hpp"
#include "test_support.hpp"

using namespace sir;
using namespace sir::analytics;
using namespace sir::testing;

namespace {

std::string golden(const std::string& name) { return fsutil::read_file(kSourceDir / "tests/golden" / name); }

stats::TTestResult tt(double t, double p) {
  stats::TTestResult r;
  r.t_stat = t;
  r.p_value = p;
  return r;
}

stats::AnovaRow effect(std::string source, double ss, double f, double p) {
  return {std::move(source), ss, 1.0, f, p};
}

Session session(int i, Condition c, int pre, int post, int q3 = 4) {
  Session s;
  s.session_id = "s" + std::to_string(100 + i);
  s.participant_id = "p" + std::to_string(i);
  s.condition = c;
  s.phase = Phase::Survey;
  s.completed = true;
  s.pre_score = pre;
  s.post_score = post;
  s.max_score = 15;
  s.attention = {{"pre", true}, {"post", true}, {"survey", true}};
  s.survey = {{"Q1", 5}, {"Q3", q3}};
  return s;
}

}  // namespace

TEST_CASE("table 1 rows from published statistics") {
  const std::vector<TTestRow> rows{{"Human Feedback", tt(-2.83, 0.01010)},
                                   {"Relevant Slide Page", tt(-5.00, 0.00005)},
                                   {"AI Feedback", tt(-4.58, 0.00013)},
                                   {"Combined (Slide + AI Feedback)", tt(-3.99, 0.00067)}};
  CHECK(render_table1_tex(rows) == golden("table1.tex"));
}

TEST_CASE("table 2 rows from published statistics") {
  stats::AnovaTable t;
  t.rows = {effect("C(Feedback Type)", 0.0234, 1.0900, 0.298), effect("C(Slide)", 0.0114, 0.5350, 0.466),
            effect("C(Feedback Type):C(Slide)", 0.0015, 0.0687, 0.794), {"Residual", 1.95, 91.0, {}, {}}};
  CHECK(render_table2_tex(t) == golden("table2.tex"));
}

TEST_CASE("fig 3a ordering from published means") {
  std::vector<GainRow> rows{{"Human Feedback", 0.0949, {}, {}, {}},
                            {"Relevant Slide Page", 0.125, {}, {}, {}},
                            {"AI Feedback", 0.134, {}, {}, {}},
                            {"Combined (Slide + AI Feedback)", 0.148, {}, {}, {}}};
  sort_fig3a(rows);
  CHECK(render_fig3a_tex(rows) == golden("fig3a.tex"));
}

TEST_CASE("condition labels") {
  CHECK(condition_label(Condition::HumanText) == "Human Feedback");
  CHECK(condition_label(Condition::SlideOnly) == "Relevant Slide Page");
  CHECK(condition_label(Condition::AiText) == "AI Feedback");
  CHECK(condition_label(Condition::Combined) == "Combined (Slide + AI Feedback)");
}

TEST_CASE("analysis pipeline over sessions") {
  std::mt19937_64 rng(11);
  std::vector<Session> sessions;
  const std::map<Condition, int> boost{{Condition::HumanText, 1},
                                       {Condition::SlideOnly, 2},
                                       {Condition::AiText, 3},
                                       {Condition::Combined, 4}};
  int i = 0;
  for (auto c : kAllConditions) {
    for (int k = 0; k < 6; ++k, ++i) {
      const int pre = std::uniform_int_distribution<int>(0, 10)(rng);
      const int noise = k % 3 - 1;
      sessions.push_back(session(i, c, pre, pre + boost.at(c) + noise, k % 2 ? 5 : 2));
    }
  }
  auto dropped = session(i++, Condition::Combined, 0, 15);
  dropped.attention["post"] = false;
  sessions.push_back(dropped);
  auto unfinished = session(i++, Condition::HumanText, 0, 15);
  unfinished.completed = false;
  sessions.push_back(unfinished);

  const auto rep = analyze(sessions);
  CHECK(rep.sessions_total == 26);
  CHECK(rep.sessions_retained == 24);
  for (auto c : kAllConditions) CHECK(rep.group_sizes.at(c) == 6);

  // Gains are (post - pre)/max; noise sums to 0 per condition.
  REQUIRE(rep.fig3a.size() == 4);
  CHECK(rep.fig3a[0].label == "Combined (Slide + AI Feedback)");
  CHECK(rep.fig3a[0].mean == Catch::Approx(4.0 / 15).margin(1e-12));
  CHECK(rep.fig3a[3].label == "Human Feedback");
  CHECK(rep.fig3a[3].mean == Catch::Approx(1.0 / 15).margin(1e-12));

  for (std::size_t r = 0; r < 4; ++r) {
    const auto c = kAllConditions[r];
    std::vector<double> pre, post, gains;
    for (const auto& s : filter_sessions(sessions)) {
      if (s.condition != c) continue;
      pre.push_back(*s.pre_score);
      post.push_back(*s.post_score);
      gains.push_back((*s.post_score - *s.pre_score) / 15.0);
    }
    const auto want = oracle::paired_t(pre, post);
    REQUIRE(rep.table1[r].result);
    CHECK(rep.table1[r].result->t_stat == Catch::Approx(want.t).epsilon(1e-12));
    CHECK(rep.table1[r].result->p_value == Catch::Approx(want.p).epsilon(1e-9));
    const auto row = std::find_if(rep.fig3a.begin(), rep.fig3a.end(),
                                  [&](const GainRow& g) { return g.label == condition_label(c); });
    const auto ci = oracle::ci95(gains);
    CHECK(*row->lower == Catch::Approx(ci.lower).margin(1e-12));
    CHECK(*row->upper == Catch::Approx(ci.upper).margin(1e-12));
  }

  REQUIRE(rep.table2);
  CHECK(rep.table2->rows.size() == 4);
  CHECK(rep.table2->row("Residual").df == 20);
  REQUIRE(rep.pretest_anova);
  CHECK(rep.pretest_anova->df_between == 3);

  REQUIRE(rep.table3.size() == 2);
  CHECK(rep.table3[1].label == "Q3");
  for (auto c : kAllConditions) CHECK(*rep.table3[1].pct_agree.at(c) == Catch::Approx(50.0));

  SECTION("renderers are deterministic") {
    std::vector<Session> shuffled = sessions;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto again = analyze(shuffled);
    CHECK(render_markdown(again) == render_markdown(rep));
    CHECK(render_tex(again) == render_tex(rep));
    CHECK(render_csv(again) == render_csv(rep));
  }

  SECTION("csv is long format") {
    std::istringstream in(render_csv(rep));
    std::string line;
    std::getline(in, line);
    CHECK(line == "section,label,metric,value");
    int rows = 0;
    while (std::getline(in, line)) {
      ++rows;
      CHECK(std::count(line.begin(), line.end(), ',') >= 3);
    }
    CHECK(rows > 20);
  }

  SECTION("survey texts label the likert rows and drop the attention item") {
    const std::vector<SurveyItem> survey{{"Q1", "Feedback was helpful.", std::nullopt},
                                         {"Q3", "Feedback was easy to understand.", std::nullopt},
                                         {"Q12", "Select 1", 1}};
    const auto labelled = analyze(sessions, survey);
    REQUIRE(labelled.table3.size() == 2);
    CHECK(labelled.table3[1].label == "Q3. Feedback was easy to understand.");
  }
}

TEST_CASE("undefined statistics become notes") {
  std::vector<Session> sessions{session(0, Condition::HumanText, 1, 3)};
  const auto rep = analyze(sessions);
  CHECK_FALSE(rep.table1[0].result);
  CHECK_FALSE(rep.table2);
  CHECK_FALSE(rep.notes.empty());
  CHECK(render_markdown(rep).find("undefined") != std::string::npos);
}
