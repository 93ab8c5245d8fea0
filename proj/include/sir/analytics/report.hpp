#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sir/analytics/stats.hpp"
#include "sir/experiment.hpp"

namespace sir::analytics {

/// Row labels used in the learning-gain tables ("Human Feedback", ...).
std::string_view condition_label(Condition c);
/// Column labels of the Likert table ("Human Feedback", "Slide", ...).
std::string_view condition_column(Condition c);

struct GainRecord {
  std::string session_id;
  Condition condition = Condition::HumanText;
  int pre = 0;
  int post = 0;
  int max_score = 0;
  double gain = 0;
};

/// Gains of retained sessions (completed, all attention checks passed).
std::vector<GainRecord> gain_records(std::span<const Session> sessions);

struct TTestRow {
  std::string label;
  std::optional<stats::TTestResult> result;  // absent when the test is undefined
};

struct GainRow {
  std::string label;
  double mean = 0;
  std::optional<double> lower;
  std::optional<double> upper;
  std::optional<int> n;
};

struct LikertRow {
  std::string label;  // "Q3. Feedback was easy to understand." or the bare item id
  std::map<Condition, std::optional<double>> pct_agree;
};

struct AlphaRow {
  std::string label;
  std::optional<double> alpha;
};

struct StudyReport {
  std::size_t sessions_total = 0;
  std::size_t sessions_retained = 0;
  std::map<Condition, int> group_sizes;
  std::vector<TTestRow> table1;
  std::optional<stats::AnovaTable> table2;
  std::optional<stats::OneWayResult> pretest_anova;
  std::vector<GainRow> fig3a;  // sorted by mean, highest first
  std::vector<LikertRow> table3;
  std::vector<AlphaRow> alphas;
  std::vector<std::string> notes;
};

/// Runs the full pipeline over exported sessions. `survey` (optional) gives
/// item texts for row labels and marks the attention item to exclude.
StudyReport analyze(std::span<const Session> sessions, std::span<const SurveyItem> survey = {});

/// Sorts gain rows highest mean first (ties keep input order).
void sort_fig3a(std::vector<GainRow>& rows);

// LaTeX tabular rows, one per line, each ending in " \\".
std::string render_table1_tex(std::span<const TTestRow> rows);
std::string render_table2_tex(const stats::AnovaTable& table);
std::string render_fig3a_tex(std::span<const GainRow> rows);
std::string render_table3_tex(std::span<const LikertRow> rows);

std::string render_markdown(const StudyReport& report);
std::string render_tex(const StudyReport& report);
/// Long format: section,label,metric,value
std::string render_csv(const StudyReport& report);

}  // namespace sir::analytics
