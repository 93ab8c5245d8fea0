#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sir::stats {

/// (post - pre) / max. Throws OutOfRange unless 0 <= pre, post <= max and max > 0.
double learning_gain(int pre, int post, int max_score);

struct TTestResult {
  double t_stat = 0;
  int df = 0;
  double p_value = 1;
  int n = 0;
  double mean_diff = 0;  // mean of post - pre
};

/// Paired two-tailed t-test on d = post - pre, sample sd (n - 1).
/// Throws TooFewSamples (n < 2), DegenerateData (all differences equal).
TTestResult paired_ttest(std::span<const double> pre, std::span<const double> post);

struct AnovaRow {
  std::string source;
  double sum_sq = 0;
  double df = 0;
  std::optional<double> f;  // absent on the residual row
  std::optional<double> p;
};

struct AnovaTable {
  std::vector<AnovaRow> rows;
  const AnovaRow& row(std::string_view source) const;
};

struct FactorialObservation {
  double value = 0;
  bool a = false;  // first factor level
  bool b = false;  // second factor level
};

struct TwoWayLabels {
  std::string a = "C(Feedback Type)";
  std::string b = "C(Slide)";
  std::string residual = "Residual";
};

/// Two-way ANOVA with interaction for a 2x2 design using Type II sums of
/// squares (each main effect adjusted for the other, interaction adjusted
/// for both). Rows: A, B, A:B, Residual. Throws EmptyCell, DegenerateData.
AnovaTable two_way_anova(std::span<const FactorialObservation> obs, const TwoWayLabels& labels = {});

struct OneWayResult {
  double f = 0;
  double p = 1;
  int df_between = 0;
  int df_within = 0;
  double ss_between = 0;
  double ss_within = 0;
};

OneWayResult one_way_anova(std::span<const std::vector<double>> groups);

struct MeanCi {
  double mean = 0;
  double sd = 0;
  int n = 0;
  double half_width = 0;
  double lower() const { return mean - half_width; }
  double upper() const { return mean + half_width; }
};

/// Mean with a t-based interval: mean +/- t(level, n-1) * sd / sqrt(n).
MeanCi mean_ci(std::span<const double> values, double level = 0.95);

/// 100 * share of values >= 4. Throws OutOfRange for values outside 1..5.
double likert_pct_agree(std::span<const int> values);

/// Cronbach's alpha over a participants x items matrix (rows = participants).
double cronbach_alpha(std::span<const std::vector<double>> rows);

double mean(std::span<const double> v);
/// Sample variance (n - 1 denominator).
double sample_variance(std::span<const double> v);

}  // namespace sir::stats
