#include "sir/analytics/stats.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "sir/analytics/distributions.hpp"
#include "sir/error.hpp"

namespace sir::stats {

double mean(std::span<const double> v) {
  if (v.empty()) throw Error(Errc::TooFewSamples, "mean of an empty sample");
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v) {
  if (v.size() < 2) throw Error(Errc::TooFewSamples, "variance needs at least 2 values");
  const double m = mean(v);
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  return ss / static_cast<double>(v.size() - 1);
}

double learning_gain(int pre, int post, int max_score) {
  if (max_score <= 0 || pre < 0 || post < 0 || pre > max_score || post > max_score) {
    throw Error(Errc::OutOfRange, "scores must lie in [0, max] with max > 0");
  }
  return static_cast<double>(post - pre) / max_score;
}

TTestResult paired_ttest(std::span<const double> pre, std::span<const double> post) {
  if (pre.size() != post.size()) throw Error(Errc::InvalidArgument, "paired samples differ in length");
  if (pre.size() < 2) throw Error(Errc::TooFewSamples, "paired t-test needs n >= 2");
  std::vector<double> d(pre.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = post[i] - pre[i];
  if (std::all_of(d.begin(), d.end(), [&](double x) { return x == d.front(); })) {
    throw Error(Errc::DegenerateData, "all paired differences are equal");
  }
  const double sd = std::sqrt(sample_variance(d));
  if (!(sd > 0)) throw Error(Errc::DegenerateData, "zero standard deviation of differences");
  TTestResult r;
  r.n = static_cast<int>(d.size());
  r.df = r.n - 1;
  r.mean_diff = mean(d);
  r.t_stat = r.mean_diff / (sd / std::sqrt(static_cast<double>(r.n)));
  r.p_value = student_t_two_tailed_p(r.t_stat, r.df);
  return r;
}

const AnovaRow& AnovaTable::row(std::string_view source) const {
  for (const auto& r : rows) {
    if (r.source == source) return r;
  }
  throw Error(Errc::NotFound, "ANOVA row '" + std::string(source) + "'");
}

namespace {

// Residual sum of squares of y regressed on the given 0/1 columns plus intercept.
double rss(const Eigen::VectorXd& y, const std::vector<Eigen::VectorXd>& columns) {
  Eigen::MatrixXd X(y.size(), static_cast<Eigen::Index>(columns.size()) + 1);
  X.col(0).setOnes();
  for (std::size_t c = 0; c < columns.size(); ++c) X.col(static_cast<Eigen::Index>(c) + 1) = columns[c];
  const Eigen::VectorXd beta = X.colPivHouseholderQr().solve(y);
  return (y - X * beta).squaredNorm();
}

}  // namespace

AnovaTable two_way_anova(std::span<const FactorialObservation> obs, const TwoWayLabels& labels) {
  int cells[2][2] = {{0, 0}, {0, 0}};
  for (const auto& o : obs) ++cells[o.a][o.b];
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      if (cells[a][b] == 0) {
        throw Error(Errc::EmptyCell, "cell (" + std::to_string(a) + "," + std::to_string(b) + ") is empty");
      }
    }
  }
  const auto n = static_cast<Eigen::Index>(obs.size());
  const double df_res = static_cast<double>(n) - 4.0;
  if (df_res < 1) throw Error(Errc::DegenerateData, "no residual degrees of freedom");

  // Center y so the fits are well conditioned; sums of squares are unchanged.
  double ybar = 0;
  for (const auto& o : obs) ybar += o.value;
  ybar /= static_cast<double>(n);
  Eigen::VectorXd y(n), a(n), b(n), ab(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& o = obs[static_cast<std::size_t>(i)];
    y[i] = o.value - ybar;
    a[i] = o.a;
    b[i] = o.b;
    ab[i] = o.a && o.b;
  }
  // Full-model residual is the within-cell sum of squares; computed directly.
  double cell_sum[2][2] = {{0, 0}, {0, 0}};
  for (Eigen::Index i = 0; i < n; ++i) cell_sum[static_cast<int>(a[i])][static_cast<int>(b[i])] += y[i];
  double ss_res = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int ai = static_cast<int>(a[i]);
    const int bi = static_cast<int>(b[i]);
    const double m = cell_sum[ai][bi] / cells[ai][bi];
    ss_res += (y[i] - m) * (y[i] - m);
  }
  const double rss_ab = rss(y, {a, b});
  const double rss_a = rss(y, {a});
  const double rss_b = rss(y, {b});

  const double ss_a = std::max(0.0, rss_b - rss_ab);
  const double ss_b = std::max(0.0, rss_a - rss_ab);
  const double ss_ab = std::max(0.0, rss_ab - ss_res);
  // Cells with constant values leave only rounding noise in ss_res.
  if (!(ss_res > 1e-12 * y.squaredNorm())) throw Error(Errc::DegenerateData, "zero residual variance");
  const double ms_res = ss_res / df_res;

  AnovaTable table;
  auto effect = [&](std::string name, double ss) {
    const double f = ss / ms_res;
    table.rows.push_back({std::move(name), ss, 1.0, f, f_sf(f, 1.0, df_res)});
  };
  effect(labels.a, ss_a);
  effect(labels.b, ss_b);
  effect(labels.a + ":" + labels.b, ss_ab);
  table.rows.push_back({labels.residual, ss_res, df_res, std::nullopt, std::nullopt});
  return table;
}

OneWayResult one_way_anova(std::span<const std::vector<double>> groups) {
  if (groups.size() < 2) throw Error(Errc::TooFewSamples, "one-way ANOVA needs at least 2 groups");
  double total = 0;
  std::size_t n = 0;
  for (const auto& g : groups) {
    if (g.size() < 2) throw Error(Errc::TooFewSamples, "each group needs at least 2 values");
    for (double x : g) total += x;
    n += g.size();
  }
  const double grand = total / static_cast<double>(n);
  OneWayResult r;
  for (const auto& g : groups) {
    const double m = mean(g);
    r.ss_between += static_cast<double>(g.size()) * (m - grand) * (m - grand);
    for (double x : g) r.ss_within += (x - m) * (x - m);
  }
  r.df_between = static_cast<int>(groups.size()) - 1;
  r.df_within = static_cast<int>(n - groups.size());
  if (!(r.ss_within > 0)) throw Error(Errc::DegenerateData, "zero within-group variance");
  r.f = (r.ss_between / r.df_between) / (r.ss_within / r.df_within);
  r.p = f_sf(r.f, r.df_between, r.df_within);
  return r;
}

MeanCi mean_ci(std::span<const double> values, double level) {
  if (values.size() < 2) throw Error(Errc::TooFewSamples, "confidence interval needs n >= 2");
  if (!(level > 0 && level < 1)) throw Error(Errc::InvalidArgument, "confidence level must be in (0,1)");
  MeanCi r;
  r.n = static_cast<int>(values.size());
  r.mean = mean(values);
  r.sd = std::sqrt(sample_variance(values));
  const double t = student_t_quantile(0.5 + level / 2.0, r.n - 1);
  r.half_width = t * r.sd / std::sqrt(static_cast<double>(r.n));
  return r;
}

double likert_pct_agree(std::span<const int> values) {
  if (values.empty()) throw Error(Errc::TooFewSamples, "no Likert responses");
  std::size_t agree = 0;
  for (int v : values) {
    if (v < 1 || v > 5) throw Error(Errc::OutOfRange, "Likert value " + std::to_string(v));
    agree += v >= 4;
  }
  return 100.0 * static_cast<double>(agree) / static_cast<double>(values.size());
}

double cronbach_alpha(std::span<const std::vector<double>> rows) {
  if (rows.size() < 2) throw Error(Errc::TooFewSamples, "alpha needs at least 2 participants");
  const std::size_t k = rows.front().size();
  if (k < 2) throw Error(Errc::TooFewSamples, "alpha needs at least 2 items");
  for (const auto& r : rows) {
    if (r.size() != k) throw Error(Errc::InvalidArgument, "ragged item matrix");
  }
  double item_var_sum = 0;
  std::vector<double> column(rows.size());
  std::vector<double> totals(rows.size(), 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      column[i] = rows[i][j];
      totals[i] += rows[i][j];
    }
    item_var_sum += sample_variance(column);
  }
  const double total_var = sample_variance(totals);
  if (!(total_var > 0)) throw Error(Errc::DegenerateData, "zero variance of total scores");
  const double kd = static_cast<double>(k);
  return kd / (kd - 1.0) * (1.0 - item_var_sum / total_var);
}

}  // namespace sir::stats
