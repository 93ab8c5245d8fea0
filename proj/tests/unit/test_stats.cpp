#include <catch_amalgamated.hpp>

#include "sir/analytics/distributions.hpp"
#include "sir/analytics/stats.hpp"
#include "sir/error.hpp"
#include "stats_trials.hpp"

using namespace sir;
using namespace sir::stats;
using Catch::Approx;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return Errc::Io;
}

std::vector<FactorialObservation> cells(double m00, double m01, double m10, double m11,
                                        std::vector<double> noise) {
  std::vector<FactorialObservation> out;
  const double means[2][2] = {{m00, m01}, {m10, m11}};
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      for (double e : noise) out.push_back({means[a][b] + e, a == 1, b == 1});
    }
  }
  return out;
}

}  // namespace

TEST_CASE("learning gain") {
  CHECK(learning_gain(10, 10, 15) == 0.0);
  CHECK(learning_gain(10, 13, 15) == Approx(0.2).margin(1e-15));
  CHECK(learning_gain(15, 0, 15) == -1.0);
  CHECK(code_of([] { learning_gain(16, 0, 15); }) == Errc::OutOfRange);
  CHECK(code_of([] { learning_gain(0, -1, 15); }) == Errc::OutOfRange);
  CHECK(code_of([] { learning_gain(0, 0, 0); }) == Errc::OutOfRange);
}

TEST_CASE("paired t-test worked examples") {
  const std::vector<double> pre{1, 2, 3}, post{2, 4, 6};
  const auto r = paired_ttest(pre, post);
  CHECK(r.t_stat == Approx(3.4641).margin(1e-4));
  CHECK(r.df == 2);
  CHECK(r.n == 3);
  CHECK(r.p_value == Approx(0.0742).margin(1e-3));
  CHECK(r.mean_diff == Approx(2.0));

  const std::vector<double> a{0, 1}, b{1, 0};
  const auto sym = paired_ttest(a, b);
  CHECK(sym.t_stat == 0.0);
  CHECK(sym.p_value == Approx(1.0).margin(1e-12));

  // The sign of t flips with the direction; p does not.
  const auto rev = paired_ttest(post, pre);
  CHECK(rev.t_stat == Approx(-r.t_stat));
  CHECK(rev.p_value == Approx(r.p_value).epsilon(1e-12));

  const std::vector<double> one{1};
  CHECK(code_of([&] { paired_ttest(one, one); }) == Errc::TooFewSamples);
  const std::vector<double> c{1, 2, 3}, d{2, 3, 4};
  CHECK(code_of([&] { paired_ttest(c, d); }) == Errc::DegenerateData);
}

TEST_CASE("two-way ANOVA worked examples") {
  const auto t = two_way_anova(cells(1, 1, 3, 3, {-1, 0, 1}));
  CHECK(t.rows.size() == 4);
  CHECK(t.row("C(Feedback Type)").sum_sq == Approx(12.0).margin(1e-9));
  CHECK(t.row("Residual").sum_sq == Approx(8.0).margin(1e-9));
  CHECK(t.row("Residual").df == 8);
  CHECK(*t.row("C(Feedback Type)").f == Approx(12.0).margin(1e-9));
  CHECK(*t.row("C(Slide)").f == Approx(0.0).margin(1e-9));
  CHECK(*t.row("C(Feedback Type):C(Slide)").f == Approx(0.0).margin(1e-9));
  CHECK_FALSE(t.row("Residual").f);
  CHECK_FALSE(t.row("Residual").p);

  const auto null = two_way_anova(cells(2, 2, 2, 2, {-1, 0, 1, 0.5}));
  for (int r = 0; r < 3; ++r) CHECK(*null.rows[r].f == Approx(0.0).margin(1e-9));

  auto missing = cells(1, 1, 3, 3, {-1, 0, 1});
  std::erase_if(missing, [](const auto& o) { return o.a && o.b; });
  CHECK(code_of([&] { two_way_anova(missing); }) == Errc::EmptyCell);
  CHECK(code_of([] { two_way_anova(cells(1, 2, 3, 4, {0})); }) == Errc::DegenerateData);
}

TEST_CASE("two-way ANOVA is invariant to observation order and shifts") {
  auto obs = cells(0.1, 0.3, -0.2, 0.5, {-0.3, 0.05, 0.2, 0.4});
  obs.pop_back();
  obs.pop_back();
  const auto base = two_way_anova(obs);
  std::reverse(obs.begin(), obs.end());
  auto shifted = obs;
  for (auto& o : shifted) o.value += 7.0;
  for (const auto* t : {&obs, &shifted}) {
    const auto other = two_way_anova(*t);
    for (int r = 0; r < 4; ++r) CHECK(other.rows[r].sum_sq == Approx(base.rows[r].sum_sq).margin(1e-9));
  }
}

TEST_CASE("one-way ANOVA worked examples") {
  const std::vector<std::vector<double>> g{{1, 2, 3}, {4, 5, 6}};
  const auto r = one_way_anova(g);
  CHECK(r.f == Approx(13.5).margin(1e-9));
  CHECK(r.df_between == 1);
  CHECK(r.df_within == 4);
  CHECK(r.ss_between == Approx(13.5));
  CHECK(r.ss_within == Approx(4.0));
  CHECK(r.p == Approx(0.0213).margin(1e-3));

  const std::vector<std::vector<double>> same{{1, 2, 3}, {1, 2, 3}};
  CHECK(one_way_anova(same).f == Approx(0.0).margin(1e-12));
  const std::vector<std::vector<double>> unequal{{1, 3}, {0, 2, 4}, {2, 2, 1, 3}, {-1, 5, 2, 2, 2}};
  CHECK(one_way_anova(unequal).f == Approx(0.0).margin(1e-12));
}

TEST_CASE("confidence interval") {
  const std::vector<double> v{0.1, 0.2, 0.3};
  const auto ci = mean_ci(v);
  CHECK(ci.mean == Approx(0.2));
  CHECK(ci.sd == Approx(0.1));
  CHECK(ci.half_width == Approx(0.2484).margin(1e-4));
  const std::vector<double> flat{0.25, 0.25, 0.25};
  CHECK(mean_ci(flat).half_width == 0.0);
  const std::vector<double> one{1};
  CHECK(code_of([&] { mean_ci(one); }) == Errc::TooFewSamples);
}

TEST_CASE("likert proportion agree") {
  CHECK(likert_pct_agree(std::vector<int>{5, 5, 4, 4}) == 100.0);
  CHECK(likert_pct_agree(std::vector<int>{1, 2, 3}) == 0.0);
  std::vector<int> v(22, 5);
  v[0] = 2;
  CHECK(likert_pct_agree(v) == Approx(95.45).margin(0.01));
  CHECK(code_of([] { likert_pct_agree(std::vector<int>{0, 4}); }) == Errc::OutOfRange);
}

TEST_CASE("cronbach alpha") {
  std::vector<std::vector<double>> copies{{1, 1, 1}, {3, 3, 3}, {5, 5, 5}, {2, 2, 2}};
  CHECK(cronbach_alpha(copies) == Approx(1.0).margin(1e-12));
  std::vector<std::vector<double>> uncorrelated{{2, 2}, {2, 0}, {0, 2}, {0, 0}};
  CHECK(cronbach_alpha(uncorrelated) == Approx(0.0).margin(1e-9));
  std::vector<std::vector<double>> fixture{{4, 5, 4}, {3, 3, 4}, {5, 5, 5}, {2, 3, 2}, {4, 4, 5}};
  CHECK(cronbach_alpha(fixture) == Approx(oracle::cronbach(fixture)).margin(1e-9));
  std::vector<std::vector<double>> flat{{3, 3}, {3, 3}};
  CHECK(code_of([&] { cronbach_alpha(flat); }) == Errc::DegenerateData);
}

TEST_CASE("distributions against closed forms") {
  // t with 1 df is Cauchy; t with 2 df has an algebraic CDF.
  for (double t : {-3.0, -0.5, 0.0, 0.7, 2.0, 10.0}) {
    CHECK(student_t_cdf(t, 1) == Approx(0.5 + std::atan(t) / M_PI).margin(1e-12));
    CHECK(student_t_cdf(t, 2) == Approx(0.5 + t / (2 * std::sqrt(2 + t * t))).margin(1e-12));
  }
  CHECK(student_t_quantile(0.975, 2) == Approx(4.302652729911275).margin(1e-9));
  // F(2, d2) has upper tail (1 + 2f/d2)^(-d2/2).
  for (double f : {0.1, 1.0, 3.5}) CHECK(f_sf(f, 2, 6) == Approx(std::pow(1 + 2 * f / 6, -3)).margin(1e-12));
  CHECK(incomplete_beta(2, 3, 0) == 0.0);
  CHECK(incomplete_beta(2, 3, 1) == 1.0);
}

TEST_CASE("randomized oracle comparisons") {
  oracle::TrialRunner runner(20240917);
  const auto report = runner.run(300);
  INFO(report.first_failure);
  CHECK(report.failures == 0);
  CHECK(report.checks > 300 * 20);
}
