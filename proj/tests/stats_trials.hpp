#pragma once

// Randomized comparisons of the library statistics against the oracles.
// Shared by the unit suite and the acceptance binary.

#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sir/analytics/stats.hpp"

namespace oracle {

struct TrialReport {
  int checks = 0;
  int failures = 0;
  std::string first_failure;
};

inline bool close(double got, double want, double tol = 1e-9) {
  return std::abs(got - want) <= tol * std::max(1.0, std::abs(want));
}

class TrialRunner {
 public:
  explicit TrialRunner(std::uint64_t seed) : rng_(seed) {}

  TrialReport run(int trials) {
    for (int i = 0; i < trials; ++i) {
      trial_ = i;
      ttest();
      oneway();
      twoway();
      alpha();
      ci();
    }
    return report_;
  }

 private:
  int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

  void expect(bool ok, const char* what, double got, double want) {
    ++report_.checks;
    if (ok) return;
    if (++report_.failures == 1) {
      std::ostringstream os;
      os.precision(17);
      os << "trial " << trial_ << " " << what << ": got " << got << " want " << want;
      report_.first_failure = os.str();
    }
  }
  void expect_close(const char* what, double got, double want) { expect(close(got, want), what, got, want); }

  void ttest() {
    const int n = uniform_int(2, 50);
    std::vector<double> pre(n), post(n);
    for (int i = 0; i < n; ++i) {
      pre[i] = uniform_int(0, 15);
      post[i] = uniform_int(0, 15);
    }
    post[0] = pre[0] + 1;
    post[1] = pre[1];  // differences are never all equal
    const auto got = sir::stats::paired_ttest(pre, post);
    const auto want = paired_t(pre, post);
    expect_close("t", got.t_stat, want.t);
    expect_close("t p", got.p_value, want.p);
    expect(got.df == want.df, "t df", got.df, want.df);
  }

  void oneway() {
    const int k = uniform_int(2, 5);
    std::vector<std::vector<double>> groups(k);
    for (auto& g : groups) {
      const int n = uniform_int(2, 10);
      for (int i = 0; i < n; ++i) g.push_back(uniform(-1, 1));
    }
    const auto got = sir::stats::one_way_anova(groups);
    const auto want = one_way(groups);
    expect_close("one-way F", got.f, want.f);
    expect_close("one-way p", got.p, want.p);
    expect(got.df_between == want.df_between && got.df_within == want.df_within, "one-way df",
           got.df_within, want.df_within);
  }

  void twoway() {
    std::vector<sir::stats::FactorialObservation> obs;
    std::vector<double> y;
    std::vector<int> a, b;
    const double effect_a = uniform(-0.5, 0.5), effect_b = uniform(-0.5, 0.5), effect_ab = uniform(-0.5, 0.5);
    for (int ia = 0; ia < 2; ++ia) {
      for (int ib = 0; ib < 2; ++ib) {
        const int n = uniform_int(2, 12);
        for (int i = 0; i < n; ++i) {
          const double v = ia * effect_a + ib * effect_b + ia * ib * effect_ab + uniform(-1, 1);
          obs.push_back({v, ia == 1, ib == 1});
          y.push_back(v);
          a.push_back(ia);
          b.push_back(ib);
        }
      }
    }
    const auto got = sir::stats::two_way_anova(obs);
    const auto want = two_way(y, a, b);
    const AnovaRow* rows[] = {&want.a, &want.b, &want.ab};
    for (int r = 0; r < 3; ++r) {
      const auto& g = got.rows[r];
      expect_close("two-way SS", g.sum_sq, rows[r]->ss);
      expect_close("two-way F", *g.f, rows[r]->f);
      expect_close("two-way p", *g.p, rows[r]->p);
      expect(g.df == 1, "two-way effect df", g.df, 1);
    }
    expect_close("two-way SS residual", got.rows[3].sum_sq, want.ss_res);
    expect(got.rows[3].df == want.df_res, "two-way df residual", got.rows[3].df, want.df_res);
  }

  void alpha() {
    const int n = uniform_int(2, 50), k = uniform_int(2, 11);
    std::vector<std::vector<double>> rows(n, std::vector<double>(k));
    for (int i = 0; i < n; ++i) {
      const int base = uniform_int(1, 5);
      for (int j = 0; j < k; ++j) rows[i][j] = std::clamp(base + uniform_int(-1, 1), 1, 5);
    }
    rows[0].assign(k, 1.0);
    rows[1].assign(k, 5.0);  // nonzero variance of totals
    expect_close("alpha", sir::stats::cronbach_alpha(rows), cronbach(rows));
  }

  void ci() {
    const int n = uniform_int(2, 50);
    std::vector<double> v(n);
    for (auto& x : v) x = uniform(-1, 1);
    const auto got = sir::stats::mean_ci(v);
    const auto want = ci95(v);
    expect_close("ci mean", got.mean, want.mean);
    expect_close("ci lower", got.lower(), want.lower);
    expect_close("ci upper", got.upper(), want.upper);
  }

  std::mt19937_64 rng_;
  int trial_ = 0;
  TrialReport report_;
};

}  // namespace oracle
