#pragma once

namespace sir::stats {

/// Regularized incomplete beta I_x(a, b), continued fraction (modified Lentz).
double incomplete_beta(double a, double b, double x);

double student_t_cdf(double t, double df);
/// P(|T| >= |t|).
double student_t_two_tailed_p(double t, double df);
/// Inverse CDF of Student's t; p in (0, 1).
double student_t_quantile(double p, double df);

/// Upper tail P(F >= f) of the F(d1, d2) distribution.
double f_sf(double f, double d1, double d2);

}  // namespace sir::stats
