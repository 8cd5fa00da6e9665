#pragma once

// Special functions shared by the estimators. All throw DomainError outside their domain.

namespace maskwatch::special {

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);

/// Regularized incomplete beta I_x(a, b).
double beta_inc(double a, double b, double x);

double normal_cdf(double z);

/// Inverse of the standard normal CDF, 0 < p < 1.
double normal_quantile(double p);

/// Two-sided tail probability P(|T| >= |t|) for Student's t with `df` degrees of freedom.
double student_t_two_sided(double t, double df);

} // namespace maskwatch::special
