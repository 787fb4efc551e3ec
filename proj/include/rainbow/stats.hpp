#pragma once

#include <span>

namespace rainbow {

/// Regularized incomplete beta I_x(a, b), a, b > 0, x in [0, 1]. Continued
/// fraction (modified Lentz) converged to a relative 1e-12 or better.
double incomplete_beta(double a, double b, double x);

enum class TTestKind {
  Pooled,  // Student, equal variances
  Welch,
};

struct TTestResult {
  double t = 0.0;
  double p = 1.0;   // two-sided
  double df = 0.0;
};

/// Two-sample independent t-test. Throws std::invalid_argument when either
/// sample has fewer than two values. Zero variance gives p = 1 for equal
/// means and p = 0 (t = +/-inf) otherwise.
TTestResult t_test_independent(std::span<const double> a, std::span<const double> b,
                               TTestKind kind = TTestKind::Pooled);

/// Two-sided survival of Student's t with df degrees of freedom.
double student_t_two_sided_p(double t, double df);

/// P(X >= k) for X ~ Binomial(n, 1/2).
double sign_test_upper_p(int k, int n);

double mean(std::span<const double> xs);

}  // namespace rainbow
