#pragma once

#include <optional>
#include <vector>

#include "sonimon/analysis.hpp"

// Independent reference implementations used to check the library.
namespace testkit {

// Phi from the positive-term erf series, in long double.
double phi_series(double x);
// Bisection on phi_series.
double probit_bisect(double p);

// d' from the oracle probit.
double d_prime_oracle(double H, double FA);

// 1 ms tick replay of a checkbox history. Event and onset times must be whole
// milliseconds. Returns the outcome and, for hits, the annotation time in ms.
struct OracleOutcome {
  sonimon::Outcome outcome;
  std::optional<long> annotation_ms;
};
OracleOutcome classify_by_replay(std::optional<long> onset_ms, long duration_ms,
                                 const std::vector<sonimon::AnnotationEvent>& events);

// Textbook one-way ANOVA with p from Simpson integration of the F density.
struct OracleAnova {
  double F;
  double p;
};
OracleAnova anova_brute_force(const std::vector<std::vector<double>>& groups);

// Pooled two-sample t statistic.
double two_sample_t(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace testkit
