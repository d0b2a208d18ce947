#pragma once

#include <optional>
#include <vector>

namespace sculpt {

// Raters x items ordinal ratings with missing-value support. Scale values are
// positive small integers (1..5 in the survey protocol, but any ordinal range
// works).
struct RatingMatrix {
  std::vector<std::vector<std::optional<int>>> rows;  // one row per rater

  std::size_t raters() const { return rows.size(); }
  std::size_t items() const { return rows.empty() ? 0 : rows.front().size(); }
};

// Krippendorff's alpha with ordinal difference weights and missing-data
// handling. Returns 1.0 for perfect agreement (including the degenerate
// zero-expected-disagreement case). Throws UndefinedStatistic when fewer than
// two pairable values exist.
double krippendorff_alpha_ordinal(const RatingMatrix& ratings);

struct WelchResult {
  double t = 0.0;
  double p = 1.0;
  double dof = 0.0;
};

// Unequal-variance t statistic with Welch-Satterthwaite degrees of freedom
// and a two-sided p-value from the t CDF.
WelchResult welch_t(const std::vector<double>& a, const std::vector<double>& b);

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

}  // namespace sculpt
