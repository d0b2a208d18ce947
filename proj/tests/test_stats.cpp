#include <doctest.h>

#include <optional>
#include <vector>

#include "sculpt/errors.hpp"
#include "sculpt/stats.hpp"

using namespace sculpt;

namespace {
const std::optional<int> NA = std::nullopt;
}

TEST_CASE("krippendorff ordinal alpha on the four-rater worked example") {
  // 4 raters x 12 units with missing values; the nominal/interval variants of
  // this fixture are the published 0.743 / 0.849 reference values, which pins
  // the ordinal result below.
  RatingMatrix m;
  m.rows = {
      {1, 2, 3, 3, 2, 1, 4, 1, 2, NA, NA, NA},
      {1, 2, 3, 3, 2, 2, 4, 1, 2, 5, NA, 3},
      {NA, 3, 3, 3, 2, 3, 4, 2, 2, 5, 1, NA},
      {1, 2, 3, 3, 2, 4, 4, 1, 2, 5, 1, NA},
  };
  CHECK(krippendorff_alpha_ordinal(m) ==
        doctest::Approx(0.8153875037548814).epsilon(1e-3));
  // frozen to full precision as a regression guard
  CHECK(krippendorff_alpha_ordinal(m) ==
        doctest::Approx(0.8153875037548814).epsilon(1e-12));
}

TEST_CASE("krippendorff ordinal alpha on a second fixture") {
  RatingMatrix m;
  m.rows = {
      {2, 3, 1, 1, 2, 3},
      {2, 3, 1, 1, 2, 2},
      {NA, 3, 1, 2, 2, 3},
  };
  CHECK(krippendorff_alpha_ordinal(m) ==
        doctest::Approx(0.8117647058823529).epsilon(1e-12));
}

TEST_CASE("krippendorff perfect agreement is exactly 1") {
  RatingMatrix m;
  m.rows = {{1, 2, 3, 4}, {1, 2, 3, 4}, {1, 2, 3, 4}};
  CHECK(krippendorff_alpha_ordinal(m) == 1.0);

  // degenerate case: a single repeated value has zero expected disagreement
  RatingMatrix c;
  c.rows = {{2, 2, 2}, {2, 2, 2}};
  CHECK(krippendorff_alpha_ordinal(c) == 1.0);
}

TEST_CASE("krippendorff single pairable unit with unequal extremes") {
  RatingMatrix m;
  m.rows = {{1, NA}, {2, NA}};
  CHECK(krippendorff_alpha_ordinal(m) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("krippendorff undefined on fewer than two pairable values") {
  RatingMatrix empty;
  CHECK_THROWS_AS(krippendorff_alpha_ordinal(empty), UndefinedStatistic);

  RatingMatrix lone;
  lone.rows = {{1, NA}, {NA, 2}};  // no unit has two ratings
  CHECK_THROWS_AS(krippendorff_alpha_ordinal(lone), UndefinedStatistic);
}

TEST_CASE("welch t against an independent reference") {
  std::vector<double> a = {14.2, 15.1, 13.8, 14.9, 15.3, 14.4, 15.0, 13.9};
  std::vector<double> b = {13.1, 13.8, 12.9, 13.5, 13.2, 13.9, 13.3};
  WelchResult w = welch_t(a, b);
  CHECK(w.t == doctest::Approx(4.831502302310).epsilon(1e-9));
  CHECK(w.dof == doctest::Approx(12.001327768499).epsilon(1e-9));
  CHECK(w.p == doctest::Approx(4.108062655953e-04).epsilon(1e-9));
}

TEST_CASE("welch t antisymmetry is exact") {
  std::vector<double> a = {1.0, 2.5, 3.1, 2.2, 1.7};
  std::vector<double> b = {2.0, 2.9, 3.6, 4.1};
  WelchResult ab = welch_t(a, b);
  WelchResult ba = welch_t(b, a);
  CHECK(ab.t == -ba.t);
  CHECK(ab.dof == ba.dof);
  CHECK(ab.p == ba.p);
}

TEST_CASE("welch t on identical zero-variance samples") {
  std::vector<double> a = {3.0, 3.0, 3.0};
  std::vector<double> b = {3.0, 3.0, 3.0, 3.0};
  WelchResult w = welch_t(a, b);
  CHECK(w.t == 0.0);
  CHECK(w.p == 1.0);
}

TEST_CASE("incomplete beta endpoints and symmetry") {
  CHECK(incomplete_beta(2.0, 3.0, 0.0) == 0.0);
  CHECK(incomplete_beta(2.0, 3.0, 1.0) == 1.0);
  // I_x(a,b) = 1 - I_{1-x}(b,a)
  CHECK(incomplete_beta(2.5, 1.5, 0.3) ==
        doctest::Approx(1.0 - incomplete_beta(1.5, 2.5, 0.7)).epsilon(1e-12));
  // I_x(1,1) = x
  CHECK(incomplete_beta(1.0, 1.0, 0.42) == doctest::Approx(0.42).epsilon(1e-12));
}
