#include <doctest.h>

#include <stdexcept>

#include "sonimon/criteria.hpp"

using namespace sonimon;

TEST_CASE("default registry holds the five monitored criteria") {
  const auto& reg = default_registry();
  REQUIRE(reg.size() == 5);
  CHECK(criterion_spec(CriterionId::WpdWidth).nominal == 4.0);
  CHECK(criterion_spec(CriterionId::WpdWidth).tol_halfwidth == doctest::Approx(0.4));
  CHECK(criterion_spec(CriterionId::WpdHeight).nominal == 3.0);
  CHECK(criterion_spec(CriterionId::WpdHeight).tol_halfwidth == doctest::Approx(0.3));
  CHECK(criterion_spec(CriterionId::Ph).nominal == kDefaultLayerHeight);
  CHECK(criterion_spec(CriterionId::Ph).tol_halfwidth == 1.5);
  CHECK(criterion_spec(CriterionId::Wpt).nominal == 2000.0);
  CHECK(criterion_spec(CriterionId::Wpt).tol_halfwidth == 200.0);
  CHECK(criterion_spec(CriterionId::Pt).nominal == 600.0);

  int thresholds = 0;
  for (const auto& s : reg) {
    if (s.kind == CriterionKind::Threshold) {
      ++thresholds;
      CHECK(s.id == CriterionId::Pt);
    } else {
      CHECK(s.tol_halfwidth > 0.0);
    }
  }
  CHECK(thresholds == 1);
}

TEST_CASE("criterion names round-trip") {
  for (CriterionId id : kAllCriteria) {
    CHECK(parse_criterion(criterion_name(id)) == id);
    CHECK(parse_criterion(log_key(id)) == id);
  }
  CHECK_THROWS_AS(parse_criterion("WPD"), std::invalid_argument);
}

TEST_CASE("tolerance test is strict at the band edge") {
  CHECK_FALSE(out_of_tolerance(CriterionId::Wpt, 2200.0));
  CHECK(out_of_tolerance(CriterionId::Wpt, 2200.5));
  CHECK(out_of_tolerance(CriterionId::Wpt, 1799.0));
  CHECK_FALSE(out_of_tolerance(CriterionId::Pt, 599.9));
  CHECK(out_of_tolerance(CriterionId::Pt, 600.0));
}

TEST_CASE("criteria fold into four stimulus groups") {
  CHECK(group_of(CriterionId::WpdWidth) == CriterionGroup::Wpd);
  CHECK(group_of(CriterionId::WpdHeight) == CriterionGroup::Wpd);
  CHECK(group_of(CriterionId::Ph) == CriterionGroup::Ph);
  CHECK(group_of(CriterionId::Wpt) == CriterionGroup::Wpt);
  CHECK(group_of(CriterionId::Pt) == CriterionGroup::Pt);
}
