#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <set>

#include "sonimon/process_sim.hpp"

using namespace sonimon;

namespace {

Level height_level() {
  Level l;
  l.id = "h";
  l.seed = 42;
  l.events.push_back({CriterionId::WpdHeight, 5.0, 2.0, 3.0});
  return l;
}

// Straight-line interpolation between two known points.
double interpolate(double t0, double v0, double t1, double v1, double t) {
  return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
}

}  // namespace

TEST_CASE("idle level stays in tolerance everywhere") {
  Level idle;
  idle.id = "idle";
  for (std::uint64_t seed : {0ULL, 1ULL, 99ULL, 123456789ULL}) {
    idle.seed = seed;
    const auto frames = generate_trajectory(idle, 10.0);
    REQUIRE(frames.size() == 300);
    for (std::size_t k = 0; k < frames.size(); ++k) {
      CHECK(frames[k].t == doctest::Approx(k / 10.0));
      for (CriterionId id : kAllCriteria) {
        const auto& spec = criterion_spec(id);
        if (spec.kind == CriterionKind::Band) {
          CHECK(std::abs(frames[k][id] - spec.nominal) <= kIdleJitterFraction * spec.tol_halfwidth + 1e-12);
        } else {
          CHECK(frames[k][id] >= kPtIdleMin);
          CHECK(frames[k][id] <= kPtIdleMax);
        }
      }
    }
    CHECK(tolerance_onset_times(idle, frames).empty());
  }
}

TEST_CASE("frame count is ceil(duration * rate)") {
  Level l;
  l.id = "x";
  l.duration = 2.05;
  CHECK(generate_trajectory(l, 10.0).size() == 21);
  l.duration = 1.0;
  CHECK(generate_trajectory(l, 44.0).size() == 44);
  CHECK_THROWS_AS(generate_trajectory(l, 0.0), std::invalid_argument);
}

TEST_CASE("height ramp reaches nominal + severity * tol at onset + ramp") {
  const auto level = height_level();
  const auto frames = generate_trajectory(level, 10.0);
  CHECK(frames[70][CriterionId::WpdHeight] == doctest::Approx(3.9).epsilon(1e-12));
  for (std::size_t k = 70; k < frames.size(); ++k) CHECK(frames[k][CriterionId::WpdHeight] == doctest::Approx(3.9));

  // Ramp interior follows the line from the last idle value to the target.
  const double pre = frames[49][CriterionId::WpdHeight];
  for (std::size_t k = 50; k <= 70; ++k) {
    const double expect = interpolate(5.0, pre, 7.0, 3.9, frames[k].t);
    CHECK(frames[k][CriterionId::WpdHeight] == doctest::Approx(expect).epsilon(1e-9));
  }
}

TEST_CASE("tolerance onset of the height ramp is the analytic crossing") {
  const auto level = height_level();
  const auto frames = generate_trajectory(level, 10.0);
  const auto onsets = tolerance_onset_times(level, frames);
  REQUIRE(onsets.count(CriterionId::WpdHeight) == 1);
  const double pre = frames[49][CriterionId::WpdHeight];
  // Solve pre + (3.9 - pre) * (t - 5) / 2 = 3.3.
  const double crossing = 5.0 + 2.0 * (3.3 - pre) / (3.9 - pre);
  CHECK(crossing == doctest::Approx(5.67).epsilon(0.01));
  CHECK(onsets.at(CriterionId::WpdHeight) >= crossing);
  CHECK(onsets.at(CriterionId::WpdHeight) <= crossing + 0.1);
}

TEST_CASE("finite hold ramps back into tolerance") {
  Level l;
  l.id = "hold";
  l.seed = 3;
  l.events.push_back({CriterionId::Ph, 2.0, 1.0, -2.5, 4.0});
  const auto frames = generate_trajectory(l, 10.0);
  CHECK(frames[50][CriterionId::Ph] == doctest::Approx(30.0 - 2.5 * 1.5));
  // Back to idle after onset + ramp + hold + ramp = 8 s.
  for (std::size_t k = 81; k < frames.size(); ++k) {
    CHECK_FALSE(out_of_tolerance(CriterionId::Ph, frames[k][CriterionId::Ph]));
  }
}

TEST_CASE("PT crosses the threshold at onset + ramp") {
  Level l;
  l.id = "pt";
  l.seed = 11;
  l.events.push_back({CriterionId::Pt, 10.0, 1.0, 1.5});
  const auto frames = generate_trajectory(l, 10.0);
  double first = -1.0;
  for (const auto& f : frames) {
    if (f[CriterionId::Pt] >= 600.0) {
      first = f.t;
      break;
    }
  }
  CHECK(first >= 11.0 - 1e-9);
  CHECK(first <= 11.1 + 1e-9);
  const auto onsets = tolerance_onset_times(l, frames);
  CHECK(onsets.at(CriterionId::Pt) == doctest::Approx(first));
  CHECK(onsets.at(CriterionId::Pt) >= 10.0);
  CHECK(onsets.at(CriterionId::Pt) <= 11.0 + 1e-9);
  // Never overshoots the ceiling.
  for (const auto& f : frames) CHECK(f[CriterionId::Pt] <= 650.0 + 1e-9);
}

TEST_CASE("validation rejects malformed levels") {
  Level l;
  l.id = "bad";
  l.events.push_back({CriterionId::Wpt, 5.0, 1.0, 0.5});
  CHECK_THROWS_AS(validate_level(l), std::invalid_argument);
  l.events = {{CriterionId::Wpt, 29.5, 1.0, 2.0}};
  CHECK_THROWS_AS(validate_level(l), std::invalid_argument);
  l.events = {{CriterionId::Wpt, -1.0, 1.0, 2.0}};
  CHECK_THROWS_AS(validate_level(l), std::invalid_argument);
  l.events = {{CriterionId::Wpt, 5.0, 1.0, 2.0}, {CriterionId::Wpt, 10.0, 1.0, -2.0}};
  CHECK_THROWS_AS(validate_level(l), std::invalid_argument);
  // Disjoint events on one criterion are fine.
  l.events = {{CriterionId::Wpt, 5.0, 1.0, 2.0, 2.0}, {CriterionId::Wpt, 10.0, 1.0, -2.0}};
  CHECK_NOTHROW(validate_level(l));
  l.events.clear();
  l.duration = 0.0;
  CHECK_THROWS_AS(validate_level(l), std::invalid_argument);
}

TEST_CASE("trajectories are bit-identical per seed") {
  for (const auto& level : default_level_set(5)) {
    const auto a = generate_trajectory(level, 10.0);
    const auto b = generate_trajectory(level, 10.0);
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k].values == b[k].values);
  }
}

TEST_CASE("default level set covers the experiment design") {
  for (std::uint64_t seed : {1ULL, 2ULL, 77ULL, 2024ULL}) {
    const auto levels = default_level_set(seed);
    REQUIRE(levels.size() == 10);
    CHECK(levels == default_level_set(seed));

    std::set<CriterionId> covered;
    std::set<std::pair<CriterionId, bool>> directions;
    int multi = 0, idle = 0, pt = 0;
    for (const auto& l : levels) {
      CHECK(l.duration == 30.0);
      CHECK_NOTHROW(validate_level(l));
      if (l.events.empty()) ++idle;
      if (l.events.size() >= 2) ++multi;
      for (const auto& e : l.events) {
        covered.insert(e.criterion);
        directions.insert({e.criterion, e.severity > 0});
        if (e.criterion == CriterionId::Pt) ++pt;
      }
    }
    CHECK(covered.size() == 5);
    CHECK(directions.count({CriterionId::Ph, true}));
    CHECK(directions.count({CriterionId::Ph, false}));
    CHECK(directions.count({CriterionId::Wpt, true}));
    CHECK(directions.count({CriterionId::Wpt, false}));
    CHECK(multi >= 2);
    CHECK(idle >= 1);
    CHECK(pt >= 1);
  }
  CHECK(default_level_set(1) != default_level_set(2));
}

TEST_CASE("onsets lie between scripted onset and onset + ramp") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (const auto& level : default_level_set(seed)) {
      const auto frames = generate_trajectory(level, 10.0);
      const auto onsets = tolerance_onset_times(level, frames);
      for (const auto& e : level.events) {
        REQUIRE(onsets.count(e.criterion) == 1);
        CHECK(onsets.at(e.criterion) >= e.onset - 1e-9);
        CHECK(onsets.at(e.criterion) <= e.onset + e.ramp + 0.1 + 1e-9);
      }
    }
  }
}

TEST_CASE("group onsets take the earliest WPD criterion") {
  OnsetMap m{{CriterionId::WpdWidth, 8.0}, {CriterionId::WpdHeight, 6.5}, {CriterionId::Wpt, 3.0}};
  const auto g = group_onsets(m);
  CHECK(g.at(CriterionGroup::Wpd) == 6.5);
  CHECK(g.at(CriterionGroup::Wpt) == 3.0);
  CHECK(g.count(CriterionGroup::Ph) == 0);
}

TEST_CASE("training levels are valid and anomalous") {
  const auto levels = training_level_set(1);
  REQUIRE(levels.size() == 3);
  for (const auto& l : levels) {
    CHECK_FALSE(l.events.empty());
    CHECK_NOTHROW(validate_level(l));
  }
}
