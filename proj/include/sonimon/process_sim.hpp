#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "sonimon/criteria.hpp"

namespace sonimon {

inline constexpr double kDefaultFrameRate = 10.0;
inline constexpr double kDefaultLevelDuration = 30.0;
inline constexpr double kIdleJitterFraction = 0.25;
inline constexpr double kPtIdleMin = 400.0;
inline constexpr double kPtIdleMax = 550.0;
inline constexpr double kPtOvershoot = 50.0;
inline constexpr std::size_t kDefaultLevelCount = 10;

struct CriterionFrame {
  double t = 0.0;
  std::array<double, 5> values{};

  double operator[](CriterionId id) const { return values[index_of(id)]; }
  double& operator[](CriterionId id) { return values[index_of(id)]; }
};

// Severity is the target deviation in units of the tolerance half-width.
// For PT the value is ignored: the part temperature crosses the threshold
// exactly at onset + ramp and keeps rising to threshold + kPtOvershoot.
struct AnomalyEvent {
  CriterionId criterion = CriterionId::WpdHeight;
  double onset = 0.0;
  double ramp = 0.0;
  double severity = 0.0;
  double hold = std::numeric_limits<double>::infinity();

  bool operator==(const AnomalyEvent&) const = default;
};

struct Level {
  std::string id;
  double duration = kDefaultLevelDuration;
  std::vector<AnomalyEvent> events;
  std::uint64_t seed = 0;

  bool operator==(const Level&) const = default;
};

using OnsetMap = std::map<CriterionId, double>;
using GroupOnsetMap = std::map<CriterionGroup, double>;

// Throws std::invalid_argument on a malformed level or overlapping events on
// one criterion.
void validate_level(const Level& level);

std::vector<CriterionFrame> generate_trajectory(const Level& level,
                                                double frame_rate = kDefaultFrameRate);

// First frame time at which each anomalous criterion leaves its tolerance band.
OnsetMap tolerance_onset_times(const Level& level, const std::vector<CriterionFrame>& frames);

// Collapses criterion onsets to the stimulus groups (WPD = earliest of width/height).
GroupOnsetMap group_onsets(const OnsetMap& onsets);

// Ten 30 s levels covering every criterion, both directions of PH and WPT,
// multi-anomaly levels, a PT alarm level and an idle level.
std::vector<Level> default_level_set(std::uint64_t seed);

// Short levels used by the qualifying stage of training.
std::vector<Level> training_level_set(std::uint64_t seed);

}  // namespace sonimon
