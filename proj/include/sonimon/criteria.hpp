#pragma once

#include <array>
#include <string>
#include <string_view>

namespace sonimon {

enum class CriterionId { WpdWidth, WpdHeight, Ph, Wpt, Pt };

inline constexpr std::array<CriterionId, 5> kAllCriteria = {
    CriterionId::WpdWidth, CriterionId::WpdHeight, CriterionId::Ph,
    CriterionId::Wpt, CriterionId::Pt};

enum class CriterionKind { Band, Threshold };

struct CriterionSpec {
  CriterionId id;
  double nominal;        // mm or degrees C
  double tol_halfwidth;  // same unit; unused for Threshold
  CriterionKind kind;
};

inline constexpr double kPtThreshold = 600.0;
inline constexpr double kDefaultLayerHeight = 30.0;

// WPD width 4mm +-10%, height 3mm +-10%, PH current layer +-1.5mm,
// WPT 2000C +-10%, PT 600C threshold.
const CriterionSpec& criterion_spec(CriterionId id);
const std::array<CriterionSpec, 5>& default_registry();

// Short keys used in log files ("wpd_w", "wpd_h", "ph", "wpt", "pt").
std::string_view log_key(CriterionId id);
// Canonical names used in scenario files ("WPD_WIDTH", ...).
std::string_view criterion_name(CriterionId id);
CriterionId parse_criterion(std::string_view name);

constexpr std::size_t index_of(CriterionId id) { return static_cast<std::size_t>(id); }

// True when the value is outside the tolerance band (or at/above the PT threshold).
bool out_of_tolerance(CriterionId id, double value);

}  // namespace sonimon

namespace sonimon {

// One stimulus per group in every ecology.
enum class CriterionGroup { Wpd, Ph, Wpt, Pt };

inline constexpr std::array<CriterionGroup, 4> kAllGroups = {
    CriterionGroup::Wpd, CriterionGroup::Ph, CriterionGroup::Wpt, CriterionGroup::Pt};

constexpr CriterionGroup group_of(CriterionId id) {
  switch (id) {
    case CriterionId::WpdWidth:
    case CriterionId::WpdHeight: return CriterionGroup::Wpd;
    case CriterionId::Ph: return CriterionGroup::Ph;
    case CriterionId::Wpt: return CriterionGroup::Wpt;
    case CriterionId::Pt: return CriterionGroup::Pt;
  }
  return CriterionGroup::Wpd;
}

}  // namespace sonimon
