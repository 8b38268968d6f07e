#include "sonimon/criteria.hpp"

#include <cmath>
#include <stdexcept>

namespace sonimon {

namespace {

constexpr std::array<CriterionSpec, 5> kRegistry = {{
    {CriterionId::WpdWidth, 4.0, 0.4, CriterionKind::Band},
    {CriterionId::WpdHeight, 3.0, 0.3, CriterionKind::Band},
    {CriterionId::Ph, kDefaultLayerHeight, 1.5, CriterionKind::Band},
    {CriterionId::Wpt, 2000.0, 200.0, CriterionKind::Band},
    {CriterionId::Pt, kPtThreshold, 0.0, CriterionKind::Threshold},
}};

constexpr std::array<std::string_view, 5> kLogKeys = {"wpd_w", "wpd_h", "ph", "wpt", "pt"};
constexpr std::array<std::string_view, 5> kNames = {"WPD_WIDTH", "WPD_HEIGHT", "PH", "WPT", "PT"};

}  // namespace

const CriterionSpec& criterion_spec(CriterionId id) { return kRegistry[index_of(id)]; }

const std::array<CriterionSpec, 5>& default_registry() { return kRegistry; }

std::string_view log_key(CriterionId id) { return kLogKeys[index_of(id)]; }

std::string_view criterion_name(CriterionId id) { return kNames[index_of(id)]; }

CriterionId parse_criterion(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name || kLogKeys[i] == name) return kAllCriteria[i];
  }
  throw std::invalid_argument("unknown criterion: " + std::string(name));
}

bool out_of_tolerance(CriterionId id, double value) {
  const auto& spec = criterion_spec(id);
  if (spec.kind == CriterionKind::Threshold) return value >= spec.nominal;
  return std::abs(value - spec.nominal) > spec.tol_halfwidth;
}

}  // namespace sonimon
