#include "sonimon/ecology.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace sonimon {

namespace {

constexpr std::array<std::string_view, 8> kStimulusNames = {
    "ARPEGGIO", "DRONE", "JINGLE", "BELL", "DROPLETS", "BIRDS", "WATER", "SIZZLE"};
constexpr std::array<std::string_view, 8> kStimulusLabels = {
    "Arpeggio", "Drone", "Jingle", "Bell", "Droplets", "Birds", "Water", "Sizzle"};
constexpr std::array<std::string_view, 3> kEcologyNames = {"MIXED", "SYNTH", "NATURE"};

using S = Stimulus;
constexpr std::array<Ecology, 3> kEcologies = {{
    {EcologyId::Mixed, {S::Arpeggio, S::Drone, S::Water, S::Sizzle}},
    {EcologyId::Synth, {S::Arpeggio, S::Drone, S::Jingle, S::Bell}},
    {EcologyId::Nature, {S::Droplets, S::Birds, S::Water, S::Sizzle}},
}};

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// Step tiers at |nd| = 1 and at the midpoint of [1, nd_max].
int severity_tier(NormalizedDeviation d) {
  if (d.excess <= 0.0) return 0;
  return d.excess <= 0.5 ? 1 : 2;
}

}  // namespace

std::string_view stimulus_name(Stimulus s) { return kStimulusNames[static_cast<std::size_t>(s)]; }
std::string_view stimulus_label(Stimulus s) { return kStimulusLabels[static_cast<std::size_t>(s)]; }

Stimulus parse_stimulus(std::string_view name) {
  const auto u = upper(name);
  for (std::size_t i = 0; i < kStimulusNames.size(); ++i) {
    if (kStimulusNames[i] == u) return static_cast<Stimulus>(i);
  }
  throw std::invalid_argument("unknown stimulus: " + std::string(name));
}

std::string_view ecology_name(EcologyId e) { return kEcologyNames[static_cast<std::size_t>(e)]; }

EcologyId parse_ecology(std::string_view name) {
  const auto u = upper(name);
  for (std::size_t i = 0; i < kEcologyNames.size(); ++i) {
    if (kEcologyNames[i] == u) return static_cast<EcologyId>(i);
  }
  throw std::invalid_argument("unknown ecology: " + std::string(name));
}

const Ecology& ecology(EcologyId id) { return kEcologies[static_cast<std::size_t>(id)]; }

CriterionGroup group_of(Stimulus s) {
  switch (s) {
    case S::Arpeggio:
    case S::Droplets: return CriterionGroup::Wpd;
    case S::Drone:
    case S::Birds: return CriterionGroup::Ph;
    case S::Jingle:
    case S::Water: return CriterionGroup::Wpt;
    case S::Bell:
    case S::Sizzle: return CriterionGroup::Pt;
  }
  return CriterionGroup::Wpd;
}

NormalizedDeviation NormalizedDeviation::from_nd(double nd, double nd_max) {
  NormalizedDeviation d;
  d.nd = nd;
  d.excess = std::clamp((std::abs(nd) - 1.0) / (nd_max - 1.0), 0.0, 1.0);
  return d;
}

NormalizedDeviation NormalizedDeviation::of(CriterionId id, double value, double nd_max) {
  const auto& spec = criterion_spec(id);
  if (spec.kind != CriterionKind::Band) {
    throw std::invalid_argument("normalized deviation is defined for band criteria only");
  }
  return from_nd((value - spec.nominal) / spec.tol_halfwidth, nd_max);
}

std::string_view selection_name(Selection s) {
  static constexpr std::array<std::string_view, 7> names = {
      "none", "silent", "crackling", "boiling", "misc", "ducks", "crows"};
  return names[static_cast<std::size_t>(s)];
}

StimulusParams map_arpeggio(NormalizedDeviation height, NormalizedDeviation width) {
  StimulusParams p;
  p.stimulus = S::Arpeggio;
  p.pitch_hz = kC5 * std::exp2(kArpeggioSpanSemitones * height.excess / 12.0);
  p.loudness = 0.02 + 0.18 * std::max(height.excess, width.excess);
  p.interval_s = 1.5 - 1.0 * width.excess;
  return p;
}

StimulusParams map_drone(NormalizedDeviation ph) {
  StimulusParams p;
  p.stimulus = S::Drone;
  p.pitch_hz = kA3 * std::exp2(kDroneSpanSemitones * sign(ph.nd) * ph.excess / 12.0);
  p.loudness = 0.1 + 0.3 * ph.excess;
  return p;
}

StimulusParams map_droplets(NormalizedDeviation height, NormalizedDeviation width) {
  StimulusParams p;
  p.stimulus = S::Droplets;
  p.playback_rate = std::clamp(std::exp2(sign(height.nd) * height.excess), 0.5, 2.0);
  p.loudness = 0.1 + 0.7 * std::max(height.excess, width.excess);
  p.interval_s = 1.5 - 1.0 * width.excess;
  return p;
}

StimulusParams map_birds(NormalizedDeviation ph) {
  StimulusParams p;
  p.stimulus = S::Birds;
  if (ph.excess <= 0.0) {
    p.selection = Selection::Misc;
  } else {
    p.selection = ph.nd > 0.0 ? Selection::Ducks : Selection::Crows;
  }
  p.loudness = 0.3 * ph.excess;
  return p;
}

StimulusParams map_jingle(NormalizedDeviation wpt) {
  static constexpr std::array<double, 3> tiers = {0.0, 0.1, 0.2};
  StimulusParams p;
  p.stimulus = S::Jingle;
  const int tier = severity_tier(wpt);
  // Silent in tolerance; the pitch is pinned so idle frames map identically.
  p.pitch_hz = tier > 0 && wpt.nd < 0.0 ? kJingleLow : kJingleHigh;
  p.loudness = tiers[static_cast<std::size_t>(tier)];
  p.interval_s = kJingleGrainPeriod;
  return p;
}

StimulusParams map_water(NormalizedDeviation wpt) {
  static constexpr std::array<double, 3> tiers = {0.0, 0.2, 0.5};
  StimulusParams p;
  p.stimulus = S::Water;
  const int tier = severity_tier(wpt);
  if (tier == 0) {
    p.selection = Selection::Silent;
  } else {
    p.selection = wpt.nd < 0.0 ? Selection::Crackling : Selection::Boiling;
  }
  p.loudness = tiers[static_cast<std::size_t>(tier)];
  return p;
}

StimulusParams map_pt_alarm(Stimulus alarm, double pt_value, double prev_value,
                            bool already_fired) {
  if (alarm != S::Bell && alarm != S::Sizzle) {
    throw std::invalid_argument("PT alarm must be BELL or SIZZLE");
  }
  StimulusParams p;
  p.stimulus = alarm;
  p.loudness = kAlarmLoudness;
  if (alarm == S::Bell) p.pitch_hz = 440.0;
  p.trigger = prev_value < kPtThreshold && kPtThreshold <= pt_value && !already_fired;
  return p;
}

std::array<StimulusParams, 4> map_frame(const CriterionFrame& frame, const Ecology& eco,
                                        AlarmState& state) {
  const auto height = NormalizedDeviation::of(CriterionId::WpdHeight, frame[CriterionId::WpdHeight]);
  const auto width = NormalizedDeviation::of(CriterionId::WpdWidth, frame[CriterionId::WpdWidth]);
  const auto ph = NormalizedDeviation::of(CriterionId::Ph, frame[CriterionId::Ph]);
  const auto wpt = NormalizedDeviation::of(CriterionId::Wpt, frame[CriterionId::Wpt]);
  const double pt = frame[CriterionId::Pt];

  std::array<StimulusParams, 4> out;
  for (std::size_t g = 0; g < out.size(); ++g) {
    const Stimulus s = eco.stimuli[g];
    switch (s) {
      case S::Arpeggio: out[g] = map_arpeggio(height, width); break;
      case S::Droplets: out[g] = map_droplets(height, width); break;
      case S::Drone: out[g] = map_drone(ph); break;
      case S::Birds: out[g] = map_birds(ph); break;
      case S::Jingle: out[g] = map_jingle(wpt); break;
      case S::Water: out[g] = map_water(wpt); break;
      case S::Bell:
      case S::Sizzle:
        // Without a previous reading there is no crossing to detect.
        out[g] = map_pt_alarm(s, pt, state.previous_pt.value_or(pt), state.fired);
        break;
    }
  }
  if (out[3].trigger) state.fired = true;
  state.previous_pt = pt;
  return out;
}

bool is_audible(const StimulusParams& p) {
  switch (p.stimulus) {
    case S::Bell:
    case S::Sizzle: return p.trigger;
    case S::Birds: return true;  // the misc bed never stops
    default: return p.loudness > 0.0;
  }
}

StimulusParams idle_params(Stimulus s) {
  const auto zero = NormalizedDeviation::from_nd(0.0);
  switch (s) {
    case S::Arpeggio: return map_arpeggio(zero, zero);
    case S::Droplets: return map_droplets(zero, zero);
    case S::Drone: return map_drone(zero);
    case S::Birds: return map_birds(zero);
    case S::Jingle: return map_jingle(zero);
    case S::Water: return map_water(zero);
    case S::Bell:
    case S::Sizzle: return map_pt_alarm(s, 0.0, 0.0, false);
  }
  return {};
}

}  // namespace sonimon
