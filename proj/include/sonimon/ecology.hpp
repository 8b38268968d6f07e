#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sonimon/criteria.hpp"
#include "sonimon/process_sim.hpp"

namespace sonimon {

enum class Stimulus { Arpeggio, Drone, Jingle, Bell, Droplets, Birds, Water, Sizzle };
enum class EcologyId { Mixed, Synth, Nature };

inline constexpr std::array<EcologyId, 3> kAllEcologies = {EcologyId::Mixed, EcologyId::Synth,
                                                           EcologyId::Nature};

std::string_view stimulus_name(Stimulus s);    // "ARPEGGIO", ...
std::string_view stimulus_label(Stimulus s);   // "Arpeggio", ... (checkbox labels)
Stimulus parse_stimulus(std::string_view name);
std::string_view ecology_name(EcologyId e);    // "MIXED", "SYNTH", "NATURE"
// Case-insensitive. Throws std::invalid_argument on unknown ids.
EcologyId parse_ecology(std::string_view name);

struct Ecology {
  EcologyId id;
  // Indexed by CriterionGroup: WPD, PH, WPT, PT.
  std::array<Stimulus, 4> stimuli;

  Stimulus stimulus_for(CriterionGroup g) const { return stimuli[static_cast<std::size_t>(g)]; }
};

const Ecology& ecology(EcologyId id);
CriterionGroup group_of(Stimulus s);

// "worst" deviation, in tolerance half-widths.
inline constexpr double kNdMax = 3.0;

struct NormalizedDeviation {
  double nd = 0.0;      // (value - nominal) / tol_halfwidth
  double excess = 0.0;  // clamp((|nd| - 1) / (nd_max - 1), 0, 1)

  static NormalizedDeviation from_nd(double nd, double nd_max = kNdMax);
  static NormalizedDeviation of(CriterionId id, double value, double nd_max = kNdMax);
};

enum class Selection { None, Silent, Crackling, Boiling, Misc, Ducks, Crows };
std::string_view selection_name(Selection s);

struct StimulusParams {
  Stimulus stimulus = Stimulus::Arpeggio;
  double pitch_hz = 0.0;
  double loudness = 0.0;
  std::optional<double> interval_s;  // repetition period, where applicable
  Selection selection = Selection::None;
  bool trigger = false;
  double playback_rate = 1.0;  // Droplets only

  bool operator==(const StimulusParams&) const = default;
};

// Note names used by the mapping.
inline constexpr double kC5 = 523.2511306011972;
inline constexpr double kA3 = 220.0;
inline constexpr double kArpeggioSpanSemitones = 17.0;  // C5 -> F6
inline constexpr double kDroneSpanSemitones = 6.0;      // +-3 whole tones
inline constexpr double kJingleLow = 220.0;
inline constexpr double kJingleHigh = 880.0;
inline constexpr double kJingleGrainPeriod = 1.0 / 8.0;
inline constexpr double kBirdBedLoudness = 0.15;
inline constexpr double kAlarmLoudness = 0.5;

StimulusParams map_arpeggio(NormalizedDeviation height, NormalizedDeviation width);
StimulusParams map_drone(NormalizedDeviation ph);
StimulusParams map_droplets(NormalizedDeviation height, NormalizedDeviation width);
StimulusParams map_birds(NormalizedDeviation ph);
StimulusParams map_jingle(NormalizedDeviation wpt);
StimulusParams map_water(NormalizedDeviation wpt);
// One-shot: fires on the upward crossing of 600 C unless already fired.
StimulusParams map_pt_alarm(Stimulus alarm, double pt_value, double prev_value, bool already_fired);

struct AlarmState {
  std::optional<double> previous_pt;
  bool fired = false;
};

// Exactly four parameter sets, ordered WPD, PH, WPT, PT.
std::array<StimulusParams, 4> map_frame(const CriterionFrame& frame, const Ecology& eco,
                                        AlarmState& state);

// Loudness above zero for continuous voices, trigger for alarms.
bool is_audible(const StimulusParams& p);

// Idle parameter set for the stimulus (all criteria in tolerance, no alarm).
StimulusParams idle_params(Stimulus s);

}  // namespace sonimon
