#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sonimon/ecology.hpp"
#include "sonimon/session_log.hpp"
#include "sonimon/stats.hpp"

namespace sonimon {

inline constexpr double kRateFloor = 0.01;
inline constexpr double kRateCeiling = 0.99;

enum class Outcome { Hit, Miss, FalseAlarm, CorrectRejection };
std::string_view outcome_name(Outcome o);

struct Classification {
  Outcome outcome = Outcome::CorrectRejection;
  std::optional<double> annotation_time;  // seconds after onset, hits only
};

// One checkbox over one level. `events` are that checkbox's annotations in
// arrival order; they are replayed in time order (stable for equal times).
// Rules:
//  - any CHECK before the onset is a prediction: FALSE_ALARM;
//  - with an anomaly, HIT iff the box ends the level checked by a CHECK at
//    or after the onset; the time is that CHECK minus the onset;
//    otherwise MISS (a later UNCHECK is a change of mind);
//  - without an anomaly, a box left checked is a FALSE_ALARM, else
//    CORRECT_REJECTION.
Classification classify_trial(std::optional<double> onset, std::span<const AnnotationEvent> events);

struct StimulusTrialOutcome {
  std::string session;
  std::string level_id;
  Stimulus stimulus = Stimulus::Arpeggio;
  bool anomaly_present = false;
  Outcome outcome = Outcome::CorrectRejection;
  std::optional<double> annotation_time;
};

// Every (main level, stimulus) trial of a session.
std::vector<StimulusTrialOutcome> classify_session(const SessionLog& log);

double clamp_rate(double r);

struct Rates {
  double H = 0.0;
  double FA = 0.0;
  int hits = 0;
  int present = 0;
  int false_alarms = 0;
  int fa_opportunities = 0;  // absent trials plus predictions on present trials
};

// Outcomes of one participant for one stimulus. Absent when either
// denominator is zero.
std::optional<Rates> rates(std::span<const StimulusTrialOutcome> outcomes);

double d_prime(double H, double FA);

struct SensitivityResult {
  Stimulus stimulus = Stimulus::Arpeggio;
  EcologyId ecology = EcologyId::Synth;
  int participants = 0;
  double H = 0.0;   // mean clamped hit rate
  double FA = 0.0;  // mean clamped false-alarm rate
  double d_prime = 0.0;
};

// Arithmetic mean of per-participant d'. Throws on empty input.
double mean_sensitivity(std::span<const double> d_primes);

// Mean hit annotation time in ms; absent without hits.
std::optional<double> mean_annotation_ms(std::span<const StimulusTrialOutcome> outcomes);

// Per-participant mean sequence-copy time in ms over main levels; absent without sequences.
std::optional<double> mean_copy_ms(const SessionLog& log);

// Percent agreement per statement, rounded to two decimals. Empty input gives NaN rows.
std::array<double, kSurveyStatementCount> survey_aggregate(std::span<const SurveyResponse> responses);

}  // namespace sonimon
