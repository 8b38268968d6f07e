#include "sonimon/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

namespace sonimon {

std::string_view outcome_name(Outcome o) {
  static constexpr std::array<std::string_view, 4> names = {"HIT", "MISS", "FALSE_ALARM",
                                                            "CORRECT_REJECTION"};
  return names[static_cast<std::size_t>(o)];
}

Classification classify_trial(std::optional<double> onset, std::span<const AnnotationEvent> events) {
  std::vector<const AnnotationEvent*> ordered;
  ordered.reserve(events.size());
  for (const auto& e : events) ordered.push_back(&e);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const AnnotationEvent* a, const AnnotationEvent* b) { return a->t < b->t; });

  bool checked = false;
  double checked_since = 0.0;
  bool prediction = false;
  for (const auto* e : ordered) {
    if (e->action == Action::Check) {
      if (onset && e->t < *onset) prediction = true;
      if (!checked) checked_since = e->t;
      checked = true;
    } else {
      checked = false;
    }
  }

  Classification c;
  if (!onset) {
    c.outcome = checked ? Outcome::FalseAlarm : Outcome::CorrectRejection;
    return c;
  }
  if (prediction) {
    c.outcome = Outcome::FalseAlarm;
    return c;
  }
  if (checked) {
    c.outcome = Outcome::Hit;
    c.annotation_time = checked_since - *onset;
  } else {
    c.outcome = Outcome::Miss;
  }
  return c;
}

std::vector<StimulusTrialOutcome> classify_session(const SessionLog& log) {
  std::vector<StimulusTrialOutcome> out;
  for (const auto& rec : log.levels) {
    for (Stimulus s : ecology(log.ecology).stimuli) {
      std::vector<AnnotationEvent> mine;
      for (const auto& e : log.annotations) {
        if (e.level_id == rec.level.id && e.stimulus == s && e.t <= rec.level.duration) mine.push_back(e);
      }
      const auto it = rec.onsets.find(s);
      const std::optional<double> onset =
          it != rec.onsets.end() ? std::optional<double>(it->second) : std::nullopt;
      const auto c = classify_trial(onset, mine);
      out.push_back({log.session_id, rec.level.id, s, onset.has_value(), c.outcome, c.annotation_time});
    }
  }
  return out;
}

double clamp_rate(double r) { return std::clamp(r, kRateFloor, kRateCeiling); }

std::optional<Rates> rates(std::span<const StimulusTrialOutcome> outcomes) {
  Rates r;
  for (const auto& o : outcomes) {
    switch (o.outcome) {
      case Outcome::Hit:
        ++r.hits;
        ++r.present;
        break;
      case Outcome::Miss: ++r.present; break;
      case Outcome::FalseAlarm:
        ++r.false_alarms;
        ++r.fa_opportunities;
        if (o.anomaly_present) ++r.present;
        break;
      case Outcome::CorrectRejection: ++r.fa_opportunities; break;
    }
  }
  if (r.present == 0 || r.fa_opportunities == 0) return std::nullopt;
  r.H = clamp_rate(static_cast<double>(r.hits) / r.present);
  r.FA = clamp_rate(static_cast<double>(r.false_alarms) / r.fa_opportunities);
  return r;
}

double d_prime(double H, double FA) { return probit(H) - probit(FA); }

double mean_sensitivity(std::span<const double> d_primes) {
  if (d_primes.empty()) throw std::invalid_argument("mean_sensitivity: no participant values");
  return mean(d_primes);
}

std::optional<double> mean_annotation_ms(std::span<const StimulusTrialOutcome> outcomes) {
  std::vector<double> times;
  for (const auto& o : outcomes) {
    if (o.outcome == Outcome::Hit && o.annotation_time) times.push_back(*o.annotation_time * 1000.0);
  }
  if (times.empty()) return std::nullopt;
  return mean(times);
}

std::optional<double> mean_copy_ms(const SessionLog& log) {
  std::set<std::string> main_levels;
  for (const auto& r : log.levels) main_levels.insert(r.level.id);
  std::vector<double> d;
  for (const auto& e : log.sequences) {
    if (main_levels.count(e.level_id)) d.push_back(e.duration * 1000.0);
  }
  if (d.empty()) return std::nullopt;
  return mean(d);
}

std::array<double, kSurveyStatementCount> survey_aggregate(std::span<const SurveyResponse> responses) {
  std::array<double, kSurveyStatementCount> out;
  out.fill(std::numeric_limits<double>::quiet_NaN());
  if (responses.empty()) return out;
  for (std::size_t i = 0; i < kSurveyStatementCount; ++i) {
    double sum = 0.0;
    for (const auto& r : responses) sum += answer_score(r.answers[i]);
    out[i] = std::round(sum / static_cast<double>(responses.size()) * 100.0) / 100.0;
  }
  return out;
}

}  // namespace sonimon
