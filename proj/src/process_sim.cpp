#include "sonimon/process_sim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "sonimon/rng.hpp"

namespace sonimon {

namespace {

constexpr double kJitterSmoothing = 0.9;

double event_end(const AnomalyEvent& e) {
  if (std::isinf(e.hold)) return std::numeric_limits<double>::infinity();
  return e.onset + e.ramp + e.hold + e.ramp;
}

double lerp(double a, double b, double f) {
  if (f >= 1.0) return b;
  if (f <= 0.0) return a;
  return a + (b - a) * f;
}

double ramp_fraction(double t, double start, double ramp) {
  if (ramp <= 0.0) return t >= start ? 1.0 : 0.0;
  return (t - start) / ramp;
}

// Value of a band criterion under one event, given the idle value at t and
// the idle value just before onset.
double band_value(const AnomalyEvent& e, const CriterionSpec& spec, double t, double idle,
                  double pre_onset) {
  const double target = spec.nominal + e.severity * spec.tol_halfwidth;
  const double reached = e.onset + e.ramp;
  if (t < reached) return lerp(pre_onset, target, ramp_fraction(t, e.onset, e.ramp));
  const double release = reached + e.hold;
  if (t < release) return target;
  return lerp(target, idle, ramp_fraction(t, release, e.ramp));
}

double pt_value(const AnomalyEvent& e, double t, double idle) {
  const double peak = kPtThreshold + kPtOvershoot;
  auto rising = [&](double at) {
    if (e.ramp <= 0.0) return peak;
    const double v = lerp(idle, kPtThreshold, ramp_fraction(at, e.onset, e.ramp));
    if (at <= e.onset + e.ramp) return v;
    // Keep the same slope past the threshold until the peak.
    const double slope = (kPtThreshold - idle) / e.ramp;
    return std::min(peak, kPtThreshold + slope * (at - e.onset - e.ramp));
  };
  const double release = e.onset + e.ramp + e.hold;
  if (t < release) return rising(t);
  return lerp(rising(release), idle, ramp_fraction(t, release, e.ramp));
}

const AnomalyEvent* active_event(const std::vector<const AnomalyEvent*>& events, double t) {
  for (const auto* e : events) {
    if (t >= e->onset && t < event_end(*e)) return e;
  }
  return nullptr;
}

}  // namespace

void validate_level(const Level& level) {
  auto fail = [&](const std::string& what) {
    throw std::invalid_argument("level '" + level.id + "': " + what);
  };
  if (!(level.duration > 0.0) || !std::isfinite(level.duration)) fail("duration must be positive");
  for (const auto& e : level.events) {
    if (!(e.onset >= 0.0)) fail("event onset must be >= 0");
    if (!(e.ramp >= 0.0) || !std::isfinite(e.ramp)) fail("event ramp must be >= 0");
    if (!(e.hold >= 0.0)) fail("event hold must be >= 0");
    if (!(e.onset + e.ramp < level.duration)) fail("event onset + ramp must be < duration");
    if (criterion_spec(e.criterion).kind == CriterionKind::Band && !(std::abs(e.severity) > 1.0)) {
      fail("band criterion severity must satisfy |severity| > 1");
    }
  }
  for (std::size_t i = 0; i < level.events.size(); ++i) {
    for (std::size_t j = i + 1; j < level.events.size(); ++j) {
      const auto& a = level.events[i];
      const auto& b = level.events[j];
      if (a.criterion != b.criterion) continue;
      if (a.onset < event_end(b) && b.onset < event_end(a)) {
        fail("overlapping events on " + std::string(criterion_name(a.criterion)));
      }
    }
  }
}

std::vector<CriterionFrame> generate_trajectory(const Level& level, double frame_rate) {
  if (!(frame_rate > 0.0) || !std::isfinite(frame_rate)) {
    throw std::invalid_argument("frame_rate must be positive");
  }
  validate_level(level);

  const auto count = static_cast<std::size_t>(std::ceil(level.duration * frame_rate));
  std::vector<CriterionFrame> frames(count);
  for (std::size_t k = 0; k < count; ++k) frames[k].t = static_cast<double>(k) / frame_rate;

  for (CriterionId id : kAllCriteria) {
    const auto& spec = criterion_spec(id);
    std::vector<const AnomalyEvent*> events;
    for (const auto& e : level.events) {
      if (e.criterion == id) events.push_back(&e);
    }

    Rng rng(mix_seed(level.seed, index_of(id) + 1));

    if (spec.kind == CriterionKind::Threshold) {
      const double idle = rng.uniform(kPtIdleMin, kPtIdleMax);
      for (auto& f : frames) {
        const auto* e = active_event(events, f.t);
        f[id] = e ? pt_value(*e, f.t, idle) : idle;
      }
      continue;
    }

    // Smoothed uniform noise; a convex combination of bounded draws stays bounded.
    const double bound = kIdleJitterFraction * spec.tol_halfwidth;
    double jitter = 0.0;
    double previous_idle = spec.nominal;
    const AnomalyEvent* current = nullptr;
    double pre_onset = spec.nominal;
    for (auto& f : frames) {
      jitter = kJitterSmoothing * jitter + (1.0 - kJitterSmoothing) * bound * rng.bipolar();
      const double idle = spec.nominal + jitter;
      const auto* e = active_event(events, f.t);
      if (e != current) {
        current = e;
        pre_onset = previous_idle;
      }
      f[id] = e ? band_value(*e, spec, f.t, idle, pre_onset) : idle;
      previous_idle = idle;
    }
  }
  return frames;
}

OnsetMap tolerance_onset_times(const Level& level, const std::vector<CriterionFrame>& frames) {
  OnsetMap onsets;
  for (CriterionId id : kAllCriteria) {
    const bool has_event = std::any_of(level.events.begin(), level.events.end(),
                                       [&](const AnomalyEvent& e) { return e.criterion == id; });
    if (!has_event) continue;
    for (const auto& f : frames) {
      if (out_of_tolerance(id, f[id])) {
        onsets[id] = f.t;
        break;
      }
    }
  }
  return onsets;
}

GroupOnsetMap group_onsets(const OnsetMap& onsets) {
  GroupOnsetMap groups;
  for (const auto& [id, t] : onsets) {
    const auto g = group_of(id);
    auto it = groups.find(g);
    if (it == groups.end()) {
      groups.emplace(g, t);
    } else {
      it->second = std::min(it->second, t);
    }
  }
  return groups;
}

namespace {

struct Template {
  CriterionId criterion;
  int direction;  // +1 / -1
};

AnomalyEvent draw_event(Rng& rng, Template tpl, double onset_lo, double onset_hi) {
  AnomalyEvent e;
  e.criterion = tpl.criterion;
  e.onset = std::round(rng.uniform(onset_lo, onset_hi) * 10.0) / 10.0;
  e.ramp = std::round(rng.uniform(1.0, 3.0) * 10.0) / 10.0;
  e.severity = tpl.direction * std::round(rng.uniform(2.0, 3.0) * 100.0) / 100.0;
  return e;
}

std::string level_name(std::string_view prefix, std::size_t i) {
  std::ostringstream os;
  os << prefix << '-' << (i < 9 ? "0" : "") << (i + 1);
  return os.str();
}

}  // namespace

std::vector<Level> default_level_set(std::uint64_t seed) {
  using C = CriterionId;
  const std::vector<std::vector<Template>> layout = {
      {},
      {{C::WpdHeight, +1}},
      {{C::WpdWidth, +1}},
      {{C::Ph, +1}},
      {{C::Ph, -1}},
      {{C::Wpt, +1}},
      {{C::Wpt, -1}},
      {{C::WpdHeight, -1}, {C::Wpt, +1}},
      {{C::Ph, -1}, {C::WpdWidth, -1}},
      {{C::Wpt, +1}, {C::Pt, +1}},
  };

  std::vector<Level> levels;
  levels.reserve(layout.size());
  for (std::size_t i = 0; i < layout.size(); ++i) {
    Level level;
    level.id = level_name("level", i);
    level.seed = mix_seed(seed, i);
    Rng rng(mix_seed(level.seed, 0xA11CE));
    for (const auto& tpl : layout[i]) {
      if (tpl.criterion == C::Pt) {
        // The global temperature alarm follows a prolonged local overheat.
        level.events.push_back(draw_event(rng, tpl, 14.0, 20.0));
      } else if (i + 1 == layout.size()) {
        level.events.push_back(draw_event(rng, tpl, 3.0, 8.0));
      } else {
        level.events.push_back(draw_event(rng, tpl, 4.0, 18.0));
      }
    }
    validate_level(level);
    levels.push_back(std::move(level));
  }
  return levels;
}

std::vector<Level> training_level_set(std::uint64_t seed) {
  using C = CriterionId;
  const std::vector<std::vector<Template>> layout = {
      {{C::Wpt, +1}},
      {{C::Ph, -1}, {C::WpdHeight, +1}},
      {{C::WpdWidth, +1}, {C::Wpt, -1}},
  };
  std::vector<Level> levels;
  for (std::size_t i = 0; i < layout.size(); ++i) {
    Level level;
    level.id = level_name("qualify", i);
    level.seed = mix_seed(seed ^ 0x7EA1ULL, i);
    Rng rng(mix_seed(level.seed, 0xA11CE));
    for (const auto& tpl : layout[i]) level.events.push_back(draw_event(rng, tpl, 4.0, 16.0));
    validate_level(level);
    levels.push_back(std::move(level));
  }
  return levels;
}

}  // namespace sonimon
