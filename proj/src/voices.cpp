#include "sonimon/voices.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "natural_voices.hpp"
#include "sonimon/rng.hpp"

namespace sonimon {

namespace {

using detail::Slew;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double semitones(double a, double b) { return 12.0 * std::log2(b / a); }

class ArpeggioVoice final : public Voice {
 public:
  explicit ArpeggioVoice(int sample_rate) : sr_(sample_rate) {}

  Stimulus stimulus() const override { return Stimulus::Arpeggio; }

  void set_params(const StimulusParams& p) override {
    const double interval = p.interval_s.value_or(1.5);
    const bool changed = !started_ || std::abs(semitones(tonic_, p.pitch_hz)) > 1e-6 ||
                         std::abs(loudness_ - p.loudness) > 1e-9 ||
                         std::abs(interval_ - interval) > 1e-9;
    tonic_ = p.pitch_hz;
    loudness_ = p.loudness;
    interval_ = interval;
    if (changed) {
      // The new motive interrupts the running one.
      step_ = 0;
      until_next_ = 0.0;
      started_ = true;
    }
  }

  void render(std::span<double> out) override {
    const double attack = kArpeggioAttack * sr_;
    const double decay = kArpeggioDecay * sr_;
    const double horizon = 10.0 * decay;
    for (double& y : out) {
      if (started_ && until_next_ <= 0.0) {
        if (loudness_ > 0.0) {
          const double f = tonic_ * std::exp2(kArpeggioMotive[step_] / 12.0);
          notes_.push_back({f / sr_, loudness_, 0.0, 0.0});
        }
        step_ = (step_ + 1) % kArpeggioMotive.size();
        until_next_ += interval_ * sr_;
      }
      until_next_ -= 1.0;

      double acc = 0.0;
      for (auto& n : notes_) {
        const double env = n.age < attack ? n.age / attack : std::exp(-(n.age - attack) / decay);
        const double ph = kTwoPi * n.phase;
        // Piano-ish partial roll-off.
        const double tone = (std::sin(ph) + 0.35 * std::sin(2.0 * ph) + 0.12 * std::sin(3.0 * ph)) / 1.47;
        acc += n.amplitude * env * tone;
        n.phase += n.increment;
        if (n.phase >= 1.0) n.phase -= 1.0;
        n.age += 1.0;
      }
      std::erase_if(notes_, [&](const Note& n) { return n.age > horizon; });
      y = acc;
    }
  }

 private:
  struct Note {
    double increment;
    double amplitude;
    double phase;
    double age;
  };

  int sr_;
  double tonic_ = kC5, loudness_ = 0.0, interval_ = 1.5;
  std::size_t step_ = 0;
  double until_next_ = 0.0;
  bool started_ = false;
  std::vector<Note> notes_;
};

class DroneVoice final : public Voice {
 public:
  explicit DroneVoice(int sample_rate) : sr_(sample_rate) {}

  Stimulus stimulus() const override { return Stimulus::Drone; }

  void set_params(const StimulusParams& p) override {
    if (!started_) {
      freq_ = p.pitch_hz;
      filter_.set_bandpass(freq_, kDroneQ, sr_);
      started_ = true;
    } else if (p.pitch_hz != glide_to_) {
      glide_from_ = freq_;
      glide_left_ = glide_total_ = std::max(1.0, kDroneGlide * sr_);
    }
    glide_to_ = p.pitch_hz;
    gain_.set(p.loudness, 0.02, sr_);
  }

  void render(std::span<double> out) override {
    for (double& y : out) {
      if (glide_left_ > 0.0) {
        glide_left_ -= 1.0;
        const double f = 1.0 - glide_left_ / glide_total_;
        freq_ = glide_from_ + (glide_to_ - glide_from_) * f;
        filter_.set_bandpass(freq_, kDroneQ, sr_);
      }
      const double dt = freq_ / sr_;
      double saw = 2.0 * phase_ - 1.0;
      saw -= poly_blep(phase_, dt);
      phase_ += dt;
      if (phase_ >= 1.0) phase_ -= 1.0;
      y = kNorm * gain_.next() * filter_.process(saw);
    }
  }

 private:
  static double poly_blep(double t, double dt) {
    if (t < dt) {
      t /= dt;
      return t + t - t * t - 1.0;
    }
    if (t > 1.0 - dt) {
      t = (t - 1.0) / dt;
      return t * t + t + t + 1.0;
    }
    return 0.0;
  }

  static constexpr double kNorm = 1.4;
  int sr_;
  bool started_ = false;
  double freq_ = kA3, glide_from_ = kA3, glide_to_ = kA3;
  double glide_left_ = 0.0, glide_total_ = 1.0;
  double phase_ = 0.0;
  Biquad filter_;
  Slew gain_;
};

class JingleVoice final : public Voice {
 public:
  explicit JingleVoice(int sample_rate) : sr_(sample_rate) {}

  Stimulus stimulus() const override { return Stimulus::Jingle; }

  void set_params(const StimulusParams& p) override {
    pitch_ = p.pitch_hz;
    loudness_ = p.loudness;
    period_ = p.interval_s.value_or(kJingleGrainPeriod);
  }

  void render(std::span<double> out) override {
    const double length = kJingleGrainLength * sr_;
    const double attack = 0.004 * sr_;
    const double release = 0.008 * sr_;
    for (double& y : out) {
      if (loudness_ > 0.0) {
        if (until_next_ <= 0.0) {
          grain_ = Grain{pitch_ / sr_, loudness_, 0.0, 0.0};
          until_next_ += period_ * sr_;
        }
        until_next_ -= 1.0;
      } else {
        until_next_ = 0.0;
      }

      y = 0.0;
      if (grain_ && grain_->age < length) {
        const double a = grain_->age;
        double env = 1.0;
        if (a < attack) {
          env = a / attack;
        } else if (a > length - release) {
          env = 0.5 * (1.0 + std::cos(std::numbers::pi * (a - (length - release)) / release));
        }
        y = grain_->amplitude * env * std::sin(kTwoPi * grain_->phase);
        grain_->phase += grain_->increment;
        if (grain_->phase >= 1.0) grain_->phase -= 1.0;
        grain_->age += 1.0;
      }
    }
  }

 private:
  struct Grain {
    double increment;
    double amplitude;
    double phase;
    double age;
  };

  int sr_;
  double pitch_ = kJingleHigh, loudness_ = 0.0, period_ = kJingleGrainPeriod;
  double until_next_ = 0.0;
  std::optional<Grain> grain_;
};

class BellVoice final : public Voice {
 public:
  BellVoice(std::uint64_t seed, int sample_rate) : seed_(seed), sr_(sample_rate) {}

  Stimulus stimulus() const override { return Stimulus::Bell; }

  void set_params(const StimulusParams& p) override {
    if (!p.trigger) return;
    // The first strike uses the voice seed itself, matching bell_partials(seed).
    const auto partials = bell_partials(strikes_ == 0 ? seed_ : mix_seed(seed_, strikes_));
    ++strikes_;
    double total = 0.0;
    for (const auto& pt : partials) total += pt.amplitude;
    for (const auto& pt : partials) {
      ringing_.push_back({pt.freq_hz / sr_, p.loudness * pt.amplitude / total, pt.decay_s * sr_, 0.0, 0.0});
    }
  }

  void render(std::span<double> out) override {
    const double attack = 0.005 * sr_;
    const double length = kBellLength * sr_;
    for (double& y : out) {
      double acc = 0.0;
      for (auto& r : ringing_) {
        if (r.age >= length) continue;
        const double env = r.age < attack ? r.age / attack : std::exp(-(r.age - attack) / r.decay);
        acc += r.amplitude * env * std::sin(kTwoPi * r.phase);
        r.phase += r.increment;
        if (r.phase >= 1.0) r.phase -= 1.0;
        r.age += 1.0;
      }
      y = acc;
    }
    std::erase_if(ringing_, [&](const Ringing& r) { return r.age >= length; });
  }

 private:
  struct Ringing {
    double increment;
    double amplitude;
    double decay;
    double phase;
    double age;
  };

  std::uint64_t seed_;
  int sr_;
  std::uint64_t strikes_ = 0;
  std::vector<Ringing> ringing_;
};

}  // namespace

void Biquad::set_bandpass(double center_hz, double q, int sample_rate) {
  const double w0 = kTwoPi * center_hz / sample_rate;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double a0 = 1.0 + alpha;
  b0 = alpha / a0;
  b1 = 0.0;
  b2 = -alpha / a0;
  a1 = -2.0 * std::cos(w0) / a0;
  a2 = (1.0 - alpha) / a0;
}

void Biquad::set_highpass(double cutoff_hz, double q, int sample_rate) {
  const double w0 = kTwoPi * cutoff_hz / sample_rate;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double c = std::cos(w0);
  const double a0 = 1.0 + alpha;
  b0 = (1.0 + c) / 2.0 / a0;
  b1 = -(1.0 + c) / a0;
  b2 = b0;
  a1 = -2.0 * c / a0;
  a2 = (1.0 - alpha) / a0;
}

void Biquad::set_lowpass(double cutoff_hz, double q, int sample_rate) {
  const double w0 = kTwoPi * cutoff_hz / sample_rate;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double c = std::cos(w0);
  const double a0 = 1.0 + alpha;
  b0 = (1.0 - c) / 2.0 / a0;
  b1 = (1.0 - c) / a0;
  b2 = b0;
  a1 = -2.0 * c / a0;
  a2 = (1.0 - alpha) / a0;
}

std::array<BellPartial, 4> bell_partials(std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0xBE11));
  std::array<BellPartial, 4> out{};
  out[0] = {440.0, 1.0, 1.6};
  for (std::size_t i = 1; i < out.size(); ++i) {
    // Keep partials resolvable from each other and from the main frequency.
    double f = 0.0;
    bool clear = false;
    while (!clear) {
      f = rng.uniform(220.0, 880.0);
      clear = std::all_of(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(i),
                          [&](const BellPartial& p) { return std::abs(p.freq_hz - f) >= 15.0; });
    }
    out[i] = {f, rng.uniform(0.35, 0.7), rng.uniform(0.8, 1.4)};
  }
  return out;
}

std::unique_ptr<Voice> make_voice(Stimulus s, std::uint64_t seed, int sample_rate,
                                  const AssetLibrary* assets) {
  switch (s) {
    case Stimulus::Arpeggio: return std::make_unique<ArpeggioVoice>(sample_rate);
    case Stimulus::Drone: return std::make_unique<DroneVoice>(sample_rate);
    case Stimulus::Jingle: return std::make_unique<JingleVoice>(sample_rate);
    case Stimulus::Bell: return std::make_unique<BellVoice>(seed, sample_rate);
    case Stimulus::Droplets: return detail::make_droplets_voice(seed, sample_rate, assets);
    case Stimulus::Birds: return detail::make_birds_voice(seed, sample_rate, assets);
    case Stimulus::Water: return detail::make_water_voice(seed, sample_rate, assets);
    case Stimulus::Sizzle: return detail::make_sizzle_voice(seed, sample_rate, assets);
  }
  return nullptr;
}

}  // namespace sonimon
