// Procedural stand-ins for the recorded nature sounds, plus asset loading.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <optional>

#include "natural_voices.hpp"
#include "sonimon/log.hpp"
#include "sonimon/rng.hpp"

namespace sonimon {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string asset_key(Stimulus s, std::string_view key) {
  return lower(stimulus_name(s)) + "/" + std::string(key);
}

struct AssetSlot {
  Stimulus stimulus;
  std::string_view key;
};

constexpr std::array<AssetSlot, 7> kAssetSlots = {{
    {Stimulus::Droplets, "drop"},
    {Stimulus::Birds, "misc"},
    {Stimulus::Birds, "ducks"},
    {Stimulus::Birds, "crows"},
    {Stimulus::Water, "crackling"},
    {Stimulus::Water, "boiling"},
    {Stimulus::Sizzle, "sizzle"},
}};

// Plays a buffer in a loop.
class Looper {
 public:
  explicit Looper(const AudioBuffer* buffer) : buffer_(buffer) {}
  double next() {
    if (!buffer_ || buffer_->samples.empty()) return 0.0;
    const double v = buffer_->samples[pos_];
    pos_ = (pos_ + 1) % buffer_->samples.size();
    return v;
  }

 private:
  const AudioBuffer* buffer_;
  std::size_t pos_ = 0;
};

// Exponentially distributed waiting times, in samples.
double poisson_wait(Rng& rng, double rate_hz, int sample_rate) {
  return -std::log(1.0 - rng.uniform()) / rate_hz * sample_rate;
}

// ---------------------------------------------------------------------------
// Droplets

class DropletsVoice final : public Voice {
 public:
  DropletsVoice(std::uint64_t seed, int sample_rate, const AssetLibrary* assets) : sr_(sample_rate) {
    const AudioBuffer* asset = assets ? assets->find(Stimulus::Droplets, "drop") : nullptr;
    sample_ = asset ? *asset : droplet_sample(seed, sample_rate);
  }

  Stimulus stimulus() const override { return Stimulus::Droplets; }

  void set_params(const StimulusParams& p) override {
    rate_ = p.playback_rate;
    loudness_ = p.loudness;
    interval_ = p.interval_s.value_or(1.5);
    started_ = true;
  }

  void render(std::span<double> out) override {
    const double length = static_cast<double>(sample_.size());
    for (double& y : out) {
      if (started_ && since_last_ >= interval_ * sr_) {
        if (loudness_ > 0.0) drops_.push_back({0.0, rate_, loudness_});
        since_last_ = 0.0;
      }
      since_last_ += 1.0;

      double acc = 0.0;
      for (auto& d : drops_) {
        const auto i = static_cast<std::size_t>(d.pos);
        const double frac = d.pos - static_cast<double>(i);
        const double a = sample_.samples[i];
        const double b = i + 1 < sample_.size() ? sample_.samples[i + 1] : 0.0;
        acc += d.amplitude * (a + (b - a) * frac);
        d.pos += d.rate;
      }
      std::erase_if(drops_, [&](const Drop& d) { return d.pos >= length; });
      y = acc;
    }
  }

 private:
  struct Drop {
    double pos;
    double rate;
    double amplitude;
  };

  int sr_;
  AudioBuffer sample_;
  double rate_ = 1.0, loudness_ = 0.0, interval_ = 1.5;
  double since_last_ = std::numeric_limits<double>::infinity();
  bool started_ = false;
  std::vector<Drop> drops_;
};

// ---------------------------------------------------------------------------
// Birds

struct Chirp {
  double phase = 0.0;
  double f0 = 0.0, sweep = 0.0;
  double age = 0.0, length = 0.0;
  double amplitude = 0.0;
};

// One bird singing phrases of short FM chirps in the 2-6 kHz band.
class Songbird {
 public:
  Songbird(std::uint64_t seed, int sample_rate) : rng_(seed), sr_(sample_rate) {
    wait_ = rng_.uniform(0.0, 0.8) * sr_;
  }

  double next() {
    if (!chirp_) {
      if (wait_ <= 0.0) start_chirp();
      wait_ -= 1.0;
      return 0.0;
    }
    auto& c = *chirp_;
    const double t = c.age / c.length;
    const double env = std::pow(std::sin(std::numbers::pi * t), 2.0);
    const double y = c.amplitude * env * std::sin(kTwoPi * c.phase);
    c.phase += (c.f0 + c.sweep * t) / sr_;
    if (c.phase >= 1.0) c.phase -= 1.0;
    c.age += 1.0;
    if (c.age >= c.length) {
      chirp_.reset();
      if (--left_in_phrase_ > 0) {
        wait_ = rng_.uniform(0.015, 0.06) * sr_;
      } else {
        wait_ = rng_.uniform(0.2, 1.2) * sr_;
      }
    }
    return y;
  }

 private:
  void start_chirp() {
    if (left_in_phrase_ <= 0) {
      left_in_phrase_ = 3 + static_cast<int>(rng_.below(6));
      base_ = rng_.uniform(2600.0, 5000.0);
    }
    Chirp c;
    c.f0 = std::clamp(base_ * rng_.uniform(0.9, 1.1), 2200.0, 5600.0);
    c.sweep = std::clamp(rng_.uniform(-900.0, 900.0), 2100.0 - c.f0, 5900.0 - c.f0);
    c.length = rng_.uniform(0.03, 0.09) * sr_;
    c.amplitude = rng_.uniform(0.4, 1.0);
    chirp_ = c;
  }

  Rng rng_;
  int sr_;
  double wait_ = 0.0;
  double base_ = 3000.0;
  int left_in_phrase_ = 0;
  std::optional<Chirp> chirp_;
};

// Series of harmonic calls, used for both ducks and crows.
struct CallShape {
  double f0_lo, f0_hi;      // fundamental range
  double band_hi;           // highest harmonic kept
  double formant_hz;        // emphasis center
  double len_lo, len_hi;    // call length (s)
  int count_lo, count_hi;   // calls per series
  double gap_lo, gap_hi;    // between calls (s)
  double rest_lo, rest_hi;  // between series (s)
  double noise;             // noise mix (harshness)
  double rasp_hz;           // amplitude modulation rate
  double droop;             // relative pitch fall over a call
};

constexpr CallShape kDuckShape = {300.0, 420.0, 1500.0, 900.0, 0.12, 0.2, 2, 5, 0.06, 0.15, 0.8, 1.8,
                                  0.15, 35.0, 0.05};
constexpr CallShape kCrowShape = {600.0, 750.0, 1700.0, 1100.0, 0.3, 0.45, 2, 4, 0.2, 0.35, 1.2, 2.5,
                                  0.45, 60.0, 0.1};

class CallStream {
 public:
  CallStream(const CallShape& shape, std::uint64_t seed, int sample_rate)
      : shape_(shape), rng_(seed), sr_(sample_rate) {
    noise_filter_.set_bandpass(shape.formant_hz, 1.2, sample_rate);
    wait_ = rng_.uniform(0.0, 0.5) * sr_;
  }

  double next() {
    const double noise = noise_filter_.process(rng_.bipolar());
    if (age_ >= length_) {
      if (wait_ <= 0.0) start_call();
      wait_ -= 1.0;
      if (age_ >= length_) return 0.0;
    }
    const double t = age_ / length_;
    const double attack = std::min(1.0, age_ / (0.01 * sr_));
    const double release = std::min(1.0, (length_ - age_) / (0.04 * sr_));
    const double rasp = 1.0 + 0.5 * std::sin(kTwoPi * shape_.rasp_hz * age_ / sr_);
    const double f = f0_ * (1.0 - shape_.droop * t);
    double tone = 0.0;
    double norm = 0.0;
    for (int k = 1; k * f <= shape_.band_hi; ++k) {
      const double w = std::exp(-std::pow((k * f - shape_.formant_hz) / 500.0, 2.0));
      tone += w * std::sin(kTwoPi * k * phase_);
      norm += w;
    }
    if (norm > 0.0) tone /= norm;
    phase_ += f / sr_;
    if (phase_ >= 1.0) phase_ -= 1.0;
    age_ += 1.0;
    if (age_ >= length_) {
      wait_ = (--left_ > 0 ? rng_.uniform(shape_.gap_lo, shape_.gap_hi)
                           : rng_.uniform(shape_.rest_lo, shape_.rest_hi)) * sr_;
    }
    const double y = (1.0 - shape_.noise) * tone + shape_.noise * 3.0 * noise;
    return attack * release * rasp * y;
  }

 private:
  void start_call() {
    if (left_ <= 0) {
      left_ = shape_.count_lo + static_cast<int>(rng_.below(
                                    static_cast<std::uint64_t>(shape_.count_hi - shape_.count_lo + 1)));
    }
    f0_ = rng_.uniform(shape_.f0_lo, shape_.f0_hi);
    length_ = rng_.uniform(shape_.len_lo, shape_.len_hi) * sr_;
    age_ = 0.0;
    phase_ = 0.0;
  }

  CallShape shape_;
  Rng rng_;
  int sr_;
  Biquad noise_filter_;
  double wait_ = 0.0;
  double age_ = 0.0, length_ = 0.0, f0_ = 0.0, phase_ = 0.0;
  int left_ = 0;
};

class BirdsVoice final : public Voice {
 public:
  BirdsVoice(std::uint64_t seed, int sample_rate, const AssetLibrary* assets)
      : sr_(sample_rate),
        noise_rng_(mix_seed(seed, 99)),
        ducks_(kDuckShape, mix_seed(seed, 100), sample_rate),
        crows_(kCrowShape, mix_seed(seed, 101), sample_rate),
        bed_asset_(assets ? assets->find(Stimulus::Birds, "misc") : nullptr),
        duck_asset_(assets ? assets->find(Stimulus::Birds, "ducks") : nullptr),
        crow_asset_(assets ? assets->find(Stimulus::Birds, "crows") : nullptr),
        bed_loop_(bed_asset_),
        duck_loop_(duck_asset_),
        crow_loop_(crow_asset_) {
    for (std::uint64_t i = 0; i < 4; ++i) singers_.emplace_back(mix_seed(seed, i), sample_rate);
    // Chorus floor limited to 2-6 kHz so the bed stays in its band.
    for (auto& hp : chorus_hp_) hp.set_highpass(2000.0, 0.707, sample_rate);
    for (auto& lp : chorus_lp_) lp.set_lowpass(6000.0, 0.707, sample_rate);
  }

  Stimulus stimulus() const override { return Stimulus::Birds; }

  void set_params(const StimulusParams& p) override {
    duck_gain_.set(p.selection == Selection::Ducks ? p.loudness : 0.0, kBirdCrossfade, sr_);
    crow_gain_.set(p.selection == Selection::Crows ? p.loudness : 0.0, kBirdCrossfade, sr_);
  }

  void render(std::span<double> out) override {
    for (double& y : out) {
      double chorus = noise_rng_.bipolar();
      for (auto& f : chorus_hp_) chorus = f.process(chorus);
      for (auto& f : chorus_lp_) chorus = f.process(chorus);
      double song = 0.0;
      for (auto& s : singers_) song += s.next();
      const double bed = bed_asset_ ? bed_loop_.next() : 0.3 * song + 0.35 * chorus;

      // The emergent streams always advance; only their gains follow the mapping.
      const double duck_synth = ducks_.next();
      const double crow_synth = crows_.next();
      const double duck = duck_asset_ ? duck_loop_.next() : duck_synth;
      const double crow = crow_asset_ ? crow_loop_.next() : crow_synth;
      y = kBirdBedLoudness * bed + duck_gain_.next() * duck + crow_gain_.next() * crow;
    }
  }

 private:
  int sr_;
  Rng noise_rng_;
  std::vector<Songbird> singers_;
  std::array<Biquad, 2> chorus_hp_;
  std::array<Biquad, 2> chorus_lp_;
  CallStream ducks_;
  CallStream crows_;
  const AudioBuffer* bed_asset_;
  const AudioBuffer* duck_asset_;
  const AudioBuffer* crow_asset_;
  Looper bed_loop_;
  Looper duck_loop_;
  Looper crow_loop_;
  detail::Slew duck_gain_;
  detail::Slew crow_gain_;
};

// ---------------------------------------------------------------------------
// Water

class Boiling {
 public:
  Boiling(std::uint64_t seed, int sample_rate) : rng_(seed), sr_(sample_rate) {
    rumble_.set_lowpass(400.0, 0.707, sample_rate);
    wait_ = poisson_wait(rng_, kRate, sr_);
  }

  double next() {
    while (wait_ <= 0.0) {
      Bubble b;
      b.f0 = rng_.uniform(300.0, 1200.0);
      b.decay = rng_.uniform(0.004, 0.012) * sr_;
      b.amplitude = rng_.uniform(0.2, 1.0);
      bubbles_.push_back(b);
      wait_ += poisson_wait(rng_, kRate, sr_);
    }
    wait_ -= 1.0;
    double acc = 0.0;
    for (auto& b : bubbles_) {
      acc += b.amplitude * std::exp(-b.age / b.decay) * std::sin(kTwoPi * b.phase);
      b.phase += b.f0 * (1.0 + 0.5 * b.age / (5.0 * b.decay)) / sr_;
      b.age += 1.0;
    }
    std::erase_if(bubbles_, [](const Bubble& b) { return b.age > 5.0 * b.decay; });
    return 0.45 * acc + 0.5 * rumble_.process(rng_.bipolar());
  }

 private:
  struct Bubble {
    double f0 = 0, decay = 1, amplitude = 0, phase = 0, age = 0;
  };
  static constexpr double kRate = 80.0;
  Rng rng_;
  int sr_;
  Biquad rumble_;
  double wait_ = 0.0;
  std::vector<Bubble> bubbles_;
};

class Crackling {
 public:
  Crackling(std::uint64_t seed, int sample_rate) : rng_(seed), sr_(sample_rate) {
    wait_ = poisson_wait(rng_, kRate, sr_);
  }

  double next() {
    while (wait_ <= 0.0) {
      Crack c;
      c.decay = rng_.uniform(0.0003, 0.001) * sr_;
      c.length = rng_.uniform(0.0005, 0.003) * sr_;
      c.amplitude = rng_.uniform(0.3, 1.0);
      c.ping_hz = rng_.uniform() < 0.3 ? rng_.uniform(2000.0, 5000.0) : 0.0;
      cracks_.push_back(c);
      wait_ += poisson_wait(rng_, kRate, sr_);
    }
    wait_ -= 1.0;
    double acc = 0.0;
    for (auto& c : cracks_) {
      const double noise = rng_.bipolar();
      if (c.age < c.length) acc += c.amplitude * std::exp(-c.age / c.decay) * noise;
      if (c.ping_hz > 0.0) {
        acc += 0.3 * c.amplitude * std::exp(-c.age / (0.01 * sr_)) * std::sin(kTwoPi * c.ping_hz * c.age / sr_);
      }
      c.age += 1.0;
    }
    std::erase_if(cracks_, [&](const Crack& c) { return c.age > 0.05 * sr_; });
    return acc;
  }

 private:
  struct Crack {
    double decay = 1, length = 0, amplitude = 0, ping_hz = 0, age = 0;
  };
  static constexpr double kRate = 30.0;
  Rng rng_;
  int sr_;
  double wait_ = 0.0;
  std::vector<Crack> cracks_;
};

class WaterVoice final : public Voice {
 public:
  WaterVoice(std::uint64_t seed, int sample_rate, const AssetLibrary* assets)
      : sr_(sample_rate),
        boiling_(mix_seed(seed, 1), sample_rate),
        crackling_(mix_seed(seed, 2), sample_rate),
        boil_asset_(assets ? assets->find(Stimulus::Water, "boiling") : nullptr),
        crack_asset_(assets ? assets->find(Stimulus::Water, "crackling") : nullptr),
        boil_loop_(boil_asset_),
        crack_loop_(crack_asset_) {}

  Stimulus stimulus() const override { return Stimulus::Water; }

  void set_params(const StimulusParams& p) override {
    boil_gain_.set(p.selection == Selection::Boiling ? p.loudness : 0.0, 0.05, sr_);
    crack_gain_.set(p.selection == Selection::Crackling ? p.loudness : 0.0, 0.05, sr_);
  }

  void render(std::span<double> out) override {
    for (double& y : out) {
      // Both textures always advance so their streams do not depend on the mapping.
      const double boil = boil_asset_ ? boil_loop_.next() : boiling_.next();
      const double crack = crack_asset_ ? crack_loop_.next() : crackling_.next();
      y = boil_gain_.next() * boil + crack_gain_.next() * crack;
    }
  }

 private:
  int sr_;
  Boiling boiling_;
  Crackling crackling_;
  const AudioBuffer* boil_asset_;
  const AudioBuffer* crack_asset_;
  Looper boil_loop_;
  Looper crack_loop_;
  detail::Slew boil_gain_;
  detail::Slew crack_gain_;
};

// ---------------------------------------------------------------------------
// Sizzle

class SizzleVoice final : public Voice {
 public:
  SizzleVoice(std::uint64_t seed, int sample_rate, const AssetLibrary* assets)
      : rng_(seed), sr_(sample_rate), asset_(assets ? assets->find(Stimulus::Sizzle, "sizzle") : nullptr) {
    hiss_.set_highpass(3000.0, 0.707, sample_rate);
  }

  Stimulus stimulus() const override { return Stimulus::Sizzle; }

  void set_params(const StimulusParams& p) override {
    if (p.trigger) events_.push_back({0.0, p.loudness});
  }

  void render(std::span<double> out) override {
    const double length = kSizzleLength * sr_;
    const double attack = 0.01 * sr_;
    const double decay = 0.35 * sr_;
    for (double& y : out) {
      const double hiss = hiss_.process(rng_.bipolar());
      const double spike = rng_.uniform() < 0.01 ? rng_.bipolar() : 0.0;
      double acc = 0.0;
      for (auto& e : events_) {
        if (asset_) {
          const auto i = static_cast<std::size_t>(e.age);
          if (i < asset_->size()) acc += e.amplitude * asset_->samples[i];
        } else if (e.age < length) {
          const double env = e.age < attack ? e.age / attack : std::exp(-(e.age - attack) / decay);
          const double tail = std::min(1.0, (length - e.age) / (0.05 * sr_));
          acc += e.amplitude * env * tail * (1.2 * hiss + 0.8 * spike);
        }
        e.age += 1.0;
      }
      const double limit = asset_ ? static_cast<double>(asset_->size()) : length;
      std::erase_if(events_, [&](const Event& e) { return e.age >= limit; });
      y = acc;
    }
  }

 private:
  struct Event {
    double age;
    double amplitude;
  };
  Rng rng_;
  int sr_;
  const AudioBuffer* asset_;
  Biquad hiss_;
  std::vector<Event> events_;
};

}  // namespace

AudioBuffer droplet_sample(std::uint64_t seed, int sample_rate) {
  Rng rng(mix_seed(seed, 0xD209));
  AudioBuffer out(sample_rate, samples_for(0.15, sample_rate));
  Biquad click;
  click.set_bandpass(1000.0, 1.5, sample_rate);
  const double f_start = kDropletBandLow + 50.0;
  const double f_end = kDropletBandHigh - 50.0;
  const double sweep = 0.03 * sample_rate;
  const double decay = 0.03 * sample_rate;
  double phase = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double t = static_cast<double>(i);
    const double f = f_start * std::pow(f_end / f_start, std::min(1.0, t / sweep));
    const double attack = std::min(1.0, t / (0.001 * sample_rate));
    const double ring = attack * std::exp(-t / decay) * std::sin(kTwoPi * phase);
    const double burst = click.process(rng.bipolar()) * std::exp(-t / (0.002 * sample_rate));
    phase += f / sample_rate;
    if (phase >= 1.0) phase -= 1.0;
    out.samples[i] = 0.9 * ring + 0.5 * burst;
  }
  return out;
}

AssetLibrary AssetLibrary::load(const std::filesystem::path& dir, int sample_rate) {
  AssetLibrary lib;
  for (const auto& slot : kAssetSlots) {
    const auto key = asset_key(slot.stimulus, slot.key);
    const auto path = dir / (key + ".wav");
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) continue;
    try {
      auto buffer = read_wav(path);
      if (buffer.samples.empty()) throw std::runtime_error("empty sample");
      lib.buffers_.emplace(key, resample(buffer, sample_rate));
    } catch (const std::exception& e) {
      std::string msg = "asset " + path.string() + " unusable (" + e.what() +
                        "), falling back to the procedural generator";
      log_warning(msg);
      lib.warnings_.push_back(std::move(msg));
    }
  }
  return lib;
}

const AudioBuffer* AssetLibrary::find(Stimulus s, std::string_view key) const {
  const auto it = buffers_.find(asset_key(s, key));
  return it == buffers_.end() ? nullptr : &it->second;
}

namespace detail {

std::unique_ptr<Voice> make_droplets_voice(std::uint64_t seed, int sample_rate, const AssetLibrary* assets) {
  return std::make_unique<DropletsVoice>(seed, sample_rate, assets);
}
std::unique_ptr<Voice> make_birds_voice(std::uint64_t seed, int sample_rate, const AssetLibrary* assets) {
  return std::make_unique<BirdsVoice>(seed, sample_rate, assets);
}
std::unique_ptr<Voice> make_water_voice(std::uint64_t seed, int sample_rate, const AssetLibrary* assets) {
  return std::make_unique<WaterVoice>(seed, sample_rate, assets);
}
std::unique_ptr<Voice> make_sizzle_voice(std::uint64_t seed, int sample_rate, const AssetLibrary* assets) {
  return std::make_unique<SizzleVoice>(seed, sample_rate, assets);
}

}  // namespace detail

}  // namespace sonimon
