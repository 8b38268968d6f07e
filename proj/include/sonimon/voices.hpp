#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sonimon/audio.hpp"
#include "sonimon/ecology.hpp"

namespace sonimon {

// Fixed voice constants.
inline constexpr double kArpeggioAttack = 0.010;
inline constexpr double kArpeggioDecay = 0.4;
inline constexpr std::array<double, 3> kArpeggioMotive = {0.0, 4.0, 7.0};
inline constexpr double kDroneQ = 2.0;
inline constexpr double kDroneGlide = 0.100;
inline constexpr double kJingleGrainLength = 0.060;
inline constexpr double kBellLength = 4.0;
inline constexpr double kSizzleLength = 2.0;
inline constexpr double kDropletBandLow = 800.0;
inline constexpr double kDropletBandHigh = 1200.0;
inline constexpr double kBirdCrossfade = 0.5;

struct Biquad {
  double b0 = 1, b1 = 0, b2 = 0, a1 = 0, a2 = 0;
  double z1 = 0, z2 = 0;

  // Band-pass, 0 dB peak gain at the center.
  void set_bandpass(double center_hz, double q, int sample_rate);
  void set_highpass(double cutoff_hz, double q, int sample_rate);
  void set_lowpass(double cutoff_hz, double q, int sample_rate);

  double process(double x) {
    const double y = b0 * x + z1;
    z1 = b1 * x - a1 * y + z2;
    z2 = b2 * x - a2 * y;
    return y;
  }
};

// Optional user-supplied recordings, laid out as <dir>/<stimulus>/<key>.wav
// (e.g. water/boiling.wav, birds/ducks.wav, droplets/drop.wav, sizzle/sizzle.wav).
class AssetLibrary {
 public:
  AssetLibrary() = default;

  // Missing files are skipped silently; malformed ones are skipped with a warning.
  static AssetLibrary load(const std::filesystem::path& dir, int sample_rate = kDefaultSampleRate);

  const AudioBuffer* find(Stimulus s, std::string_view key) const;
  const std::vector<std::string>& warnings() const { return warnings_; }
  bool empty() const { return buffers_.empty(); }

 private:
  std::map<std::string, AudioBuffer> buffers_;
  std::vector<std::string> warnings_;
};

// A stimulus voice. Parameter updates take effect at the next rendered sample.
class Voice {
 public:
  virtual ~Voice() = default;
  virtual Stimulus stimulus() const = 0;
  virtual void set_params(const StimulusParams& p) = 0;
  // Overwrites `out` with the next out.size() samples.
  virtual void render(std::span<double> out) = 0;
};

std::unique_ptr<Voice> make_voice(Stimulus s, std::uint64_t seed, int sample_rate = kDefaultSampleRate,
                                  const AssetLibrary* assets = nullptr);

struct BellPartial {
  double freq_hz;
  double amplitude;
  double decay_s;  // exponential time constant
};

// Main 440 Hz partial first, then the three seeded inharmonic partials.
std::array<BellPartial, 4> bell_partials(std::uint64_t seed);

// Procedural droplet at playback rate 1.0 (resonance in the 0.8-1.2 kHz band).
AudioBuffer droplet_sample(std::uint64_t seed, int sample_rate = kDefaultSampleRate);

}  // namespace sonimon
