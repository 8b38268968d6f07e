#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace sonimon {

inline constexpr int kDefaultSampleRate = 44100;

// Mono audio. Samples are nominally in [-1, 1].
struct AudioBuffer {
  int sample_rate = kDefaultSampleRate;
  std::vector<double> samples;

  AudioBuffer() = default;
  AudioBuffer(int rate, std::size_t length) : sample_rate(rate), samples(length, 0.0) {}

  std::size_t size() const { return samples.size(); }
  double duration() const { return static_cast<double>(samples.size()) / sample_rate; }
  std::span<const double> view() const { return samples; }
  std::span<double> view() { return samples; }
};

inline std::size_t samples_for(double seconds, int sample_rate) {
  return static_cast<std::size_t>(seconds * sample_rate + 0.5);
}

// Identity below the knee, smooth tanh compression above it; output stays in [-1, 1].
double soft_clip(double x, double knee = 0.8);
void soft_clip(std::span<double> samples, double knee = 0.8);

double rms(std::span<const double> samples);
double peak(std::span<const double> samples);

// RIFF/WAVE, 16-bit PCM, mono.
std::vector<std::uint8_t> encode_wav(const AudioBuffer& buffer);
void write_wav(const std::filesystem::path& path, const AudioBuffer& buffer);

// Reads 8/16/24/32-bit PCM or 32-bit float WAV; channels are averaged to mono.
// Throws std::runtime_error on malformed input.
AudioBuffer decode_wav(std::span<const std::uint8_t> bytes);
AudioBuffer read_wav(const std::filesystem::path& path);

// Linear-interpolation resampling to a new rate.
AudioBuffer resample(const AudioBuffer& in, int new_rate);

}  // namespace sonimon
