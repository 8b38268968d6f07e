#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <vector>

#include "sonimon/audio.hpp"
#include "sonimon/ecology.hpp"
#include "sonimon/process_sim.hpp"
#include "sonimon/voices.hpp"

namespace sonimon {

inline constexpr std::size_t kDefaultBlockSize = 1024;

// Constant-parameter renders of a single voice.
AudioBuffer render_arpeggio(const StimulusParams& params, double duration,
                            int sample_rate = kDefaultSampleRate);
AudioBuffer render_drone(const StimulusParams& params, double duration,
                         int sample_rate = kDefaultSampleRate);
AudioBuffer render_jingle(const StimulusParams& params, double duration,
                          int sample_rate = kDefaultSampleRate);
// One strike, kBellLength seconds.
AudioBuffer render_bell(std::uint64_t seed, int sample_rate = kDefaultSampleRate);
AudioBuffer render_natural(Stimulus stimulus, const StimulusParams& params, double duration,
                           std::uint64_t seed, const AssetLibrary* assets = nullptr,
                           int sample_rate = kDefaultSampleRate);

// Renders an arbitrary voice driven by a list of (time, params) updates.
struct ParamUpdate {
  double t;
  StimulusParams params;
};
AudioBuffer render_voice(Stimulus stimulus, const std::vector<ParamUpdate>& updates, double duration,
                         std::uint64_t seed, const AssetLibrary* assets = nullptr,
                         int sample_rate = kDefaultSampleRate);

// Four voices of one ecology driven frame by frame.
class Mixer {
 public:
  Mixer(EcologyId ecology, std::uint64_t seed, int sample_rate = kDefaultSampleRate,
        const AssetLibrary* assets = nullptr);

  const Ecology& ecology() const { return *ecology_; }
  int sample_rate() const { return sample_rate_; }

  // Maps the frame and forwards the parameters to the voices. Returns them.
  std::array<StimulusParams, 4> apply(const CriterionFrame& frame);

  // Renders the next out.size() samples of the (unclipped) sum; optional
  // per-voice stems must each be at least out.size() long.
  void render(std::span<double> out, std::array<std::span<double>, 4>* stems = nullptr);

 private:
  const Ecology* ecology_;
  int sample_rate_;
  AlarmState alarm_;
  std::array<std::unique_ptr<Voice>, 4> voices_;
  std::vector<double> scratch_;
};

struct MixOptions {
  int sample_rate = kDefaultSampleRate;
  const AssetLibrary* assets = nullptr;
  bool keep_stems = false;
};

struct MixResult {
  AudioBuffer mix;                  // soft-clipped sum
  std::array<AudioBuffer, 4> stems; // WPD, PH, WPT, PT voices; empty unless requested
  std::vector<double> alarm_times;  // seconds at which the PT alarm fired
};

// Frame k is in effect over [t_k, t_{k+1}); the last frame lasts one frame period.
MixResult mix_level(const std::vector<CriterionFrame>& frames, EcologyId ecology, std::uint64_t seed,
                    const MixOptions& options = {});

// Live mode: a producer enqueues time-stamped frames; a single consumer pulls
// fixed-size blocks. Frames take effect at the first block sample at or after t.
class LiveRenderer {
 public:
  LiveRenderer(EcologyId ecology, std::uint64_t seed, int sample_rate = kDefaultSampleRate,
               std::size_t block_size = kDefaultBlockSize, const AssetLibrary* assets = nullptr);

  void enqueue(const CriterionFrame& frame);
  // Marks the end of input; next_block() then drains what is left.
  void close();

  // Next block of soft-clipped samples. Returns an empty vector once closed,
  // all updates are applied and end_time (if set) has been reached.
  std::vector<double> next_block();

  void set_end_time(double seconds) { end_time_ = seconds; }
  double position() const { return static_cast<double>(position_) / mixer_.sample_rate(); }

 private:
  Mixer mixer_;
  std::size_t block_size_;
  std::size_t position_ = 0;
  double end_time_ = -1.0;
  std::mutex mutex_;
  std::deque<CriterionFrame> queue_;
  bool closed_ = false;
};

}  // namespace sonimon
