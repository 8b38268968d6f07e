#include "sonimon/synth.hpp"

#include <algorithm>
#include <cmath>

#include "sonimon/rng.hpp"

namespace sonimon {

namespace {

AudioBuffer render_constant(Stimulus s, const StimulusParams& params, double duration, std::uint64_t seed,
                            const AssetLibrary* assets, int sample_rate) {
  auto voice = make_voice(s, seed, sample_rate, assets);
  voice->set_params(params);
  AudioBuffer out(sample_rate, samples_for(duration, sample_rate));
  voice->render(out.view());
  return out;
}

std::uint64_t voice_seed(std::uint64_t seed, Stimulus s) {
  return mix_seed(seed, 0x5EED0000ULL + static_cast<std::uint64_t>(s));
}

}  // namespace

AudioBuffer render_arpeggio(const StimulusParams& params, double duration, int sample_rate) {
  return render_constant(Stimulus::Arpeggio, params, duration, 0, nullptr, sample_rate);
}

AudioBuffer render_drone(const StimulusParams& params, double duration, int sample_rate) {
  return render_constant(Stimulus::Drone, params, duration, 0, nullptr, sample_rate);
}

AudioBuffer render_jingle(const StimulusParams& params, double duration, int sample_rate) {
  return render_constant(Stimulus::Jingle, params, duration, 0, nullptr, sample_rate);
}

AudioBuffer render_bell(std::uint64_t seed, int sample_rate) {
  auto voice = make_voice(Stimulus::Bell, seed, sample_rate);
  voice->set_params(map_pt_alarm(Stimulus::Bell, kPtThreshold, 0.0, false));
  AudioBuffer out(sample_rate, samples_for(kBellLength, sample_rate));
  voice->render(out.view());
  return out;
}

AudioBuffer render_natural(Stimulus stimulus, const StimulusParams& params, double duration,
                           std::uint64_t seed, const AssetLibrary* assets, int sample_rate) {
  if (stimulus != Stimulus::Droplets && stimulus != Stimulus::Birds && stimulus != Stimulus::Water &&
      stimulus != Stimulus::Sizzle) {
    throw std::invalid_argument("render_natural: not a natural stimulus");
  }
  return render_constant(stimulus, params, duration, seed, assets, sample_rate);
}

AudioBuffer render_voice(Stimulus stimulus, const std::vector<ParamUpdate>& updates, double duration,
                         std::uint64_t seed, const AssetLibrary* assets, int sample_rate) {
  auto voice = make_voice(stimulus, seed, sample_rate, assets);
  AudioBuffer out(sample_rate, samples_for(duration, sample_rate));
  std::size_t pos = 0;
  for (std::size_t i = 0; i <= updates.size(); ++i) {
    const std::size_t until =
        i < updates.size() ? std::min(out.size(), samples_for(updates[i].t, sample_rate)) : out.size();
    if (until > pos) {
      voice->render(std::span<double>(out.samples).subspan(pos, until - pos));
      pos = until;
    }
    if (i < updates.size()) voice->set_params(updates[i].params);
  }
  return out;
}

Mixer::Mixer(EcologyId ecology_id, std::uint64_t seed, int sample_rate, const AssetLibrary* assets)
    : ecology_(&sonimon::ecology(ecology_id)), sample_rate_(sample_rate) {
  for (std::size_t g = 0; g < voices_.size(); ++g) {
    const Stimulus s = ecology_->stimuli[g];
    voices_[g] = make_voice(s, voice_seed(seed, s), sample_rate, assets);
  }
}

std::array<StimulusParams, 4> Mixer::apply(const CriterionFrame& frame) {
  auto params = map_frame(frame, *ecology_, alarm_);
  for (std::size_t g = 0; g < voices_.size(); ++g) voices_[g]->set_params(params[g]);
  return params;
}

void Mixer::render(std::span<double> out, std::array<std::span<double>, 4>* stems) {
  scratch_.resize(out.size());
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t g = 0; g < voices_.size(); ++g) {
    std::span<double> target = stems ? (*stems)[g].first(out.size()) : std::span<double>(scratch_);
    voices_[g]->render(target);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += target[i];
  }
}

MixResult mix_level(const std::vector<CriterionFrame>& frames, EcologyId ecology_id, std::uint64_t seed,
                    const MixOptions& options) {
  MixResult result;
  const int sr = options.sample_rate;
  result.mix.sample_rate = sr;
  if (frames.empty()) return result;

  const double period = frames.size() > 1 ? frames[1].t - frames[0].t : 1.0 / kDefaultFrameRate;
  const std::size_t total = samples_for(frames.back().t + period, sr);
  result.mix.samples.assign(total, 0.0);
  if (options.keep_stems) {
    for (auto& s : result.stems) s = AudioBuffer(sr, total);
  }

  Mixer mixer(ecology_id, seed, sr, options.assets);
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const auto params = mixer.apply(frames[k]);
    if (params[3].trigger) result.alarm_times.push_back(frames[k].t);

    const std::size_t begin = std::min(total, samples_for(frames[k].t, sr));
    const std::size_t end = k + 1 < frames.size() ? std::min(total, samples_for(frames[k + 1].t, sr)) : total;
    if (end <= begin) continue;
    auto out = std::span<double>(result.mix.samples).subspan(begin, end - begin);
    if (options.keep_stems) {
      std::array<std::span<double>, 4> stems;
      for (std::size_t g = 0; g < 4; ++g) stems[g] = std::span<double>(result.stems[g].samples).subspan(begin, end - begin);
      mixer.render(out, &stems);
    } else {
      mixer.render(out);
    }
  }
  soft_clip(result.mix.view());
  return result;
}

LiveRenderer::LiveRenderer(EcologyId ecology, std::uint64_t seed, int sample_rate, std::size_t block_size,
                           const AssetLibrary* assets)
    : mixer_(ecology, seed, sample_rate, assets), block_size_(block_size) {}

void LiveRenderer::enqueue(const CriterionFrame& frame) {
  std::lock_guard lock(mutex_);
  queue_.push_back(frame);
}

void LiveRenderer::close() {
  std::lock_guard lock(mutex_);
  closed_ = true;
}

std::vector<double> LiveRenderer::next_block() {
  std::deque<CriterionFrame> pending;
  bool closed = false;
  {
    std::lock_guard lock(mutex_);
    closed = closed_;
    // Only take frames that fall inside this block; later ones stay queued.
    const double block_end = static_cast<double>(position_ + block_size_) / mixer_.sample_rate();
    while (!queue_.empty() && queue_.front().t < block_end) {
      pending.push_back(queue_.front());
      queue_.pop_front();
    }
    if (closed && pending.empty() && queue_.empty() &&
        (end_time_ < 0.0 || position() >= end_time_)) {
      return {};
    }
  }

  std::vector<double> block(block_size_, 0.0);
  std::size_t pos = 0;
  const int sr = mixer_.sample_rate();
  for (const auto& frame : pending) {
    const std::size_t at = samples_for(frame.t, sr);
    const std::size_t local = at > position_ ? std::min(block_size_, at - position_) : 0;
    if (local > pos) {
      mixer_.render(std::span<double>(block).subspan(pos, local - pos));
      pos = local;
    }
    mixer_.apply(frame);
  }
  if (pos < block_size_) mixer_.render(std::span<double>(block).subspan(pos));
  position_ += block_size_;
  soft_clip(block);
  return block;
}

}  // namespace sonimon
