#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>

#include "sonimon/voices.hpp"

namespace sonimon::detail {

// Linear slew toward a target; first assignment jumps.
class Slew {
 public:
  void set(double target, double seconds, int sample_rate) {
    if (!initialized_) {
      value_ = target;
      initialized_ = true;
    }
    target_ = target;
    const double span = std::max(std::abs(target_ - value_), 1e-9);
    step_ = span / std::max(1.0, seconds * sample_rate);
  }
  double next() {
    if (value_ < target_) {
      value_ = std::min(target_, value_ + step_);
    } else if (value_ > target_) {
      value_ = std::max(target_, value_ - step_);
    }
    return value_;
  }

 private:
  double value_ = 0.0, target_ = 0.0, step_ = 0.0;
  bool initialized_ = false;
};

std::unique_ptr<Voice> make_droplets_voice(std::uint64_t seed, int sample_rate, const AssetLibrary* assets);
std::unique_ptr<Voice> make_birds_voice(std::uint64_t seed, int sample_rate, const AssetLibrary* assets);
std::unique_ptr<Voice> make_water_voice(std::uint64_t seed, int sample_rate, const AssetLibrary* assets);
std::unique_ptr<Voice> make_sizzle_voice(std::uint64_t seed, int sample_rate, const AssetLibrary* assets);

}  // namespace sonimon::detail
