#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "spectral.hpp"
#include "sonimon/synth.hpp"

using namespace sonimon;
using testkit::peak_frequency;

namespace {

constexpr int kRate = 44100;

std::span<const double> segment(const AudioBuffer& b, double from, double length) {
  const auto a = samples_for(from, b.sample_rate);
  const auto n = std::min(samples_for(length, b.sample_rate), b.size() - a);
  return b.view().subspan(a, n);
}

bool all_finite_in_range(const AudioBuffer& b) {
  return std::all_of(b.samples.begin(), b.samples.end(),
                     [](double s) { return std::isfinite(s) && s >= -1.0 && s <= 1.0; });
}

StimulusParams idle(Stimulus s) { return idle_params(s); }

}  // namespace

TEST_CASE("biquad band-pass has unit gain at the center") {
  Biquad f;
  f.set_bandpass(1000.0, 2.0, kRate);
  double peak_out = 0.0;
  for (int i = 0; i < kRate; ++i) {
    const double y = f.process(std::sin(2 * std::numbers::pi * 1000.0 * i / kRate));
    if (i > kRate / 2) peak_out = std::max(peak_out, std::abs(y));
  }
  CHECK(peak_out == doctest::Approx(1.0).epsilon(0.01));

  Biquad g;
  g.set_bandpass(1000.0, 2.0, kRate);
  double off = 0.0;
  for (int i = 0; i < kRate; ++i) {
    const double y = g.process(std::sin(2 * std::numbers::pi * 8000.0 * i / kRate));
    if (i > kRate / 2) off = std::max(off, std::abs(y));
  }
  CHECK(off < 0.2);
}

TEST_CASE("arpeggio idle motive: onsets every 1.5 s, tonic third fifth") {
  const auto p = idle(Stimulus::Arpeggio);
  auto b = render_arpeggio(p, 6.0);
  const double top = peak(b.view());
  REQUIRE(top > 0.0);
  auto onsets = testkit::amplitude_onsets(b.view(), 0.25 * top, samples_for(0.5, kRate));
  REQUIRE(onsets.size() == 4);
  const std::array<double, 4> expected_t = {0.0, 1.5, 3.0, 4.5};
  for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(onsets[i] / double(kRate) - expected_t[i]) <= 0.01);
  CHECK(onsets[0] <= samples_for(0.01, kRate));

  const std::array<double, 4> expected_f = {523.25, 659.26, 784.0, 523.25};
  for (std::size_t i = 0; i < 4; ++i) {
    const double f = peak_frequency(segment(b, expected_t[i] + 0.02, 0.6), kRate, 400, 1000);
    CHECK(std::abs(f - expected_f[i]) <= 1.0);
  }
}

TEST_CASE("arpeggio envelope: sharp attack, exponential decay") {
  auto b = render_arpeggio(idle(Stimulus::Arpeggio), 1.4);
  // Peak of the first note is reached within the attack time.
  std::size_t arg = 0;
  for (std::size_t i = 0; i < samples_for(0.1, kRate); ++i)
    if (std::abs(b.samples[i]) > std::abs(b.samples[arg])) arg = i;
  CHECK(arg <= samples_for(0.012, kRate));
  const double early = rms(segment(b, 0.1, 0.05));
  const double late = rms(segment(b, 0.5, 0.05));
  // exp(-0.4 / 0.4)
  CHECK(late / early == doctest::Approx(std::exp(-1.0)).epsilon(0.05));
}

TEST_CASE("arpeggio silence and restart") {
  auto p = idle(Stimulus::Arpeggio);
  p.loudness = 0.0;
  auto z = render_arpeggio(p, 2.0);
  CHECK(std::all_of(z.samples.begin(), z.samples.end(), [](double s) { return s == 0.0; }));

  // A change at 0.7 s starts a new motive at once instead of at 1.5 s.
  auto q = idle(Stimulus::Arpeggio);
  auto louder = map_arpeggio(NormalizedDeviation::from_nd(2.0), NormalizedDeviation::from_nd(0.0));
  auto b = render_voice(Stimulus::Arpeggio, {{0.0, q}, {0.7, louder}}, 2.0, 0);
  auto onsets = testkit::amplitude_onsets(segment(b, 0.65, 1.0), 0.05, samples_for(0.3, kRate));
  REQUIRE(!onsets.empty());
  CHECK(onsets[0] / double(kRate) + 0.65 <= 0.7 + 0.1);
  // The restarted motive begins on the (new) tonic.
  CHECK(std::abs(peak_frequency(segment(b, 0.72, 0.5), kRate, 400, 1500) - louder.pitch_hz) <= 2.0);
}

TEST_CASE("drone idle peak at 220 Hz") {
  auto b = render_drone(idle(Stimulus::Drone), 2.0);
  CHECK(std::abs(peak_frequency(segment(b, 0.2, 1.8), kRate, 50, 5000) - 220.0) <= 2.0);
  CHECK(all_finite_in_range(b));
}

TEST_CASE("drone loudness scales RMS linearly") {
  auto p = idle(Stimulus::Drone);
  p.loudness = 0.1;
  const double a = rms(segment(render_drone(p, 2.0), 0.5, 1.5));
  p.loudness = 0.4;
  const double c = rms(segment(render_drone(p, 2.0), 0.5, 1.5));
  CHECK(c / a == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("drone glides without clicks and never gaps") {
  auto lo = idle(Stimulus::Drone);
  auto hi = map_drone(NormalizedDeviation::from_nd(3.0));
  auto b = render_voice(Stimulus::Drone, {{0.0, lo}, {1.0, hi}, {2.0, lo}}, 3.0, 0);
  double jump = 0.0;
  for (std::size_t i = 1; i < b.size(); ++i) jump = std::max(jump, std::abs(b.samples[i] - b.samples[i - 1]));
  CHECK(jump <= 0.5);
  // Silent run longer than 20 ms anywhere after the first few ms?
  std::size_t run = 0, worst = 0;
  for (std::size_t i = samples_for(0.05, kRate); i < b.size(); ++i) {
    run = std::abs(b.samples[i]) < 1e-4 ? run + 1 : 0;
    worst = std::max(worst, run);
  }
  CHECK(worst < samples_for(0.02, kRate));
  CHECK(std::abs(peak_frequency(segment(b, 1.3, 0.6), kRate, 50, 2000) - hi.pitch_hz) <= 2.0);
}

TEST_CASE("jingle grains") {
  SUBCASE("silent in tolerance") {
    auto b = render_jingle(idle(Stimulus::Jingle), 1.0);
    CHECK(std::all_of(b.samples.begin(), b.samples.end(), [](double s) { return s == 0.0; }));
  }
  SUBCASE("tier 0.2 at 880 Hz") {
    auto p = map_jingle(NormalizedDeviation::from_nd(2.5));
    REQUIRE(p.loudness == doctest::Approx(0.2));
    REQUIRE(p.pitch_hz == 880.0);
    auto b = render_jingle(p, 1.0);
    auto onsets = testkit::amplitude_onsets(b.view(), 0.02, samples_for(0.03, kRate));
    CHECK(onsets.size() >= 7);
    auto lengths = testkit::burst_lengths(b.view(), 0.02, samples_for(0.005, kRate));
    REQUIRE(lengths.size() >= 7);
    for (auto n : lengths) CHECK(n / double(kRate) == doctest::Approx(0.06).epsilon(0.10));
  }
  SUBCASE("pitch follows the direction") {
    // One grain at a time; the full train has an 8 Hz line spectrum.
    auto hot = render_jingle(map_jingle(NormalizedDeviation::from_nd(2.5)), 0.06);
    auto cold = render_jingle(map_jingle(NormalizedDeviation::from_nd(-2.5)), 0.06);
    CHECK(std::abs(peak_frequency(hot.view(), kRate, 100, 2000) - 880.0) <= 2.0);
    CHECK(std::abs(peak_frequency(cold.view(), kRate, 100, 2000) - 220.0) <= 2.0);
  }
  SUBCASE("RMS scales with tier loudness") {
    auto one = render_jingle(map_jingle(NormalizedDeviation::from_nd(1.5)), 2.0);
    auto two = render_jingle(map_jingle(NormalizedDeviation::from_nd(2.5)), 2.0);
    CHECK(rms(two.view()) / rms(one.view()) == doctest::Approx(2.0).epsilon(0.05));
  }
}

TEST_CASE("bell partials") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto p = bell_partials(seed);
    CHECK(p[0].freq_hz == 440.0);
    for (std::size_t i = 1; i < 4; ++i) {
      CHECK(p[i].freq_hz >= 220.0);
      CHECK(p[i].freq_hz <= 880.0);
      CHECK(p[i].decay_s >= 0.8);
    }
  }
  CHECK(bell_partials(5)[1].freq_hz != bell_partials(6)[1].freq_hz);
}

TEST_CASE("bell render: spectrum, envelope, determinism") {
  for (std::uint64_t seed : {1ULL, 42ULL, 977ULL}) {
    auto b = render_bell(seed);
    CHECK(b.duration() >= 2.0);
    CHECK(all_finite_in_range(b));
    auto peaks = testkit::spectral_peaks(b.view(), kRate, 100, 3000, 0.1);
    REQUIRE(peaks.size() >= 4);
    CHECK(std::any_of(peaks.begin(), peaks.end(), [](double f) { return std::abs(f - 440.0) <= 2.0; }));
    for (double f : peaks) {
      CHECK(f >= 218.0);
      CHECK(f <= 882.0);
    }
    // Every seeded partial shows up in the spectrum.
    for (const auto& pt : bell_partials(seed)) {
      CHECK(std::any_of(peaks.begin(), peaks.end(), [&](double f) { return std::abs(f - pt.freq_hz) <= 2.0; }));
    }
    // Partials beat against each other, so the attack is read as the first
    // time the waveform reaches half its overall peak.
    const double top = peak(b.view());
    std::size_t first = 0;
    while (std::abs(b.samples[first]) < 0.5 * top) ++first;
    CHECK(first <= samples_for(0.02, kRate));
    // Envelope after one second has not fallen faster than a 0.8 s time constant.
    CHECK(rms(segment(b, 1.05, 0.1)) / rms(segment(b, 0.05, 0.1)) >= std::exp(-1.0 / 0.8));
    CHECK(render_bell(seed).samples == b.samples);
  }
}

TEST_CASE("bell voice ignores untriggered parameters") {
  auto v = make_voice(Stimulus::Bell, 3);
  v->set_params(map_pt_alarm(Stimulus::Bell, 500, 400, false));
  std::vector<double> out(4410, 1.0);
  v->render(out);
  CHECK(std::all_of(out.begin(), out.end(), [](double s) { return s == 0.0; }));
}
