#include "sonimon/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>

namespace sonimon {

double soft_clip(double x, double knee) {
  const double a = std::abs(x);
  if (a <= knee) return x;
  const double headroom = 1.0 - knee;
  return std::copysign(knee + headroom * std::tanh((a - knee) / headroom), x);
}

void soft_clip(std::span<double> samples, double knee) {
  for (double& s : samples) s = soft_clip(s, knee);
}

double rms(std::span<const double> samples) {
  if (samples.empty()) return 0.0;
  double acc = 0.0;
  for (double s : samples) acc += s * s;
  return std::sqrt(acc / static_cast<double>(samples.size()));
}

double peak(std::span<const double> samples) {
  double p = 0.0;
  for (double s : samples) p = std::max(p, std::abs(s));
  return p;
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}
void put_tag(std::vector<std::uint8_t>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) | (static_cast<std::uint32_t>(b[at + 3]) << 24);
}
std::uint16_t get_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}
bool tag_is(std::span<const std::uint8_t> b, std::size_t at, const char* tag) {
  return std::memcmp(b.data() + at, tag, 4) == 0;
}

}  // namespace

std::vector<std::uint8_t> encode_wav(const AudioBuffer& buffer) {
  const auto data_bytes = static_cast<std::uint32_t>(buffer.size() * 2);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, 1);  // PCM
  put_u16(out, 1);  // mono
  put_u32(out, static_cast<std::uint32_t>(buffer.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(buffer.sample_rate) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  put_tag(out, "data");
  put_u32(out, data_bytes);
  for (double s : buffer.samples) {
    const double c = std::clamp(s, -1.0, 1.0);
    const auto v = static_cast<std::int16_t>(std::lrint(c * 32767.0));
    put_u16(out, static_cast<std::uint16_t>(v));
  }
  return out;
}

void write_wav(const std::filesystem::path& path, const AudioBuffer& buffer) {
  const auto bytes = encode_wav(buffer);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

AudioBuffer decode_wav(std::span<const std::uint8_t> b) {
  auto fail = [](const char* why) { throw std::runtime_error(std::string("malformed WAV: ") + why); };
  if (b.size() < 12 || !tag_is(b, 0, "RIFF") || !tag_is(b, 8, "WAVE")) fail("missing RIFF/WAVE header");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= b.size()) {
    const std::uint32_t len = get_u32(b, pos + 4);
    const std::size_t body = pos + 8;
    if (body + len > b.size()) fail("chunk overruns file");
    if (tag_is(b, pos, "fmt ")) {
      if (len < 16) fail("short fmt chunk");
      format = get_u16(b, body);
      channels = get_u16(b, body + 2);
      rate = get_u32(b, body + 4);
      bits = get_u16(b, body + 14);
      if (format == 0xFFFE && len >= 26) format = get_u16(b, body + 24);
      have_fmt = true;
    } else if (tag_is(b, pos, "data")) {
      if (!have_fmt) fail("data before fmt");
      if (channels == 0 || rate == 0) fail("bad channel count or rate");
      const bool pcm = format == 1 && (bits == 8 || bits == 16 || bits == 24 || bits == 32);
      const bool flt = format == 3 && bits == 32;
      if (!pcm && !flt) fail("unsupported sample format");
      const std::size_t width = bits / 8;
      const std::size_t frames = len / (width * channels);
      AudioBuffer out(static_cast<int>(rate), frames);
      for (std::size_t f = 0; f < frames; ++f) {
        double acc = 0.0;
        for (std::size_t c = 0; c < channels; ++c) {
          const std::size_t at = body + (f * channels + c) * width;
          double v = 0.0;
          if (flt) {
            float x;
            std::memcpy(&x, b.data() + at, 4);
            v = x;
          } else if (bits == 8) {
            v = (static_cast<int>(b[at]) - 128) / 128.0;
          } else if (bits == 16) {
            v = static_cast<std::int16_t>(get_u16(b, at)) / 32768.0;
          } else if (bits == 24) {
            std::int32_t x = b[at] | (b[at + 1] << 8) | (b[at + 2] << 16);
            if (x & 0x800000) x |= ~0xFFFFFF;
            v = x / 8388608.0;
          } else {
            v = static_cast<std::int32_t>(get_u32(b, at)) / 2147483648.0;
          }
          acc += v;
        }
        out.samples[f] = acc / channels;
      }
      if (!std::all_of(out.samples.begin(), out.samples.end(), [](double v) { return std::isfinite(v); })) {
        fail("non-finite samples");
      }
      return out;
    }
    pos = body + len + (len & 1);
  }
  fail("no data chunk");
  return {};
}

AudioBuffer read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_wav(bytes);
}

AudioBuffer resample(const AudioBuffer& in, int new_rate) {
  if (new_rate == in.sample_rate || in.samples.empty()) {
    AudioBuffer out = in;
    out.sample_rate = new_rate;
    return out;
  }
  const double ratio = static_cast<double>(in.sample_rate) / new_rate;
  const auto length = static_cast<std::size_t>(static_cast<double>(in.size()) / ratio);
  AudioBuffer out(new_rate, length);
  for (std::size_t i = 0; i < length; ++i) {
    const double pos = static_cast<double>(i) * ratio;
    const auto j = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(j);
    const double a = in.samples[j];
    const double b = j + 1 < in.size() ? in.samples[j + 1] : 0.0;
    out.samples[i] = a + (b - a) * frac;
  }
  return out;
}

}  // namespace sonimon
