#include "sonimon/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

#include "sonimon/scenario_io.hpp"

namespace sonimon {

namespace {

bool parse_bool(const std::string& s) {
  std::string l(s);
  std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return std::tolower(c); });
  if (l == "1" || l == "true" || l == "yes" || l == "on") return true;
  if (l == "0" || l == "false" || l == "no" || l == "off") return false;
  throw std::invalid_argument("not a boolean: " + s);
}

template <typename T>
T parse_number(const std::string& name, const std::string& s) {
  try {
    std::size_t used = 0;
    T v;
    if constexpr (std::is_same_v<T, double>) {
      v = std::stod(s, &used);
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
      if (!s.empty() && s[0] == '-') throw std::invalid_argument("negative");
      v = std::stoull(s, &used);
    } else {
      v = static_cast<T>(std::stol(s, &used));
    }
    if (used != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument(name + ": not a valid number: " + s);
  }
}

void apply_file(Config& c, const Json& j) {
  if (!j.is_object()) throw std::invalid_argument("config file must hold an object");
  for (const auto& [key, v] : j.items()) {
    if (key == "data_dir") c.data_dir = v.get<std::string>();
    else if (key == "host") c.host = v.get<std::string>();
    else if (key == "port") c.port = v.get<int>();
    else if (key == "enabled_ecologies") {
      c.enabled_ecologies.clear();
      for (const auto& e : v) c.enabled_ecologies.push_back(parse_ecology(e.get<std::string>()));
    } else if (key == "level_seed") c.level_seed = v.get<std::uint64_t>();
    else if (key == "session_seed") c.session_seed = v.get<std::uint64_t>();
    else if (key == "frame_rate") c.frame_rate = v.get<double>();
    else if (key == "sample_rate") c.sample_rate = v.get<int>();
    else if (key == "asset_dir") {
      if (v.is_null()) c.asset_dir.reset(); else c.asset_dir = v.get<std::string>();
    } else if (key == "static_dir") {
      if (v.is_null()) c.static_dir.reset(); else c.static_dir = v.get<std::string>();
    } else if (key == "live_audio") c.live_audio = v.get<bool>();
    else if (key == "fsync") c.fsync = v.get<bool>();
    else throw std::invalid_argument("unknown config key: " + key);
  }
}

}  // namespace

std::optional<std::string> process_env(const std::string& name) {
  const char* v = std::getenv(name.c_str());
  if (!v) return std::nullopt;
  return std::string(v);
}

std::vector<EcologyId> parse_ecology_list(std::string_view csv) {
  std::vector<EcologyId> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const auto end = std::min(csv.find(',', start), csv.size());
    auto item = csv.substr(start, end - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) {
      const auto e = parse_ecology(item);
      if (std::find(out.begin(), out.end(), e) == out.end()) out.push_back(e);
    }
    start = end + 1;
  }
  return out;
}

void validate_config(const Config& c) {
  if (c.port < 0 || c.port > 65535) throw std::invalid_argument("port out of range");
  if (c.enabled_ecologies.empty()) throw std::invalid_argument("no ecology enabled");
  if (!(c.frame_rate > 0.0)) throw std::invalid_argument("frame_rate must be positive");
  if (c.sample_rate < 8000 || c.sample_rate > 192000) throw std::invalid_argument("sample_rate out of range");
  if (c.data_dir.empty()) throw std::invalid_argument("data_dir is empty");
}

Config load_config(const std::optional<std::filesystem::path>& file, const EnvLookup& env) {
  Config c;
  if (file) {
    std::ifstream in(*file);
    if (!in) throw std::runtime_error("cannot read config " + file->string());
    try {
      apply_file(c, Json::parse(in));
    } catch (const Json::exception& e) {
      throw std::invalid_argument("bad config " + file->string() + ": " + e.what());
    }
  }

  if (auto v = env("SONIMON_DATA_DIR")) c.data_dir = *v;
  if (auto v = env("SONIMON_HOST")) c.host = *v;
  if (auto v = env("SONIMON_PORT")) c.port = parse_number<int>("SONIMON_PORT", *v);
  if (auto v = env("SONIMON_ECOLOGIES")) c.enabled_ecologies = parse_ecology_list(*v);
  if (auto v = env("SONIMON_LEVEL_SEED")) c.level_seed = parse_number<std::uint64_t>("SONIMON_LEVEL_SEED", *v);
  if (auto v = env("SONIMON_SESSION_SEED")) {
    c.session_seed = parse_number<std::uint64_t>("SONIMON_SESSION_SEED", *v);
  }
  if (auto v = env("SONIMON_FRAME_RATE")) c.frame_rate = parse_number<double>("SONIMON_FRAME_RATE", *v);
  if (auto v = env("SONIMON_SAMPLE_RATE")) c.sample_rate = parse_number<int>("SONIMON_SAMPLE_RATE", *v);
  if (auto v = env("SONIMON_ASSET_DIR")) c.asset_dir = *v;
  if (auto v = env("SONIMON_STATIC_DIR")) c.static_dir = *v;
  if (auto v = env("SONIMON_LIVE_AUDIO")) c.live_audio = parse_bool(*v);
  if (auto v = env("SONIMON_FSYNC")) c.fsync = parse_bool(*v);

  validate_config(c);
  return c;
}

}  // namespace sonimon
