#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sonimon/ecology.hpp"

namespace sonimon {

struct Config {
  std::filesystem::path data_dir = "sonimon-data";
  std::string host = "127.0.0.1";
  int port = 8080;
  std::vector<EcologyId> enabled_ecologies = {EcologyId::Synth, EcologyId::Nature};
  std::uint64_t level_seed = 1;
  std::uint64_t session_seed = 1;  // ids, ecology tie-breaks, level order
  double frame_rate = 10.0;
  int sample_rate = 44100;
  std::optional<std::filesystem::path> asset_dir;
  std::optional<std::filesystem::path> static_dir;
  bool live_audio = false;
  bool fsync = true;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

// getenv-backed lookup.
std::optional<std::string> process_env(const std::string& name);

// Defaults, then the JSON file (if any), then SONIMON_* environment variables:
// SONIMON_DATA_DIR, SONIMON_HOST, SONIMON_PORT, SONIMON_ECOLOGIES (comma list),
// SONIMON_LEVEL_SEED, SONIMON_SESSION_SEED, SONIMON_FRAME_RATE,
// SONIMON_SAMPLE_RATE, SONIMON_ASSET_DIR, SONIMON_STATIC_DIR,
// SONIMON_LIVE_AUDIO, SONIMON_FSYNC.
// Throws std::invalid_argument on bad values, std::runtime_error on an unreadable file.
Config load_config(const std::optional<std::filesystem::path>& file, const EnvLookup& env = process_env);

void validate_config(const Config& c);

std::vector<EcologyId> parse_ecology_list(std::string_view csv);

}  // namespace sonimon
