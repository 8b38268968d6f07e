#include <doctest.h>

#include <stdexcept>

#include <filesystem>
#include <fstream>

#include "sonimon/scenario_io.hpp"

using namespace sonimon;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("sonimon-io-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("scenario round-trips through JSON, including infinite hold") {
  const auto dir = scratch("scenario");
  auto levels = default_level_set(9);
  levels[3].events[0].hold = 2.5;
  write_scenario(dir / "s.json", levels);
  CHECK(read_scenario(dir / "s.json") == levels);

  const auto j = to_json(levels[1]);
  CHECK(j["events"][0]["hold"].is_null());
  CHECK(j["events"][0]["criterion"] == "WPD_HEIGHT");
}

TEST_CASE("a single level document is accepted") {
  const auto dir = scratch("single");
  Level l;
  l.id = "solo";
  l.events.push_back({CriterionId::Wpt, 3.0, 1.0, -2.0});
  std::ofstream(dir / "l.json") << to_json(l).dump();
  const auto read = read_scenario(dir / "l.json");
  REQUIRE(read.size() == 1);
  CHECK(read[0] == l);
}

TEST_CASE("invalid scenario content is rejected") {
  const auto dir = scratch("bad");
  std::ofstream(dir / "bad.json") << R"({"levels":[{"id":"x","events":[{"criterion":"PH","onset":1,"ramp":1,"severity":0.5}]}]})";
  CHECK_THROWS(read_scenario(dir / "bad.json"));
  std::ofstream(dir / "hold.json") << R"({"id":"x","events":[{"criterion":"PH","onset":1,"ramp":1,"severity":2,"hold":"inf"}]})";
  CHECK(std::isinf(read_scenario(dir / "hold.json")[0].events[0].hold));
}

TEST_CASE("frame log lines use the documented keys") {
  CriterionFrame f;
  f.t = 1.5;
  f.values = {4.1, 3.05, 30.2, 2010.0, 512.0};
  const auto line = frame_to_line(f);
  CHECK(line.find("\"t\":1.5") != std::string::npos);
  for (const char* key : {"wpd_w", "wpd_h", "ph", "wpt", "pt"}) CHECK(line.find(key) != std::string::npos);
  const auto back = frame_from_line(line);
  CHECK(back.t == f.t);
  CHECK(back.values == f.values);
}

TEST_CASE("frame logs round-trip byte-identically") {
  const auto dir = scratch("frames");
  const auto frames = generate_trajectory(default_level_set(3)[7]);
  write_frame_log(dir / "a.jsonl", frames);
  const auto back = read_frame_log(dir / "a.jsonl");
  REQUIRE(back.size() == frames.size());
  for (std::size_t k = 0; k < frames.size(); ++k) CHECK(back[k].values == frames[k].values);
  write_frame_log(dir / "b.jsonl", back);
  std::ifstream a(dir / "a.jsonl"), b(dir / "b.jsonl");
  const std::string sa((std::istreambuf_iterator<char>(a)), {}), sb((std::istreambuf_iterator<char>(b)), {});
  CHECK(sa == sb);
}
