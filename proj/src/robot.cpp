#include "sonimon/robot.hpp"

#include <httplib.h>

#include <algorithm>
#include <cmath>

#include "sonimon/rng.hpp"

namespace sonimon {

namespace {

class Client {
 public:
  Client(const std::string& host, int port) : cli_(host, port) {
    cli_.set_read_timeout(120, 0);
    cli_.set_keep_alive(true);
    cli_.set_tcp_nodelay(true);
  }

  Json post(const std::string& path, const Json& body) {
    auto res = cli_.Post(path, body.dump(), "application/json");
    return check(res, "POST " + path);
  }

  Json get(const std::string& path) { return check(cli_.Get(path), "GET " + path); }

  std::string get_raw(const std::string& path) {
    auto res = cli_.Get(path);
    if (!res) throw std::runtime_error("GET " + path + ": " + httplib::to_string(res.error()));
    if (res->status != 200) throw std::runtime_error("GET " + path + ": HTTP " + std::to_string(res->status));
    return res->body;
  }

 private:
  static Json check(const httplib::Result& res, const std::string& what) {
    if (!res) throw std::runtime_error(what + ": " + httplib::to_string(res.error()));
    if (res->status != 200) {
      throw std::runtime_error(what + ": HTTP " + std::to_string(res->status) + " " + res->body);
    }
    return Json::parse(res->body);
  }

  httplib::Client cli_;
};

const Level& find_level(const std::vector<Level>& a, const std::vector<Level>& b, const std::string& id) {
  for (const auto* set : {&a, &b}) {
    for (const auto& l : *set) {
      if (l.id == id) return l;
    }
  }
  throw std::runtime_error("robot does not know level " + id + " (level seed mismatch?)");
}

}  // namespace

int sequence_length(int completed) { return std::min(10, 4 + completed / 2); }

PlannedEvents plan_robot_level(const LevelRecord& rec, EcologyId eco, const RobotProfile& profile,
                               std::uint64_t seed, int session_index, bool qualifying, double symbol_time) {
  PlannedEvents out;
  const double duration = rec.level.duration;
  const std::uint64_t level_seed =
      mix_seed(mix_seed(seed, static_cast<std::uint64_t>(session_index)), hash_string(rec.level.id));
  const bool sloppy = profile.kind == RobotProfile::Kind::Sloppy && !qualifying;

  for (Stimulus s : ecology(eco).stimuli) {
    Rng rng(mix_seed(level_seed, static_cast<std::uint64_t>(s) + 1));
    const double u_miss = rng.uniform();
    const double u_fa = rng.uniform();
    const double fa_time = rng.uniform(0.0, duration);
    const auto it = rec.onsets.find(s);
    if (it != rec.onsets.end()) {
      if (sloppy && u_miss < profile.pmiss) continue;
      out.annotations.push_back({"", rec.level.id, s, Action::Check, std::min(duration, it->second + profile.delay)});
    } else if (sloppy && u_fa < profile.pfa) {
      out.annotations.push_back({"", rec.level.id, s, Action::Check, fa_time});
    }
  }
  std::stable_sort(out.annotations.begin(), out.annotations.end(),
                   [](const AnnotationEvent& a, const AnnotationEvent& b) { return a.t < b.t; });

  double t = 0.0;
  for (int done = 0;; ++done) {
    const int len = sequence_length(done);
    const double d = len * symbol_time;
    if (t + d > duration) break;
    t += d;
    out.sequences.push_back({"", rec.level.id, len, t, d});
  }
  return out;
}

std::vector<RobotSession> run_robot(const std::string& host, int port, const RobotOptions& options) {
  const auto main_levels = default_level_set(options.level_seed);
  const auto qualify_levels = training_level_set(options.level_seed);
  Client cli(host, port);
  std::vector<RobotSession> result;

  for (int si = 0; si < options.sessions; ++si) {
    auto state = cli.post("/api/session", Json::object());
    RobotSession rs;
    rs.session_id = state.at("session_id").get<std::string>();
    rs.ecology = parse_ecology(state.at("ecology").get<std::string>());
    const std::string base = "/api/session/" + rs.session_id;
    int counter = 0;

    auto play = [&](const std::string& key, bool qualifying) {
      const auto plan = cli.get(base + "/level/" + key + "/plan");
      if (options.fetch_audio) {
        const auto wav = cli.get_raw(base + "/level/" + key + "/audio");
        if (wav.size() < 44 || wav.compare(0, 4, "RIFF") != 0) throw std::runtime_error("bad audio for " + key);
      }
      const auto& level = find_level(main_levels, qualify_levels, plan.at("level_id").get<std::string>());
      const auto rec = make_level_record(level, rs.ecology, options.frame_rate);
      const auto events = plan_robot_level(rec, rs.ecology, options.profile, options.seed, si, qualifying,
                                           options.symbol_time);
      // Merge both streams in time order, as a participant would produce them.
      std::size_t a = 0, q = 0;
      while (a < events.annotations.size() || q < events.sequences.size()) {
        const bool take_annotation =
            q >= events.sequences.size() ||
            (a < events.annotations.size() && events.annotations[a].t <= events.sequences[q].completed_at);
        Json body;
        const std::string id = rs.session_id + "-" + std::to_string(counter++);
        if (take_annotation) {
          const auto& e = events.annotations[a++];
          body = {{"event_id", id}, {"type", "annotation"},  {"level_id", e.level_id},
                  {"stimulus", std::string(stimulus_name(e.stimulus))},
                  {"action", std::string(action_name(e.action))}, {"t", e.t}};
        } else {
          const auto& e = events.sequences[q++];
          body = {{"event_id", id},           {"type", "sequence"},         {"level_id", e.level_id},
                  {"sequence_len", e.sequence_len}, {"completed_at", e.completed_at}, {"duration", e.duration}};
        }
        cli.post(base + "/event", body);
        ++rs.events;
      }
      return cli.post(base + "/advance", Json::object());
    };

    cli.post(base + "/advance", Json{{"phase", "TRAINING_TASK"}});
    state = cli.post(base + "/advance", Json{{"phase", "TRAINING_STIMULI"}});
    while (state.at("phase") == "TRAINING_QUALIFY") {
      if (rs.qualify_attempts >= 10) throw std::runtime_error("robot failed to qualify");
      state = play("q", true);
      ++rs.qualify_attempts;
    }
    const int levels = state.at("level_count").get<int>();
    for (int k = 0; k < levels; ++k) state = play(std::to_string(k), false);
    if (state.at("phase") != "SURVEY") throw std::runtime_error("expected the survey after the last level");

    Rng rng(mix_seed(options.seed, 0x5u + static_cast<std::uint64_t>(si)));
    Json answers = Json::array();
    for (std::size_t i = 0; i < kSurveyStatementCount; ++i) {
      answers.push_back(std::string(answer_name(static_cast<Answer>(rng.below(3)))));
    }
    cli.post(base + "/survey", Json{{"age", nullptr}, {"gender", nullptr}, {"answers", answers}, {"comment", "robot"}});
    result.push_back(rs);
  }
  return result;
}

Json fetch_export(const std::string& host, int port) { return Client(host, port).get("/api/export"); }

}  // namespace sonimon
