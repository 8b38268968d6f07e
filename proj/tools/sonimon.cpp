#include <CLI11.hpp>

#include <pthread.h>
#include <signal.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "sonimon/config.hpp"
#include "sonimon/experiment.hpp"
#include "sonimon/http_service.hpp"
#include "sonimon/log.hpp"
#include "sonimon/process_sim.hpp"
#include "sonimon/report.hpp"
#include "sonimon/rng.hpp"
#include "sonimon/robot.hpp"
#include "sonimon/scenario_io.hpp"
#include "sonimon/synth.hpp"

namespace fs = std::filesystem;
using namespace sonimon;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw std::runtime_error("cannot create directory " + dir.string());
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// simulate

struct SimulateArgs {
  std::uint64_t seed = 1;
  fs::path out;
  double frame_rate = kDefaultFrameRate;
};

int cmd_simulate(const SimulateArgs& a) {
  ensure_dir(a.out);
  const auto levels = default_level_set(a.seed);
  write_scenario(a.out / "scenario.json", levels);
  for (const auto& level : levels) {
    write_frame_log(a.out / (level.id + ".jsonl"), generate_trajectory(level, a.frame_rate));
  }
  std::cout << "wrote " << levels.size() << " levels to " << a.out.string() << "\n";
  return 0;
}

// render

struct RenderArgs {
  std::string ecology = "MIXED";
  fs::path level_file;
  fs::path out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int sample_rate = kDefaultSampleRate;
  double frame_rate = kDefaultFrameRate;
  std::optional<fs::path> assets;
  std::optional<fs::path> dump_params;
};

void dump_params(std::ostream& out, const Level& level, EcologyId eco, const std::vector<CriterionFrame>& frames) {
  AlarmState alarm;
  for (const auto& f : frames) {
    const auto params = map_frame(f, ecology(eco), alarm);
    Json stimuli = Json::array();
    for (const auto& p : params) {
      Json j{{"stimulus", std::string(stimulus_name(p.stimulus))},
             {"pitch_hz", p.pitch_hz},
             {"loudness", p.loudness},
             {"interval_s", p.interval_s ? Json(*p.interval_s) : Json(nullptr)},
             {"selection", std::string(selection_name(p.selection))},
             {"trigger", p.trigger},
             {"playback_rate", p.playback_rate},
             {"audible", is_audible(p)}};
      stimuli.push_back(std::move(j));
    }
    nlohmann::ordered_json line;
    line["level"] = level.id;
    line["ecology"] = std::string(ecology_name(eco));
    line["t"] = f.t;
    line["stimuli"] = stimuli;
    out << line.dump() << '\n';
  }
}

int cmd_render(const RenderArgs& a) {
  std::vector<EcologyId> ecos;
  if (lower(a.ecology) == "all") {
    ecos.assign(kAllEcologies.begin(), kAllEcologies.end());
  } else {
    try {
      ecos = parse_ecology_list(a.ecology);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    if (ecos.empty()) throw UsageError("no ecology given");
  }
  const auto levels = read_scenario(a.level_file);
  if (levels.empty()) throw std::runtime_error("no level in " + a.level_file.string());

  AssetLibrary assets;
  if (a.assets) {
    assets = AssetLibrary::load(*a.assets, a.sample_rate);
    for (const auto& w : assets.warnings()) log_warning(w);
  }
  MixOptions opt;
  opt.sample_rate = a.sample_rate;
  opt.assets = assets.empty() ? nullptr : &assets;

  const bool single = levels.size() == 1 && ecos.size() == 1 && a.out.extension() == ".wav";
  if (!single) ensure_dir(a.out);
  std::ofstream params;
  if (a.dump_params) {
    params.open(*a.dump_params);
    if (!params) throw std::runtime_error("cannot write " + a.dump_params->string());
  }
  for (const auto& level : levels) {
    const auto frames = generate_trajectory(level, a.frame_rate);
    for (EcologyId eco : ecos) {
      const std::uint64_t seed = a.seed_set ? a.seed : mix_seed(level.seed, static_cast<std::uint64_t>(eco));
      const auto mix = mix_level(frames, eco, seed, opt);
      const fs::path path = single ? a.out : a.out / (level.id + "_" + lower(ecology_name(eco)) + ".wav");
      write_wav(path, mix.mix);
      if (params.is_open()) dump_params(params, level, eco, frames);
      std::cout << path.string() << " " << mix.mix.duration() << " s\n";
    }
  }
  return 0;
}

// serve

struct ServeArgs {
  std::optional<fs::path> config;
  std::optional<int> port;
  std::optional<std::string> host;
  std::optional<fs::path> data_dir;
};

Config resolve_config(const std::optional<fs::path>& file, const std::optional<fs::path>& data_dir,
                      const std::optional<int>& port, const std::optional<std::string>& host) {
  Config c = load_config(file);
  if (data_dir) c.data_dir = *data_dir;
  if (port) c.port = *port;
  if (host) c.host = *host;
  validate_config(c);
  return c;
}

int cmd_serve(const ServeArgs& a) {
  const Config cfg = resolve_config(a.config, a.data_dir, a.port, a.host);

  // Signals are taken synchronously by a watcher thread so shutdown runs
  // outside of a signal handler.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  ExperimentService service(cfg);
  HttpServer server(service);
  const int port = server.bind(cfg.host, cfg.port);
  std::cout << "listening on http://" << cfg.host << ":" << port << std::endl;

  std::thread watcher([&] {
    int sig = 0;
    sigwait(&set, &sig);
    log_info("shutting down");
    server.stop();
  });
  server.listen();
  // listen() can also return on its own; make sure the watcher exits.
  pthread_kill(watcher.native_handle(), SIGTERM);
  watcher.join();
  return 0;
}

// robot

struct RobotArgs {
  int sessions = 1;
  std::string profile = "perfect";
  double delay = 0.5;
  double pmiss = 0.0;
  double pfa = 0.0;
  std::uint64_t seed = 7;
  std::optional<std::string> url;
  std::optional<fs::path> config;
  std::optional<fs::path> data_dir;
  std::optional<std::string> ecologies;
  std::optional<fs::path> export_path;
  bool no_audio = false;
};

std::pair<std::string, int> split_url(const std::string& url) {
  std::string rest = url;
  if (rest.rfind("http://", 0) == 0) rest = rest.substr(7);
  if (const auto slash = rest.find('/'); slash != std::string::npos) rest = rest.substr(0, slash);
  const auto colon = rest.rfind(':');
  if (colon == std::string::npos) return {rest, 80};
  try {
    return {rest.substr(0, colon), std::stoi(rest.substr(colon + 1))};
  } catch (const std::exception&) {
    throw UsageError("bad url: " + url);
  }
}

int cmd_robot(const RobotArgs& a) {
  RobotOptions opt;
  opt.sessions = a.sessions;
  opt.seed = a.seed;
  opt.fetch_audio = !a.no_audio;
  if (a.profile == "perfect") {
    opt.profile = RobotProfile::perfect(a.delay);
  } else if (a.profile == "sloppy") {
    opt.profile = RobotProfile::sloppy(a.pmiss, a.pfa, a.delay);
  } else {
    throw UsageError("unknown profile: " + a.profile);
  }
  if (a.sessions < 1) throw UsageError("--sessions must be at least 1");
  for (double p : {a.pmiss, a.pfa}) {
    if (p < 0.0 || p > 1.0) throw UsageError("probabilities must lie in [0, 1]");
  }
  if (a.delay < 0.0) throw UsageError("--delay must be non-negative");

  Config cfg = load_config(a.config);
  if (a.ecologies) cfg.enabled_ecologies = parse_ecology_list(*a.ecologies);
  if (a.data_dir) {
    cfg.data_dir = *a.data_dir;
  } else if (!a.url) {
    cfg.data_dir = fs::temp_directory_path() /
                   ("sonimon-robot-" + std::to_string(::getpid()) + "-" + std::to_string(a.seed));
    fs::remove_all(cfg.data_dir);
  }
  validate_config(cfg);
  opt.level_seed = cfg.level_seed;
  opt.frame_rate = cfg.frame_rate;

  std::unique_ptr<ExperimentService> service;
  std::unique_ptr<HttpServer> server;
  std::string host = "127.0.0.1";
  int port = 0;
  if (a.url) {
    std::tie(host, port) = split_url(*a.url);
  } else {
    service = std::make_unique<ExperimentService>(cfg);
    server = std::make_unique<HttpServer>(*service);
    port = server->bind(host, 0);
    server->start();
  }

  const auto sessions = run_robot(host, port, opt);
  for (const auto& s : sessions) {
    std::cout << s.session_id << " " << ecology_name(s.ecology) << " qualify_attempts=" << s.qualify_attempts
              << " events=" << s.events << "\n";
  }
  if (a.export_path) {
    std::ofstream out(*a.export_path);
    if (!out) throw std::runtime_error("cannot write " + a.export_path->string());
    out << fetch_export(host, port).dump(1) << '\n';
    std::cout << "export written to " << a.export_path->string() << "\n";
  }
  if (server) server->stop();
  return 0;
}

// analyze

struct AnalyzeArgs {
  fs::path input;
  fs::path out;
};

int cmd_analyze(const AnalyzeArgs& a) {
  const auto sessions = read_export(a.input);
  const auto report = build_report(sessions);
  write_report(a.out, report);
  std::cout << "analyzed " << sessions.size() << " sessions into " << a.out.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Peripheral sonification workbench"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Suppress informational messages");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Generate the level set and its frame logs");
  simulate->add_option("--levels,--seed", sim.seed, "Level-set seed")->capture_default_str();
  simulate->add_option("--out", sim.out, "Output directory")->required();
  simulate->add_option("--frame-rate", sim.frame_rate, "Frames per second")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  RenderArgs ren;
  auto* render = app.add_subcommand("render", "Render levels to WAV");
  render->add_option("--ecology", ren.ecology, "MIXED, SYNTH, NATURE, a comma list or all")->capture_default_str();
  render->add_option("--level", ren.level_file, "Scenario or single-level JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  render->add_option("--out", ren.out, "WAV file (one level, one ecology) or output directory")->required();
  render->add_option("--seed", ren.seed, "Synthesis seed (default: derived from the level seed)")
      ->each([&](const std::string&) { ren.seed_set = true; });
  render->add_option("--sample-rate", ren.sample_rate, "Output sample rate")
      ->capture_default_str()
      ->check(CLI::Range(8000, 192000));
  render->add_option("--frame-rate", ren.frame_rate, "Frames per second")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  render->add_option("--assets", ren.assets, "Directory of replacement recordings");
  render->add_option("--dump-params", ren.dump_params, "Write per-frame stimulus parameters (JSON lines)");

  ServeArgs srv;
  auto* serve = app.add_subcommand("serve", "Run the experiment service");
  serve->add_option("--config", srv.config, "JSON config file")->check(CLI::ExistingFile);
  serve->add_option("--port", srv.port, "Port (0 = any free port)");
  serve->add_option("--host", srv.host, "Bind address");
  serve->add_option("--data-dir", srv.data_dir, "Session store directory");

  RobotArgs rob;
  auto* robot = app.add_subcommand("robot", "Run scripted participants through the HTTP protocol");
  robot->add_option("--sessions", rob.sessions, "Number of sessions")->capture_default_str();
  robot->add_option("--profile", rob.profile, "perfect or sloppy")
      ->capture_default_str()
      ->check(CLI::IsMember({"perfect", "sloppy"}));
  robot->add_option("--delay", rob.delay, "Reaction delay after the tolerance onset, s")->capture_default_str();
  robot->add_option("--pmiss", rob.pmiss, "Sloppy: miss probability")->capture_default_str();
  robot->add_option("--pfa", rob.pfa, "Sloppy: false-alarm probability")->capture_default_str();
  robot->add_option("--seed", rob.seed, "Robot seed")->capture_default_str();
  robot->add_option("--url", rob.url, "Existing server (default: start one in-process)");
  robot->add_option("--config", rob.config, "JSON config file for the in-process server")->check(CLI::ExistingFile);
  robot->add_option("--data-dir", rob.data_dir, "Session store for the in-process server");
  robot->add_option("--ecologies", rob.ecologies, "Enabled ecologies for the in-process server");
  robot->add_option("--export", rob.export_path, "Write the session export here");
  robot->add_flag("--no-audio", rob.no_audio, "Skip downloading level audio");

  AnalyzeArgs ana;
  auto* analyze = app.add_subcommand("analyze", "Compute the metric report from an export");
  analyze->add_option("--input", ana.input, "Export file")->required()->check(CLI::ExistingFile);
  analyze->add_option("--out", ana.out, "Report directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  set_quiet(quiet);

  try {
    if (*simulate) return cmd_simulate(sim);
    if (*render) return cmd_render(ren);
    if (*serve) return cmd_serve(srv);
    if (*robot) return cmd_robot(rob);
    if (*analyze) return cmd_analyze(ana);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
