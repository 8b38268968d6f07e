#include "sonimon/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace sonimon {

namespace {
std::mutex g_mutex;
std::atomic<bool> g_quiet{false};
}  // namespace

void log_warning(std::string_view message) {
  std::lock_guard lock(g_mutex);
  std::cerr << "[warn] " << message << '\n';
}

void log_info(std::string_view message) {
  if (g_quiet) return;
  std::lock_guard lock(g_mutex);
  std::cerr << "[info] " << message << '\n';
}

void set_quiet(bool quiet) { g_quiet = quiet; }

}  // namespace sonimon
