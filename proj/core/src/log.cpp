#include "plmtest/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>
#include <set>
#include <string>

namespace plmtest::log {

namespace {
std::atomic<Level> g_level{Level::warning};
std::mutex g_mutex;
std::set<std::string>& seen() {
  static std::set<std::string> s;
  return s;
}
}  // namespace

void set_level(Level l) noexcept { g_level.store(l); }
Level level() noexcept { return g_level.load(); }

void warning(std::string_view message) {
  if (level() < Level::warning) return;
  std::lock_guard lock(g_mutex);
  std::clog << "warning: " << message << '\n';
}

void warning_once(std::string_view key, std::string_view message) {
  if (level() < Level::warning) return;
  std::lock_guard lock(g_mutex);
  if (!seen().insert(std::string(key)).second) return;
  std::clog << "warning: " << message << '\n';
}

void info(std::string_view message) {
  if (level() < Level::info) return;
  std::lock_guard lock(g_mutex);
  std::clog << message << '\n';
}

}  // namespace plmtest::log
