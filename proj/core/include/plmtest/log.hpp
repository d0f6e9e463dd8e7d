#pragma once

#include <string_view>

namespace plmtest::log {

enum class Level { quiet = 0, warning = 1, info = 2 };

void set_level(Level level) noexcept;
Level level() noexcept;

void warning(std::string_view message);
// Emits `message` only the first time `key` is seen in this process.
void warning_once(std::string_view key, std::string_view message);
void info(std::string_view message);

}  // namespace plmtest::log
