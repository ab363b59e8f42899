#pragma once

// Diagnostic logging to stderr, controlled by PLANNER_LOG
// (off | error | info | debug, or 0-3). Default: error.

#include <cstdlib>
#include <iostream>
#include <string>
#include <string_view>

namespace fdplan::log {

enum class Level { Off = 0, Error = 1, Info = 2, Debug = 3 };

inline Level parse_level(std::string_view v) {
  if (v == "off" || v == "0") return Level::Off;
  if (v == "error" || v == "1") return Level::Error;
  if (v == "info" || v == "2") return Level::Info;
  if (v == "debug" || v == "3") return Level::Debug;
  return Level::Error;
}

inline Level& threshold() {
  static Level level = [] {
    const char* env = std::getenv("PLANNER_LOG");
    return env ? parse_level(env) : Level::Error;
  }();
  return level;
}

inline bool enabled(Level l) { return static_cast<int>(l) <= static_cast<int>(threshold()); }

inline void write(Level l, const std::string& msg) {
  if (!enabled(l)) return;
  static constexpr const char* tags[] = {"", "error", "info", "debug"};
  std::cerr << "[" << tags[static_cast<int>(l)] << "] " << msg << '\n';
}

inline void error(const std::string& m) { write(Level::Error, m); }
inline void info(const std::string& m) { write(Level::Info, m); }
inline void debug(const std::string& m) { write(Level::Debug, m); }

}  // namespace fdplan::log
