#pragma once

#include <cstdlib>
#include <iostream>
#include <string>

namespace toss::log {

enum class Level : int { Quiet = 0, Warn = 1, Info = 2, Debug = 3 };

/// Verbosity from TOSS_LOG (quiet|warn|info|debug), default info.
inline Level level() {
  static const Level lvl = [] {
    const char* env = std::getenv("TOSS_LOG");
    if (!env) return Level::Info;
    const std::string v(env);
    if (v == "quiet") return Level::Quiet;
    if (v == "warn") return Level::Warn;
    if (v == "debug") return Level::Debug;
    return Level::Info;
  }();
  return lvl;
}

inline void warn(const std::string& msg) {
  if (level() >= Level::Warn) std::cerr << "[toss] warning: " << msg << "\n";
}
inline void info(const std::string& msg) {
  if (level() >= Level::Info) std::cerr << "[toss] " << msg << "\n";
}
inline void debug(const std::string& msg) {
  if (level() >= Level::Debug) std::cerr << "[toss] debug: " << msg << "\n";
}

}  // namespace toss::log
