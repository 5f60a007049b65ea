#pragma once

#include <cstdlib>
#include <iostream>
#include <string>

namespace sdoh {

/// Verbosity from SDOH_EVENTKIT_LOG: 0 quiet (default), 1 progress, 2 debug.
inline int log_level() {
  static const int level = [] {
    const char* env = std::getenv("SDOH_EVENTKIT_LOG");
    if (!env) return 0;
    return std::atoi(env);
  }();
  return level;
}

inline void log_line(const std::string& message) {
  std::cerr << message << "\n";
}

}  // namespace sdoh
