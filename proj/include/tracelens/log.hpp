#pragma once

#include <string>

namespace tracelens::log {

enum class Level { Off = 0, Error = 1, Warn = 2, Info = 3, Debug = 4 };

// Verbosity comes from the TRACELENS_LOG environment variable
// ("off", "error", "warn", "info", "debug"); default is "warn".
Level level();
bool enabled(Level lvl);
void write(Level lvl, const std::string& message);

inline void error(const std::string& m) { write(Level::Error, m); }
inline void warn(const std::string& m) { write(Level::Warn, m); }
inline void info(const std::string& m) { write(Level::Info, m); }
inline void debug(const std::string& m) { write(Level::Debug, m); }

} // namespace tracelens::log
