#include "tracelens/log.hpp"

#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <mutex>

namespace tracelens::log {

namespace {

Level parse_level() {
    const char* raw = std::getenv("TRACELENS_LOG");
    if (raw == nullptr) return Level::Warn;
    std::string v(raw);
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "off" || v == "none" || v == "0") return Level::Off;
    if (v == "error") return Level::Error;
    if (v == "warn" || v == "warning") return Level::Warn;
    if (v == "info") return Level::Info;
    if (v == "debug" || v == "trace") return Level::Debug;
    return Level::Warn;
}

const char* level_tag(Level lvl) {
    switch (lvl) {
        case Level::Error: return "error";
        case Level::Warn: return "warn";
        case Level::Info: return "info";
        case Level::Debug: return "debug";
        default: return "?";
    }
}

std::mutex g_mu;

} // namespace

Level level() {
    static const Level lvl = parse_level();
    return lvl;
}

bool enabled(Level lvl) {
    return static_cast<int>(lvl) <= static_cast<int>(level());
}

void write(Level lvl, const std::string& message) {
    if (!enabled(lvl)) return;
    std::lock_guard<std::mutex> lock(g_mu);
    std::cerr << "tracelens: " << level_tag(lvl) << ": " << message << "\n";
}

} // namespace tracelens::log
