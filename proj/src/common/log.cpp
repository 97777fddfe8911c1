#include "arc/common/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace arc::log {

namespace {
std::atomic<bool> g_quiet{false};
std::mutex g_mutex;
}  // namespace

void set_quiet(bool quiet) { g_quiet = quiet; }

void info(std::string_view message) {
    if (g_quiet) return;
    std::lock_guard lock(g_mutex);
    std::cerr << "[info] " << message << '\n';
}

void warn(std::string_view message) {
    std::lock_guard lock(g_mutex);
    std::cerr << "[warn] " << message << '\n';
}

}  // namespace arc::log
