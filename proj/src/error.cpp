#include "decoy/error.hpp"

#include <iostream>
#include <mutex>

namespace decoy {
namespace {

std::mutex g_handler_mutex;
WarningHandler g_handler;

}  // namespace

void set_warning_handler(WarningHandler handler) {
  std::lock_guard lock(g_handler_mutex);
  g_handler = std::move(handler);
}

void warn(std::string_view message) {
  std::lock_guard lock(g_handler_mutex);
  if (g_handler) {
    g_handler(message);
  } else {
    std::cerr << "warning: " << message << '\n';
  }
}

}  // namespace decoy
