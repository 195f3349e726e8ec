#include "polarcbo/log.hpp"

#include <iostream>
#include <mutex>

namespace polarcbo {

namespace {

std::mutex handler_mutex;
WarnHandler handler = [](const std::string& message) {
  std::cerr << "[polarcbo] warning: " << message << "\n";
};

}  // namespace

WarnHandler set_warn_handler(WarnHandler new_handler) {
  std::lock_guard<std::mutex> lock(handler_mutex);
  WarnHandler prev = handler;
  handler = std::move(new_handler);
  return prev;
}

void warn(const std::string& message) {
  WarnHandler h;
  {
    std::lock_guard<std::mutex> lock(handler_mutex);
    h = handler;
  }
  if (h) h(message);
}

}  // namespace polarcbo
