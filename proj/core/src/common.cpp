// SPDX-License-Identifier: Apache-2.0
#include "twobounce/common.hpp"

#include <atomic>
#include <iostream>

namespace twobounce {
namespace {

void stderr_sink(const std::string& message) { std::cerr << "warning: " << message << '\n'; }

std::atomic<WarningSink> g_sink{&stderr_sink};

}  // namespace

void warn(const std::string& message) { g_sink.load()(message); }

WarningSink set_warning_sink(WarningSink sink) {
  return g_sink.exchange(sink != nullptr ? sink : &stderr_sink);
}

}  // namespace twobounce
