#pragma once

#include <functional>
#include <string>

namespace gprel::log {

using Sink = std::function<void(const std::string&)>;

// Warnings go to standard error unless a different sink is installed.
void warn(const std::string& message);

// Replaces the warning sink, returning the previous one. An empty sink
// restores the default.
Sink set_sink(Sink sink);

}  // namespace gprel::log
