#pragma once

#include <cstdint>
#include <functional>
#include <string>

namespace provgen {

/// Source of UTC instants in milliseconds since the Unix epoch. Injected
/// everywhere a timestamp is recorded so runs can be pinned in tests.
using Clock = std::function<std::int64_t()>;

Clock system_clock();
Clock fixed_clock(std::int64_t unix_ms);

/// "YYYY-MM-DDTHH:MM:SS.mmmZ"
std::string format_utc(std::int64_t unix_ms);

}  // namespace provgen
