#pragma once

#include <cstdint>
#include <string>

namespace ipu {

// Formats milliseconds since the Unix epoch as "YYYY-MM-DDTHH:MM:SS.mmmZ".
std::string iso8601_utc(int64_t epoch_ms);

}  // namespace ipu
