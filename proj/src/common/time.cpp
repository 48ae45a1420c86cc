#include "ipu/common/time.hpp"

#include <cstdio>
#include <ctime>

namespace ipu {

std::string iso8601_utc(int64_t epoch_ms) {
    int64_t ms = epoch_ms % 1000;
    std::time_t secs = static_cast<std::time_t>(epoch_ms / 1000);
    if (ms < 0) {  // floor division for pre-epoch stamps
        ms += 1000;
        secs -= 1;
    }
    std::tm tm{};
    gmtime_r(&secs, &tm);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec,
                  static_cast<int>(ms));
    return buf;
}

}  // namespace ipu
