#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace mealsense {

// Local wall-clock timestamp, second resolution, no timezone math.
// Stored as seconds since 1970-01-01T00:00:00 (local civil time).
using LocalTimestamp = std::int64_t;

constexpr std::int64_t kSecondsPerDay = 86400;

// Parses strict "YYYY-MM-DDTHH:MM:SS"; year must lie in [2000, 2100].
std::optional<LocalTimestamp> parse_timestamp(const std::string& iso);

std::string format_timestamp(LocalTimestamp t);

inline std::int64_t seconds_of_day(LocalTimestamp t) {
    std::int64_t s = t % kSecondsPerDay;
    return s < 0 ? s + kSecondsPerDay : s;
}

inline LocalTimestamp midnight_of(LocalTimestamp t) {
    return t - seconds_of_day(t);
}

// Largest slot boundary <= t. Slot boundaries are wall-clock multiples of
// slot_len_sec from midnight; slot_len_sec must divide a day.
inline LocalTimestamp align_down(LocalTimestamp t, std::int64_t slot_len_sec) {
    LocalTimestamp m = midnight_of(t);
    return m + ((t - m) / slot_len_sec) * slot_len_sec;
}

inline LocalTimestamp align_up(LocalTimestamp t, std::int64_t slot_len_sec) {
    LocalTimestamp d = align_down(t, slot_len_sec);
    return d == t ? t : d + slot_len_sec;
}

// Builds a timestamp from civil fields without validation against ranges
// beyond basic calendar correctness. Returns nullopt for impossible dates.
std::optional<LocalTimestamp> make_timestamp(int year, int month, int day,
                                             int hour, int minute, int second);

}  // namespace mealsense
