#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mealsense/timeutil.hpp"

namespace mealsense {

enum class Modality { accel, wearable, location, screen, battery, app, report };

enum class ActivityLevel { sedentary, lightly, fairly, very };
enum class Social { alone, with_others };
enum class MealKind { meal, snack };
enum class ScreenState { on, off };

const char* to_string(Modality m);
const char* to_string(ActivityLevel l);
const char* to_string(Social s);
const char* to_string(MealKind k);
std::optional<Modality> modality_from_string(const std::string& s);

struct RecordHeader {
    std::string participant;
    LocalTimestamp t = 0;
};

struct AccelSample : RecordHeader {
    double x = 0, y = 0, z = 0;
};

struct WearableMinute : RecordHeader {
    int steps = 0;
    ActivityLevel level = ActivityLevel::sedentary;
};

struct LocationPoint : RecordHeader {
    double lat = 0, lon = 0;
};

struct ScreenEvent : RecordHeader {
    ScreenState state = ScreenState::off;
};

struct BatteryEvent : RecordHeader {
    double level = 0;  // percent
    bool charging = false;
};

struct AppEvent : RecordHeader {
    std::string app_id;
};

struct EatingReport : RecordHeader {
    Social social_context = Social::alone;
    MealKind meal_kind = MealKind::meal;
    int activity_code = 0;
    int loc_code = 0;
};

using RawRecord = std::variant<AccelSample, WearableMinute, LocationPoint,
                               ScreenEvent, BatteryEvent, AppEvent, EatingReport>;

inline const RecordHeader& header_of(const RawRecord& r) {
    return std::visit(
        [](const auto& rec) -> const RecordHeader& { return rec; }, r);
}

Modality modality_of(const RawRecord& r);

}  // namespace mealsense
