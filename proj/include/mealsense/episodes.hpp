#pragma once

#include <map>
#include <string>
#include <vector>

#include "mealsense/ingest.hpp"
#include "mealsense/matrix.hpp"

namespace mealsense {

struct ExtractionConfig {
    int alpha_min = 120;          // window half-width, minutes
    int slot_len_min = 10;        // aggregation slot length, minutes
    int top_n_apps = 10;
    double min_slot_coverage = 0.5;  // per-side fraction of slots required
    double tsl_cap_hours = 24.0;

    void validate() const;  // throws std::invalid_argument

    static ExtractionConfig defaults_for(DatasetTag tag);
};

struct EatingEpisode {
    std::string episode_id;
    int participant = 0;  // index into manifest order
    LocalTimestamp t = 0;
    Social label = Social::alone;
    MealKind meal_kind = MealKind::meal;
    int activity_code = 0;
    int loc_code = 0;
};

// Aggregates for one 10-minute slot of one modality.
struct WearableSlot {
    LocalTimestamp start = 0;
    int steps = 0;
    int level_minutes[4] = {0, 0, 0, 0};  // indexed by ActivityLevel
};

struct AccelSlot {
    LocalTimestamp start = 0;
    double mean[3] = {0, 0, 0};      // per-axis mean
    double mean_abs[3] = {0, 0, 0};  // per-axis mean of absolute values
    int n = 0;
};

struct SlotSeries {
    // Per participant, sorted by slot start; empty slots absent.
    std::vector<std::vector<WearableSlot>> wearable;
    std::vector<std::vector<AccelSlot>> accel;
};

struct WindowBounds {
    LocalTimestamp before_begin, before_end;  // [T-a, T)
    LocalTimestamp after_begin, after_end;    // (T, T+a]
};

struct BuildLog {
    std::size_t episodes_total = 0;
    std::size_t rows_dropped = 0;
};

using FeatureMap = std::map<std::string, double>;

SlotSeries slotize(const CohortStore& cohort, const ExtractionConfig& config);

WindowBounds window_bounds(LocalTimestamp t, int alpha_min);

FeatureMap wearable_features(const std::vector<WearableSlot>& slots,
                             const EatingEpisode& episode,
                             const ExtractionConfig& config);

FeatureMap accel_features(const std::vector<AccelSlot>& slots,
                          const EatingEpisode& episode,
                          const ExtractionConfig& config);

// Root-mean-square haversine distance from the centroid, meters.
double radius_of_gyration(const std::vector<std::pair<double, double>>& points);

FeatureMap location_features(const std::vector<LocationPoint>& points,
                             const EatingEpisode& episode,
                             const ExtractionConfig& config);

FeatureMap screen_features(const std::vector<ScreenEvent>& events,
                           const EatingEpisode& episode,
                           const ExtractionConfig& config);

FeatureMap battery_features(const std::vector<BatteryEvent>& events,
                            const EatingEpisode& episode,
                            const ExtractionConfig& config);

// Cohort-wide app ranking by total event count, ties broken lexicographically.
std::vector<std::string> top_apps(const CohortStore& cohort, int top_n);

FeatureMap app_features(const std::vector<AppEvent>& events,
                        const EatingEpisode& episode,
                        const std::vector<std::string>& top,
                        const ExtractionConfig& config);

FeatureMap temporal_features(const EatingEpisode& episode,
                             const std::vector<EatingEpisode>& participant_history,
                             const ExtractionConfig& config);

FeatureMap selfreport_features(const EatingEpisode& episode,
                               const Manifest& manifest);

FeatureMatrix build_matrix(const CohortStore& cohort,
                           const ExtractionConfig& config,
                           BuildLog* log = nullptr);

}  // namespace mealsense
