#pragma once

#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "mealsense/records.hpp"

namespace mealsense {

class IngestError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class DatasetTag { wearable_style, phone_style, custom };

const char* to_string(DatasetTag t);
std::optional<DatasetTag> dataset_tag_from_string(const std::string& s);

struct Manifest {
    std::vector<std::string> participants;  // order is canonical row order
    DatasetTag dataset_tag = DatasetTag::custom;
    // Declared vocabularies for self-report codes; empty = unconstrained.
    std::vector<int> activity_codes;
    std::vector<int> loc_codes;
};

// Per-participant, per-modality time-sorted record store. Immutable once
// built; safe to share across threads.
struct ParticipantData {
    std::vector<AccelSample> accel;
    std::vector<WearableMinute> wearable;
    std::vector<LocationPoint> location;
    std::vector<ScreenEvent> screen;
    std::vector<BatteryEvent> battery;
    std::vector<AppEvent> app;
    std::vector<EatingReport> report;
};

struct CohortStore {
    Manifest manifest;
    std::vector<ParticipantData> data;  // parallel to manifest.participants

    int participant_index(const std::string& id) const;
    std::size_t total_records() const;
};

// One record per well-formed JSON line; throws IngestError naming the first
// offending line. Lines are never silently dropped.
std::vector<RawRecord> parse_stream(std::istream& in, Modality kind);

Manifest parse_manifest(std::istream& in);

CohortStore build_cohort(const std::vector<RawRecord>& records,
                         const Manifest& manifest);

// JSON Lines emission, one file content per modality (inverse of parse_stream).
std::string to_jsonl(const CohortStore& store, Modality kind);
std::string manifest_to_json(const Manifest& manifest);

}  // namespace mealsense
