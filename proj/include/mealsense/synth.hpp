#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "mealsense/episodes.hpp"
#include "mealsense/ingest.hpp"

namespace mealsense {

struct MealPeak {
    double hour_mean = 12.0;
    double hour_sd = 0.6;
    double p_occur = 0.9;
    double p_alone = 0.5;
};

// Deterministic cohort generator with plantable per-feature effect sizes.
// Effects are planted on latent slot-level rates, so the full extraction
// pipeline is exercised end to end; the planted Cohen's d is recovered (in
// expectation) from the extracted features.
struct CohortSpec {
    DatasetTag style = DatasetTag::wearable_style;
    int n_participants = 122;
    int n_days = 13;
    std::vector<MealPeak> peaks;
    double snack_prob = 0.23;
    std::map<std::string, double> planted_effects;  // feature name -> target d
    double label_signal_strength = 0.0;             // C_sr informativeness
    std::uint64_t seed = 0;
    bool has_seed = false;
    ExtractionConfig extraction;  // alpha/slot geometry used for rendering

    static CohortSpec defaults_for(DatasetTag style);
    void validate() const;  // throws std::invalid_argument
};

struct GroundTruthEntry {
    std::string participant;
    LocalTimestamp t = 0;
    Social label = Social::alone;
    int peak = 0;
};

struct GroundTruth {
    std::vector<GroundTruthEntry> episodes;
    std::map<std::string, double> planted_effects;
};

struct SynthResult {
    CohortStore store;
    GroundTruth truth;
};

SynthResult generate_cohort(const CohortSpec& spec);

// Uniformly permutes the social-context labels of every eating report;
// sensing records are untouched.
CohortStore shuffle_labels(const CohortStore& cohort, std::uint64_t seed);

CohortSpec spec_from_json(std::istream& in);
std::string spec_to_json(const CohortSpec& spec);
std::string ground_truth_to_json(const GroundTruth& truth);

// Writes the JSON Lines modality files, manifest.json and ground_truth.json.
void write_cohort_files(const SynthResult& result, const std::string& dir);

}  // namespace mealsense
