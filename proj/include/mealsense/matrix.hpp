#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "mealsense/records.hpp"

namespace mealsense {

enum class FeatureGroup { T, A_fb, A_sp, C_ps, C_sr };

const char* to_string(FeatureGroup g);
std::optional<FeatureGroup> feature_group_from_string(const std::string& s);

struct FeatureInfo {
    std::string name;
    FeatureGroup group;
};

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) { return std::isnan(v); }

// Rows = eating episodes, columns = the fixed ordered feature catalog.
// Missing values are NaN; serialized as empty CSV cells.
struct FeatureMatrix {
    std::vector<FeatureInfo> catalog;
    std::vector<std::string> episode_ids;
    std::vector<std::string> participants;
    std::vector<Social> labels;
    std::vector<std::vector<double>> values;  // one vector per row

    std::size_t n_rows() const { return values.size(); }
    std::size_t n_cols() const { return catalog.size(); }
    int column_index(const std::string& name) const;
};

std::string matrix_to_csv(const FeatureMatrix& m);
std::string catalog_to_json(const FeatureMatrix& m);
FeatureMatrix matrix_from_csv(const std::string& csv_text,
                              const std::string& catalog_json);

// One-hot expands integer-coded C_sr categoricals (binary 0/1 columns pass
// through unchanged). Category sets come from the observed values, sorted.
FeatureMatrix expand_categoricals(const FeatureMatrix& m);

}  // namespace mealsense
