#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mealsense/forest.hpp"
#include "mealsense/matrix.hpp"

namespace mealsense {

struct Fold {
    std::vector<std::string> train;
    std::vector<std::string> test;
};

struct SplitPlan {
    std::vector<Fold> folds;
    std::uint64_t seed = 0;
    int k = 0;
};

enum class BalanceMode { post_split, pre_split };

struct FeatureGroupSpec {
    std::string name;                 // A, A+T, A+T+Cps, A+T+Csr, A+T+Cps+Csr
    std::vector<FeatureGroup> groups;
};

FeatureGroupSpec resolve_feature_group(const std::string& name);
const std::vector<std::string>& default_feature_groups();

struct Metrics {
    double accuracy = 0;
    double macro_precision = 0;
    double macro_recall = 0;
};

struct GroupResult {
    std::string name;
    Metrics pooled;                     // over concatenated test predictions
    std::vector<Metrics> per_fold;
    std::vector<int> skipped_folds;
    std::vector<std::pair<std::string, double>> top_importances;  // top 5
};

struct ExperimentReport {
    double baseline_accuracy = 50.0;
    std::vector<GroupResult> groups;
};

struct ExperimentConfig {
    int k = 0;                       // 0 = ceil(n_participants / 10)
    std::uint64_t seed = 0;
    ForestParams forest;
    BalanceMode balance = BalanceMode::post_split;
    std::vector<std::string> group_names;  // empty = all five
    int n_threads = 1;
};

// Participants shuffled by seeded RNG and chunked into ceil(n/k) disjoint
// test folds of size <= k; train = complement.
SplitPlan group_kfold(const std::vector<std::string>& participants, int k,
                      std::uint64_t seed);

// Duplicates minority-class rows (sampling with replacement) until class
// counts are equal. Training rows only; output indices are a multiset over
// the input indices.
std::vector<std::size_t> upsample(const std::vector<std::size_t>& row_indices,
                                  const std::vector<Social>& labels, Rng& rng);

// Fills missing cells with the training-fold median (mode for binary
// columns), in both splits. All-missing training columns are dropped.
struct ImputeResult {
    Rows train;
    Rows test;
    std::vector<std::size_t> kept_columns;  // indices into the input columns
};
ImputeResult impute(const Rows& train, const Rows& test);

Metrics metrics(const std::vector<Social>& y_true,
                const std::vector<Social>& y_pred);

ExperimentReport run_experiment(const FeatureMatrix& matrix,
                                const ExperimentConfig& config);

std::string report_to_csv(const ExperimentReport& report);
std::string report_to_json(const ExperimentReport& report);

}  // namespace mealsense
