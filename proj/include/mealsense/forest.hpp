#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mealsense/records.hpp"
#include "mealsense/rng.hpp"

namespace mealsense {

struct ForestParams {
    int ntree = 128;        // paper range [100, 150]
    int mtry = 0;           // 0 = floor(sqrt(p))
    int max_depth = 0;      // 0 = unlimited
    int min_leaf = 1;
    int min_split = 2;
    std::uint64_t seed = 0;
    bool allow_any_ntree = false;

    void validate(std::size_t n_features) const;
};

// Flattened CART node array. feature < 0 marks a leaf.
struct TreeNode {
    int feature = -1;
    double threshold = 0;
    int left = -1, right = -1;
    int n_alone = 0, n_others = 0;
};

struct DecisionTree {
    std::vector<TreeNode> nodes;

    Social predict(const std::vector<double>& x) const;
    const TreeNode& leaf_for(const std::vector<double>& x) const;
};

struct ForestModel {
    ForestParams params;
    std::vector<std::string> feature_names;
    std::vector<DecisionTree> trees;
};

// Labels as 0 = alone, 1 = with_others. X is row-major.
using Rows = std::vector<std::vector<double>>;
using Labels = std::vector<int>;

// Greedy CART: best Gini split over an mtry-subset of features; candidate
// thresholds are midpoints between consecutive distinct sorted values; ties
// broken by lowest feature index, then lowest threshold.
DecisionTree train_tree(const Rows& X, const Labels& y,
                        const std::vector<int>& row_indices, Rng& rng,
                        const ForestParams& params);

// ntree bootstrap trees; tree i draws from an RNG seeded from seed ^ i, so
// the model is identical for any thread count. row_ids, when given, define
// the canonical order bootstrap positions refer to.
ForestModel train_forest(const Rows& X, const Labels& y,
                         const ForestParams& params, int n_threads = 1,
                         const std::vector<std::int64_t>* row_ids = nullptr);

struct Prediction {
    Social label = Social::alone;
    double prob = 0;  // vote fraction for the predicted class
};

Prediction predict(const ForestModel& model, const std::vector<double>& x);

// Mean decrease in Gini impurity, node-sample weighted, normalized to sum 1.
std::map<std::string, double> feature_importance(const ForestModel& model);

std::string model_to_json(const ForestModel& model);
ForestModel model_from_json(const std::string& text);

}  // namespace mealsense
