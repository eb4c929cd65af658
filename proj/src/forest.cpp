#include "mealsense/forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace mealsense {

using nlohmann::json;

void ForestParams::validate(std::size_t n_features) const {
    if (!allow_any_ntree && (ntree < 100 || ntree > 150))
        throw std::invalid_argument("ntree outside paper range [100,150]");
    if (ntree < 1) throw std::invalid_argument("ntree must be >= 1");
    if (mtry < 0 || mtry > static_cast<int>(n_features))
        throw std::invalid_argument("mtry outside [0, p]");
    if (min_leaf < 1 || min_split < 2)
        throw std::invalid_argument("invalid min_leaf/min_split");
    if (max_depth < 0) throw std::invalid_argument("invalid max_depth");
}

namespace {

constexpr double kTieEps = 1e-12;

struct SplitCandidate {
    bool valid = false;
    int feature = -1;
    double threshold = 0;
    // Weighted child impurity n_l*G_l + n_r*G_r; lower is better.
    double score = 0;
};

double weighted_gini(int a0, int a1) {
    int n = a0 + a1;
    if (n == 0) return 0;
    double p0 = static_cast<double>(a0) / n;
    double p1 = static_cast<double>(a1) / n;
    return n * (1.0 - p0 * p0 - p1 * p1);
}

// Best split on a single feature; scratch holds (value, label) pairs.
void best_split_on_feature(const Rows& X, const Labels& y,
                           const std::vector<int>& idx, int feature,
                           int min_leaf,
                           std::vector<std::pair<double, int>>& scratch,
                           SplitCandidate& best) {
    scratch.clear();
    for (int i : idx)
        scratch.emplace_back(X[static_cast<std::size_t>(i)]
                              [static_cast<std::size_t>(feature)],
                             y[static_cast<std::size_t>(i)]);
    std::sort(scratch.begin(), scratch.end());

    int n = static_cast<int>(scratch.size());
    int total1 = 0;
    for (const auto& [v, l] : scratch) total1 += l;
    int total0 = n - total1;

    int left0 = 0, left1 = 0;
    for (int i = 0; i + 1 < n; ++i) {
        if (scratch[static_cast<std::size_t>(i)].second == 0)
            ++left0;
        else
            ++left1;
        double v = scratch[static_cast<std::size_t>(i)].first;
        double vn = scratch[static_cast<std::size_t>(i + 1)].first;
        if (v == vn) continue;
        int nl = i + 1, nr = n - nl;
        if (nl < min_leaf || nr < min_leaf) continue;
        double score = weighted_gini(left0, left1) +
                       weighted_gini(total0 - left0, total1 - left1);
        double thr = v + 0.5 * (vn - v);
        if (!best.valid || score < best.score - kTieEps) {
            best.valid = true;
            best.feature = feature;
            best.threshold = thr;
            best.score = score;
        }
        // Equal scores keep the earlier candidate (lower feature, then
        // lower threshold, because features and values are swept ascending).
    }
}

struct Builder {
    const Rows& X;
    const Labels& y;
    const ForestParams& params;
    Rng& rng;
    int n_features;
    std::vector<TreeNode> nodes;
    std::vector<std::pair<double, int>> scratch;

    int build(std::vector<int>& idx, int depth) {
        int c1 = 0;
        for (int i : idx) c1 += y[static_cast<std::size_t>(i)];
        int c0 = static_cast<int>(idx.size()) - c1;

        int node_id = static_cast<int>(nodes.size());
        nodes.emplace_back();
        nodes[static_cast<std::size_t>(node_id)].n_alone = c0;
        nodes[static_cast<std::size_t>(node_id)].n_others = c1;

        bool stop = c0 == 0 || c1 == 0 ||
                    static_cast<int>(idx.size()) < params.min_split ||
                    (params.max_depth > 0 && depth >= params.max_depth);
        SplitCandidate best;
        if (!stop) {
            int mtry = params.mtry > 0
                           ? params.mtry
                           : std::max(1, static_cast<int>(std::sqrt(
                                             static_cast<double>(n_features))));
            mtry = std::min(mtry, n_features);
            std::vector<int> feats =
                rng.sample_without_replacement(n_features, mtry);
            std::sort(feats.begin(), feats.end());
            for (int f : feats)
                best_split_on_feature(X, y, idx, f, params.min_leaf, scratch,
                                      best);
            if (!best.valid && mtry < n_features) {
                // The sampled subset was all-constant; fall back to the full
                // feature set before declaring a leaf.
                for (int f = 0; f < n_features; ++f)
                    best_split_on_feature(X, y, idx, f, params.min_leaf, scratch,
                                          best);
            }
        }
        if (stop || !best.valid) return node_id;

        std::vector<int> left_idx, right_idx;
        for (int i : idx) {
            double v = X[static_cast<std::size_t>(i)]
                        [static_cast<std::size_t>(best.feature)];
            (v <= best.threshold ? left_idx : right_idx).push_back(i);
        }
        idx.clear();
        idx.shrink_to_fit();

        int left = build(left_idx, depth + 1);
        int right = build(right_idx, depth + 1);
        TreeNode& nd = nodes[static_cast<std::size_t>(node_id)];
        nd.feature = best.feature;
        nd.threshold = best.threshold;
        nd.left = left;
        nd.right = right;
        return node_id;
    }
};

}  // namespace

DecisionTree train_tree(const Rows& X, const Labels& y,
                        const std::vector<int>& row_indices, Rng& rng,
                        const ForestParams& params) {
    if (row_indices.empty())
        throw std::invalid_argument("train_tree: empty row set");
    if (X.empty()) throw std::invalid_argument("train_tree: empty dataset");
    int n_features = static_cast<int>(X[0].size());
    Builder b{X, y, params, rng, n_features, {}, {}};
    std::vector<int> idx = row_indices;
    b.build(idx, 0);
    DecisionTree t;
    t.nodes = std::move(b.nodes);
    return t;
}

const TreeNode& DecisionTree::leaf_for(const std::vector<double>& x) const {
    int cur = 0;
    while (nodes[static_cast<std::size_t>(cur)].feature >= 0) {
        const TreeNode& nd = nodes[static_cast<std::size_t>(cur)];
        cur = x[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left
                                                                      : nd.right;
    }
    return nodes[static_cast<std::size_t>(cur)];
}

Social DecisionTree::predict(const std::vector<double>& x) const {
    const TreeNode& leaf = leaf_for(x);
    // Leaf tie goes to alone.
    return leaf.n_others > leaf.n_alone ? Social::with_others : Social::alone;
}

ForestModel train_forest(const Rows& X, const Labels& y,
                         const ForestParams& params, int n_threads,
                         const std::vector<std::int64_t>* row_ids) {
    if (X.size() < 2) throw std::invalid_argument("train_forest: need >= 2 rows");
    if (X.size() != y.size())
        throw std::invalid_argument("train_forest: X/y size mismatch");
    params.validate(X[0].size());

    // Canonical order: ascending row id. Bootstrap positions index this
    // order, so permuting the input rows cannot change the model.
    std::vector<int> canon(X.size());
    std::iota(canon.begin(), canon.end(), 0);
    if (row_ids) {
        if (row_ids->size() != X.size())
            throw std::invalid_argument("train_forest: row_ids size mismatch");
        std::sort(canon.begin(), canon.end(), [&](int a, int b) {
            return (*row_ids)[static_cast<std::size_t>(a)] <
                   (*row_ids)[static_cast<std::size_t>(b)];
        });
    }

    ForestModel model;
    model.params = params;
    model.trees.resize(static_cast<std::size_t>(params.ntree));

    std::size_t n = X.size();
    auto train_one = [&](int tree_index) {
        Rng rng(derive_seed(params.seed, static_cast<std::uint64_t>(tree_index)));
        std::vector<int> bootstrap(n);
        for (std::size_t i = 0; i < n; ++i)
            bootstrap[i] = canon[static_cast<std::size_t>(rng.below(n))];
        model.trees[static_cast<std::size_t>(tree_index)] =
            train_tree(X, y, bootstrap, rng, params);
    };

    int threads = std::max(1, n_threads);
    if (threads == 1) {
        for (int i = 0; i < params.ntree; ++i) train_one(i);
    } else {
        std::vector<std::thread> pool;
        std::atomic<int> next{0};
        for (int w = 0; w < threads; ++w)
            pool.emplace_back([&] {
                for (int i = next.fetch_add(1); i < params.ntree;
                     i = next.fetch_add(1))
                    train_one(i);
            });
        for (auto& th : pool) th.join();
    }
    return model;
}

Prediction predict(const ForestModel& model, const std::vector<double>& x) {
    if (!model.feature_names.empty() && x.size() != model.feature_names.size())
        throw std::invalid_argument("predict: feature dimension mismatch");
    if (!model.trees.empty() && model.trees[0].nodes.empty())
        throw std::invalid_argument("predict: untrained model");
    int votes_others = 0;
    for (const auto& t : model.trees)
        if (t.predict(x) == Social::with_others) ++votes_others;
    int total = static_cast<int>(model.trees.size());
    int votes_alone = total - votes_others;
    Prediction p;
    // Forest tie goes to alone.
    p.label = votes_others > votes_alone ? Social::with_others : Social::alone;
    int winning = p.label == Social::alone ? votes_alone : votes_others;
    p.prob = static_cast<double>(winning) / total;
    return p;
}

std::map<std::string, double> feature_importance(const ForestModel& model) {
    std::size_t p = model.feature_names.size();
    for (const auto& t : model.trees)
        for (const auto& nd : t.nodes)
            if (nd.feature >= 0)
                p = std::max(p, static_cast<std::size_t>(nd.feature) + 1);
    std::vector<double> weight(p, 0.0);
    auto gini = [](int a, int b) {
        int n = a + b;
        if (n == 0) return 0.0;
        double p0 = static_cast<double>(a) / n, p1 = static_cast<double>(b) / n;
        return 1.0 - p0 * p0 - p1 * p1;
    };
    for (const auto& t : model.trees) {
        if (t.nodes.empty()) continue;
        double n_root = t.nodes[0].n_alone + t.nodes[0].n_others;
        for (const auto& nd : t.nodes) {
            if (nd.feature < 0) continue;
            const TreeNode& l = t.nodes[static_cast<std::size_t>(nd.left)];
            const TreeNode& r = t.nodes[static_cast<std::size_t>(nd.right)];
            double n_node = nd.n_alone + nd.n_others;
            double n_l = l.n_alone + l.n_others;
            double n_r = r.n_alone + r.n_others;
            double decrease = gini(nd.n_alone, nd.n_others) -
                              (n_l / n_node) * gini(l.n_alone, l.n_others) -
                              (n_r / n_node) * gini(r.n_alone, r.n_others);
            weight[static_cast<std::size_t>(nd.feature)] +=
                (n_node / n_root) * decrease;
        }
    }
    double total = 0;
    for (double w : weight) total += w;
    std::map<std::string, double> out;
    for (std::size_t i = 0; i < p; ++i) {
        std::string name = i < model.feature_names.size()
                               ? model.feature_names[i]
                               : "f" + std::to_string(i);
        out[name] = total > 0 ? weight[i] / total : 0.0;
    }
    return out;
}

std::string model_to_json(const ForestModel& model) {
    json j;
    j["version"] = 1;
    j["params"] = {{"ntree", model.params.ntree},
                   {"mtry", model.params.mtry},
                   {"max_depth", model.params.max_depth},
                   {"min_leaf", model.params.min_leaf},
                   {"min_split", model.params.min_split},
                   {"seed", model.params.seed}};
    j["features"] = model.feature_names;
    json trees = json::array();
    for (const auto& t : model.trees) {
        json tj;
        for (const auto& nd : t.nodes) {
            tj["feature"].push_back(nd.feature);
            tj["threshold"].push_back(nd.threshold);
            tj["left"].push_back(nd.left);
            tj["right"].push_back(nd.right);
            tj["n_alone"].push_back(nd.n_alone);
            tj["n_others"].push_back(nd.n_others);
        }
        trees.push_back(std::move(tj));
    }
    j["trees"] = std::move(trees);
    return j.dump();
}

ForestModel model_from_json(const std::string& text) {
    json j = json::parse(text);
    if (j.value("version", 0) != 1)
        throw std::runtime_error("model json: unsupported version");
    ForestModel m;
    m.params.ntree = j["params"]["ntree"].get<int>();
    m.params.mtry = j["params"]["mtry"].get<int>();
    m.params.max_depth = j["params"]["max_depth"].get<int>();
    m.params.min_leaf = j["params"]["min_leaf"].get<int>();
    m.params.min_split = j["params"]["min_split"].get<int>();
    m.params.seed = j["params"]["seed"].get<std::uint64_t>();
    m.feature_names = j["features"].get<std::vector<std::string>>();
    for (const auto& tj : j["trees"]) {
        DecisionTree t;
        std::size_t n = tj["feature"].size();
        for (std::size_t i = 0; i < n; ++i) {
            TreeNode nd;
            nd.feature = tj["feature"][i].get<int>();
            nd.threshold = tj["threshold"][i].get<double>();
            nd.left = tj["left"][i].get<int>();
            nd.right = tj["right"][i].get<int>();
            nd.n_alone = tj["n_alone"][i].get<int>();
            nd.n_others = tj["n_others"][i].get<int>();
            t.nodes.push_back(nd);
        }
        m.trees.push_back(std::move(t));
    }
    return m;
}

}  // namespace mealsense
