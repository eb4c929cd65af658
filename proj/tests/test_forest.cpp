#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "mealsense/forest.hpp"

using namespace mealsense;

namespace {

ForestParams small_params(int ntree = 25) {
    ForestParams p;
    p.ntree = ntree;
    p.allow_any_ntree = true;
    p.seed = 42;
    return p;
}

// Linearly separable toy set: feature 0 separates the classes at 5.
void toy_dataset(Rows& X, Labels& y) {
    X.clear();
    y.clear();
    for (int i = 0; i < 20; ++i) {
        double a = i < 10 ? i : i + 10;  // 0..9 vs 20..29
        double noise = (i * 7) % 5;
        X.push_back({a, noise});
        y.push_back(i < 10 ? 0 : 1);
    }
}

std::vector<int> all_rows(std::size_t n) {
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    return idx;
}

}  // namespace

TEST_CASE("params validation") {
    ForestParams p;
    CHECK_NOTHROW(p.validate(10));
    p.ntree = 50;
    CHECK_THROWS_WITH_AS(p.validate(10), "ntree outside paper range [100,150]",
                         std::invalid_argument);
    p.allow_any_ntree = true;
    CHECK_NOTHROW(p.validate(10));
    p.mtry = 11;
    CHECK_THROWS_AS(p.validate(10), std::invalid_argument);
}

TEST_CASE("single tree on two separable rows") {
    Rows X = {{0.0}, {1.0}};
    Labels y = {0, 1};
    ForestParams p = small_params();
    p.mtry = 1;
    Rng rng(1);
    DecisionTree t = train_tree(X, y, all_rows(2), rng, p);
    REQUIRE(t.nodes.size() == 3);
    CHECK(t.nodes[0].feature == 0);
    CHECK(t.nodes[0].threshold == doctest::Approx(0.5));
    CHECK(t.predict({0.0}) == Social::alone);
    CHECK(t.predict({1.0}) == Social::with_others);
    // children are pure and partition the parent samples
    const TreeNode& l = t.nodes[static_cast<std::size_t>(t.nodes[0].left)];
    const TreeNode& r = t.nodes[static_cast<std::size_t>(t.nodes[0].right)];
    CHECK(l.n_alone + l.n_others + r.n_alone + r.n_others == 2);
    CHECK(l.n_others == 0);
    CHECK(r.n_alone == 0);
}

TEST_CASE("pure labels give a single leaf") {
    Rows X = {{0.0}, {1.0}, {2.0}};
    Labels y = {0, 0, 0};
    Rng rng(1);
    DecisionTree t = train_tree(X, y, all_rows(3), rng, small_params());
    CHECK(t.nodes.size() == 1);
    CHECK(t.nodes[0].feature == -1);
}

TEST_CASE("inseparable duplicate rows give a mixed leaf") {
    Rows X = {{1.0}, {1.0}};
    Labels y = {0, 1};
    Rng rng(1);
    DecisionTree t = train_tree(X, y, all_rows(2), rng, small_params());
    REQUIRE(t.nodes.size() == 1);
    CHECK(t.nodes[0].n_alone == 1);
    CHECK(t.nodes[0].n_others == 1);
    CHECK(t.predict({1.0}) == Social::alone);  // leaf tie -> alone
}

TEST_CASE("empty row set is rejected") {
    Rows X = {{0.0}};
    Labels y = {0};
    Rng rng(1);
    CHECK_THROWS_AS(train_tree(X, y, {}, rng, small_params()),
                    std::invalid_argument);
}

TEST_CASE("tie-break prefers the lowest feature index") {
    // Features 0 and 1 are identical copies: both yield the same Gini score.
    Rows X = {{0.0, 0.0}, {1.0, 1.0}, {0.0, 0.0}, {1.0, 1.0}};
    Labels y = {0, 1, 0, 1};
    ForestParams p = small_params();
    p.mtry = 2;
    Rng rng(1);
    DecisionTree t = train_tree(X, y, all_rows(4), rng, p);
    CHECK(t.nodes[0].feature == 0);
}

TEST_CASE("forest determinism and training accuracy on separable data") {
    Rows X;
    Labels y;
    toy_dataset(X, y);
    ForestParams p = small_params(40);
    ForestModel m1 = train_forest(X, y, p);
    ForestModel m2 = train_forest(X, y, p);
    m1.feature_names = m2.feature_names = {"f0", "f1"};
    CHECK(model_to_json(m1) == model_to_json(m2));
    for (std::size_t i = 0; i < X.size(); ++i) {
        Prediction pr = predict(m1, X[i]);
        CHECK(pr.label == (y[i] ? Social::with_others : Social::alone));
        CHECK(pr.prob >= 0.5);
        CHECK(pr.prob <= 1.0);
    }
}

TEST_CASE("thread count does not change the model") {
    Rows X;
    Labels y;
    toy_dataset(X, y);
    ForestParams p = small_params(32);
    ForestModel a = train_forest(X, y, p, 1);
    ForestModel b = train_forest(X, y, p, 4);
    CHECK(model_to_json(a) == model_to_json(b));
}

TEST_CASE("row permutation with row ids does not change the model") {
    Rows X;
    Labels y;
    toy_dataset(X, y);
    std::vector<std::int64_t> ids(X.size());
    std::iota(ids.begin(), ids.end(), 0);
    ForestParams p = small_params(16);
    ForestModel base = train_forest(X, y, p, 1, &ids);

    // rotate rows and ids together
    Rows X2 = X;
    Labels y2 = y;
    std::vector<std::int64_t> ids2 = ids;
    std::rotate(X2.begin(), X2.begin() + 7, X2.end());
    std::rotate(y2.begin(), y2.begin() + 7, y2.end());
    std::rotate(ids2.begin(), ids2.begin() + 7, ids2.end());
    ForestModel rotated = train_forest(X2, y2, p, 1, &ids2);
    CHECK(model_to_json(base) == model_to_json(rotated));
}

TEST_CASE("ntree guard") {
    Rows X;
    Labels y;
    toy_dataset(X, y);
    ForestParams p;
    p.ntree = 50;  // outside [100, 150], no override
    CHECK_THROWS_AS(train_forest(X, y, p), std::invalid_argument);
}

TEST_CASE("single-tree forest equals its tree's votes") {
    Rows X;
    Labels y;
    toy_dataset(X, y);
    ForestParams p = small_params(1);
    ForestModel m = train_forest(X, y, p);
    REQUIRE(m.trees.size() == 1);
    for (const auto& row : X) {
        Prediction pr = predict(m, row);
        CHECK(pr.label == m.trees[0].predict(row));
        CHECK(pr.prob == doctest::Approx(1.0));
    }
}

TEST_CASE("split-structure equivariance under feature shift") {
    Rows X;
    Labels y;
    toy_dataset(X, y);
    ForestParams p = small_params(16);
    ForestModel base = train_forest(X, y, p);
    Rows shifted = X;
    for (auto& row : shifted) row[0] += 1000.0;
    ForestModel moved = train_forest(shifted, y, p);
    for (std::size_t i = 0; i < X.size(); ++i) {
        std::vector<double> q = X[i];
        q[0] += 1000.0;
        CHECK(predict(moved, q).label == predict(base, X[i]).label);
    }
}

TEST_CASE("feature importance") {
    // single informative feature -> weight 1
    Rows X = {{0.0}, {1.0}, {0.0}, {1.0}};
    Labels y = {0, 1, 0, 1};
    ForestParams p = small_params(10);
    ForestModel m = train_forest(X, y, p);
    m.feature_names = {"only"};
    auto imp = feature_importance(m);
    CHECK(imp.at("only") == doctest::Approx(1.0));

    // informative + noise feature: weights sum to 1, unused ~ small
    Rows X2;
    Labels y2;
    toy_dataset(X2, y2);
    ForestParams p2 = small_params(40);
    p2.mtry = 2;
    ForestModel m2 = train_forest(X2, y2, p2);
    m2.feature_names = {"signal", "noise"};
    auto imp2 = feature_importance(m2);
    double total = 0;
    for (const auto& [k, v] : imp2) {
        CHECK(v >= 0);
        total += v;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(imp2.at("signal") > imp2.at("noise"));
}

TEST_CASE("model json round trip") {
    Rows X;
    Labels y;
    toy_dataset(X, y);
    ForestParams p = small_params(12);
    ForestModel m = train_forest(X, y, p);
    m.feature_names = {"f0", "f1"};
    std::string text = model_to_json(m);
    ForestModel back = model_from_json(text);
    CHECK(model_to_json(back) == text);
    for (const auto& row : X)
        CHECK(predict(back, row).label == predict(m, row).label);

    CHECK_THROWS_AS(model_from_json("{\"version\":99}"), std::runtime_error);
}

TEST_CASE("prediction dimension mismatch") {
    Rows X;
    Labels y;
    toy_dataset(X, y);
    ForestModel m = train_forest(X, y, small_params(8));
    m.feature_names = {"f0", "f1"};
    CHECK_THROWS_AS(predict(m, {1.0}), std::invalid_argument);
}

TEST_CASE("root split matches exhaustive minimum-Gini search") {
    // Small enumerated suite; the full suite runs in the acceptance binary.
    auto exhaustive = [](const Rows& X, const Labels& y) {
        int best_f = -1;
        double best_thr = 0, best_score = 0;
        bool found = false;
        std::size_t p = X[0].size();
        for (std::size_t f = 0; f < p; ++f) {
            std::vector<std::pair<double, int>> v;
            for (std::size_t i = 0; i < X.size(); ++i)
                v.emplace_back(X[i][f], y[i]);
            std::sort(v.begin(), v.end());
            int total1 = 0;
            for (auto& [val, l] : v) total1 += l;
            int n = static_cast<int>(v.size());
            int l0 = 0, l1 = 0;
            for (int i = 0; i + 1 < n; ++i) {
                (v[static_cast<std::size_t>(i)].second ? l1 : l0)++;
                if (v[static_cast<std::size_t>(i)].first ==
                    v[static_cast<std::size_t>(i + 1)].first)
                    continue;
                auto wg = [](int a, int b) {
                    int m = a + b;
                    if (!m) return 0.0;
                    double pa = static_cast<double>(a) / m;
                    double pb = static_cast<double>(b) / m;
                    return m * (1 - pa * pa - pb * pb);
                };
                double score = wg(l0, l1) + wg((n - total1) - l0, total1 - l1);
                double thr = v[static_cast<std::size_t>(i)].first +
                             0.5 * (v[static_cast<std::size_t>(i + 1)].first -
                                    v[static_cast<std::size_t>(i)].first);
                if (!found || score < best_score - 1e-12) {
                    found = true;
                    best_f = static_cast<int>(f);
                    best_thr = thr;
                    best_score = score;
                }
            }
        }
        return std::tuple<bool, int, double>{found, best_f, best_thr};
    };

    Rng gen(77);
    for (int trial = 0; trial < 50; ++trial) {
        std::size_t n = 4 + gen.below(9);
        Rows X(n, std::vector<double>(3));
        Labels y(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (int f = 0; f < 3; ++f)
                X[i][static_cast<std::size_t>(f)] =
                    static_cast<double>(gen.below(3));
            y[i] = static_cast<int>(gen.below(2));
        }
        auto [found, f, thr] = exhaustive(X, y);
        ForestParams p = small_params();
        p.mtry = 3;
        Rng rng(trial);
        std::vector<int> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        DecisionTree t = train_tree(X, y, idx, rng, p);
        bool has_split = t.nodes[0].feature >= 0;
        bool pure = std::all_of(y.begin(), y.end(), [&](int l) { return l == y[0]; });
        if (pure) {
            CHECK_FALSE(has_split);
        } else if (found) {
            REQUIRE(has_split);
            CHECK(t.nodes[0].feature == f);
            CHECK(t.nodes[0].threshold == doctest::Approx(thr));
        } else {
            CHECK_FALSE(has_split);
        }
    }
}
