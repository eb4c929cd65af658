#include "mealsense/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace mealsense {

using nlohmann::json;

FeatureGroupSpec resolve_feature_group(const std::string& name) {
    FeatureGroupSpec spec;
    spec.name = name;
    // A covers both activity variants; a given dataset style carries one.
    if (name == "A")
        spec.groups = {FeatureGroup::A_fb, FeatureGroup::A_sp};
    else if (name == "A+T")
        spec.groups = {FeatureGroup::A_fb, FeatureGroup::A_sp, FeatureGroup::T};
    else if (name == "A+T+Cps")
        spec.groups = {FeatureGroup::A_fb, FeatureGroup::A_sp, FeatureGroup::T,
                       FeatureGroup::C_ps};
    else if (name == "A+T+Csr")
        spec.groups = {FeatureGroup::A_fb, FeatureGroup::A_sp, FeatureGroup::T,
                       FeatureGroup::C_sr};
    else if (name == "A+T+Cps+Csr")
        spec.groups = {FeatureGroup::A_fb, FeatureGroup::A_sp, FeatureGroup::T,
                       FeatureGroup::C_ps, FeatureGroup::C_sr};
    else
        throw std::invalid_argument("unknown feature group '" + name + "'");
    return spec;
}

const std::vector<std::string>& default_feature_groups() {
    static const std::vector<std::string> names = {"A", "A+T", "A+T+Cps",
                                                   "A+T+Csr", "A+T+Cps+Csr"};
    return names;
}

SplitPlan group_kfold(const std::vector<std::string>& participants, int k,
                      std::uint64_t seed) {
    int n = static_cast<int>(participants.size());
    if (k < 1 || k >= n)
        throw std::invalid_argument("group_kfold: need 1 <= k < n_participants");
    std::vector<std::string> shuffled = participants;
    Rng rng(seed);
    for (int i = n - 1; i > 0; --i) {
        int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i + 1)));
        std::swap(shuffled[static_cast<std::size_t>(i)],
                  shuffled[static_cast<std::size_t>(j)]);
    }
    SplitPlan plan;
    plan.seed = seed;
    plan.k = k;
    for (int start = 0; start < n; start += k) {
        Fold fold;
        int end = std::min(n, start + k);
        for (int i = 0; i < n; ++i) {
            if (i >= start && i < end)
                fold.test.push_back(shuffled[static_cast<std::size_t>(i)]);
            else
                fold.train.push_back(shuffled[static_cast<std::size_t>(i)]);
        }
        plan.folds.push_back(std::move(fold));
    }
    return plan;
}

std::vector<std::size_t> upsample(const std::vector<std::size_t>& row_indices,
                                  const std::vector<Social>& labels, Rng& rng) {
    std::vector<std::size_t> alone, others;
    for (std::size_t i : row_indices)
        (labels[i] == Social::alone ? alone : others).push_back(i);
    if (alone.empty() || others.empty())
        throw std::runtime_error("degenerate fold: a class is absent");
    std::vector<std::size_t> out = row_indices;
    const auto& minority = alone.size() < others.size() ? alone : others;
    std::size_t deficit = alone.size() < others.size()
                              ? others.size() - alone.size()
                              : alone.size() - others.size();
    for (std::size_t i = 0; i < deficit; ++i)
        out.push_back(minority[rng.below(minority.size())]);
    return out;
}

ImputeResult impute(const Rows& train, const Rows& test) {
    if (train.empty()) throw std::invalid_argument("impute: empty training fold");
    std::size_t p = train[0].size();
    ImputeResult res;
    res.train.resize(train.size());
    res.test.resize(test.size());

    for (std::size_t c = 0; c < p; ++c) {
        std::vector<double> present;
        for (const auto& row : train)
            if (!is_missing(row[c])) present.push_back(row[c]);
        if (present.empty()) continue;  // all-missing training column: dropped

        bool binary = true;
        std::size_t ones = 0;
        for (double v : present) {
            if (v == 1.0)
                ++ones;
            else if (v != 0.0)
                binary = false;
        }
        double fill;
        if (binary) {
            fill = ones * 2 >= present.size() ? 1.0 : 0.0;  // training-fold mode
        } else {
            std::sort(present.begin(), present.end());
            std::size_t n = present.size();
            fill = n % 2 == 1 ? present[n / 2]
                              : 0.5 * (present[n / 2 - 1] + present[n / 2]);
        }
        res.kept_columns.push_back(c);
        for (std::size_t r = 0; r < train.size(); ++r)
            res.train[r].push_back(is_missing(train[r][c]) ? fill : train[r][c]);
        for (std::size_t r = 0; r < test.size(); ++r)
            res.test[r].push_back(is_missing(test[r][c]) ? fill : test[r][c]);
    }
    return res;
}

Metrics metrics(const std::vector<Social>& y_true,
                const std::vector<Social>& y_pred) {
    if (y_true.size() != y_pred.size() || y_true.empty())
        throw std::invalid_argument("metrics: label sequences must match and be non-empty");
    std::size_t correct = 0;
    // confusion[actual][predicted], 0 = alone
    std::size_t conf[2][2] = {{0, 0}, {0, 0}};
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        int a = y_true[i] == Social::alone ? 0 : 1;
        int p = y_pred[i] == Social::alone ? 0 : 1;
        conf[a][p] += 1;
        if (a == p) ++correct;
    }
    Metrics m;
    m.accuracy = static_cast<double>(correct) / static_cast<double>(y_true.size());
    double prec = 0, rec = 0;
    for (int c = 0; c < 2; ++c) {
        std::size_t tp = conf[c][c];
        std::size_t predicted = conf[0][c] + conf[1][c];
        std::size_t actual = conf[c][0] + conf[c][1];
        prec += predicted > 0 ? static_cast<double>(tp) / predicted : 0.0;
        rec += actual > 0 ? static_cast<double>(tp) / actual : 0.0;
    }
    m.macro_precision = prec / 2.0;
    m.macro_recall = rec / 2.0;
    return m;
}

ExperimentReport run_experiment(const FeatureMatrix& matrix,
                                const ExperimentConfig& config) {
    FeatureMatrix em = expand_categoricals(matrix);

    // Row set; pre-split balancing duplicates minority rows before folding.
    std::vector<std::size_t> rows(em.n_rows());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    if (config.balance == BalanceMode::pre_split) {
        Rng rng(derive_seed(config.seed, 0x7072655f73706c69ULL));
        rows = upsample(rows, em.labels, rng);
        std::sort(rows.begin(), rows.end());
    }

    // Participants in first-appearance (manifest) order.
    std::vector<std::string> participants;
    std::set<std::string> seen;
    for (const auto& p : em.participants)
        if (seen.insert(p).second) participants.push_back(p);

    int n_participants = static_cast<int>(participants.size());
    int k = config.k > 0 ? config.k : (n_participants + 9) / 10;
    SplitPlan plan = group_kfold(participants, k, config.seed);
    if (plan.folds.size() < 2)
        throw std::runtime_error("run_experiment: need at least 2 folds");

    std::vector<std::string> group_names = config.group_names.empty()
                                               ? default_feature_groups()
                                               : config.group_names;

    ExperimentReport report;
    for (const auto& gname : group_names) {
        FeatureGroupSpec spec = resolve_feature_group(gname);
        std::vector<std::size_t> cols;
        std::vector<std::string> col_names;
        for (std::size_t c = 0; c < em.n_cols(); ++c)
            if (std::find(spec.groups.begin(), spec.groups.end(),
                          em.catalog[c].group) != spec.groups.end()) {
                cols.push_back(c);
                col_names.push_back(em.catalog[c].name);
            }
        if (cols.empty())
            throw std::runtime_error("feature group '" + gname +
                                     "' selects no columns");

        GroupResult result;
        result.name = gname;
        std::vector<Social> pooled_true, pooled_pred;
        std::map<std::string, double> importance_sum;
        std::size_t importance_folds = 0;

        for (std::size_t f = 0; f < plan.folds.size(); ++f) {
            const Fold& fold = plan.folds[f];
            std::set<std::string> train_set(fold.train.begin(), fold.train.end());
            std::set<std::string> test_set(fold.test.begin(), fold.test.end());

            std::vector<std::size_t> train_rows, test_rows;
            for (std::size_t i : rows) {
                if (train_set.count(em.participants[i]))
                    train_rows.push_back(i);
                else if (test_set.count(em.participants[i]))
                    test_rows.push_back(i);
            }

            bool has_alone = false, has_others = false;
            for (std::size_t i : train_rows)
                (em.labels[i] == Social::alone ? has_alone : has_others) = true;
            if (train_rows.size() < 2 || test_rows.empty() || !has_alone ||
                !has_others) {
                result.skipped_folds.push_back(static_cast<int>(f));
                continue;
            }

            Rng fold_rng(derive_seed(config.seed, f));
            std::vector<std::size_t> balanced =
                config.balance == BalanceMode::post_split
                    ? upsample(train_rows, em.labels, fold_rng)
                    : train_rows;

            auto project = [&](const std::vector<std::size_t>& idx) {
                Rows out;
                out.reserve(idx.size());
                for (std::size_t i : idx) {
                    std::vector<double> row;
                    row.reserve(cols.size());
                    for (std::size_t c : cols) row.push_back(em.values[i][c]);
                    out.push_back(std::move(row));
                }
                return out;
            };
            ImputeResult imp = impute(project(balanced), project(test_rows));
            if (imp.kept_columns.empty()) {
                result.skipped_folds.push_back(static_cast<int>(f));
                continue;
            }

            Labels y_train;
            y_train.reserve(balanced.size());
            for (std::size_t i : balanced)
                y_train.push_back(em.labels[i] == Social::alone ? 0 : 1);

            ForestParams params = config.forest;
            params.seed = config.seed ^ static_cast<std::uint64_t>(f);
            ForestModel model =
                train_forest(imp.train, y_train, params, config.n_threads);
            for (std::size_t c : imp.kept_columns)
                model.feature_names.push_back(col_names[c]);

            std::vector<Social> y_true, y_pred;
            for (std::size_t i = 0; i < test_rows.size(); ++i) {
                y_true.push_back(em.labels[test_rows[i]]);
                y_pred.push_back(predict(model, imp.test[i]).label);
            }
            result.per_fold.push_back(metrics(y_true, y_pred));
            pooled_true.insert(pooled_true.end(), y_true.begin(), y_true.end());
            pooled_pred.insert(pooled_pred.end(), y_pred.begin(), y_pred.end());

            for (const auto& [name, w] : feature_importance(model))
                importance_sum[name] += w;
            ++importance_folds;
        }

        if (result.skipped_folds.size() * 2 > plan.folds.size())
            throw std::runtime_error("run_experiment: more than half the folds "
                                     "are degenerate");
        result.pooled = metrics(pooled_true, pooled_pred);
        std::vector<std::pair<std::string, double>> imp(importance_sum.begin(),
                                                        importance_sum.end());
        for (auto& [name, w] : imp) w /= static_cast<double>(importance_folds);
        std::sort(imp.begin(), imp.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        if (imp.size() > 5) imp.resize(5);
        result.top_importances = std::move(imp);
        report.groups.push_back(std::move(result));
    }
    return report;
}

namespace {

std::string pct(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", fraction * 100.0);
    return buf;
}

}  // namespace

std::string report_to_csv(const ExperimentReport& report) {
    std::ostringstream out;
    out << "feature_group,accuracy,precision,recall\n";
    out << "baseline,50.00,50.00,50.00\n";
    for (const auto& g : report.groups)
        out << g.name << "," << pct(g.pooled.accuracy) << ","
            << pct(g.pooled.macro_precision) << "," << pct(g.pooled.macro_recall)
            << "\n";
    return out.str();
}

std::string report_to_json(const ExperimentReport& report) {
    json j;
    j["baseline_accuracy_percent"] = report.baseline_accuracy;
    json groups = json::array();
    for (const auto& g : report.groups) {
        json gj;
        gj["name"] = g.name;
        gj["pooled"] = {{"accuracy", g.pooled.accuracy},
                        {"macro_precision", g.pooled.macro_precision},
                        {"macro_recall", g.pooled.macro_recall}};
        json folds = json::array();
        for (const auto& m : g.per_fold)
            folds.push_back({{"accuracy", m.accuracy},
                             {"macro_precision", m.macro_precision},
                             {"macro_recall", m.macro_recall}});
        gj["per_fold"] = std::move(folds);
        gj["skipped_folds"] = g.skipped_folds;
        json imp = json::array();
        for (const auto& [name, w] : g.top_importances)
            imp.push_back({{"feature", name}, {"weight", w}});
        gj["top_importances"] = std::move(imp);
        groups.push_back(std::move(gj));
    }
    j["groups"] = std::move(groups);
    return j.dump(2) + "\n";
}

}  // namespace mealsense
