#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "mealsense/episodes.hpp"
#include "mealsense/eval.hpp"
#include "mealsense/forest.hpp"
#include "mealsense/stats.hpp"
#include "mealsense/synth.hpp"

namespace py = pybind11;
using namespace mealsense;

namespace {

CohortSpec make_spec(const std::string& style, std::uint64_t seed,
                     int n_participants, int n_days,
                     const std::map<std::string, double>& planted,
                     double label_signal) {
    auto tag = dataset_tag_from_string(style);
    if (!tag) throw std::invalid_argument("unknown style '" + style + "'");
    CohortSpec spec = CohortSpec::defaults_for(*tag);
    spec.seed = seed;
    spec.has_seed = true;
    if (n_participants > 0) spec.n_participants = n_participants;
    if (n_days > 0) spec.n_days = n_days;
    spec.planted_effects = planted;
    spec.label_signal_strength = label_signal;
    return spec;
}

py::dict matrix_to_dict(const FeatureMatrix& m) {
    py::dict out;
    py::list features, groups, rows, labels, participants;
    for (const auto& f : m.catalog) {
        features.append(f.name);
        groups.append(std::string(to_string(f.group)));
    }
    for (std::size_t r = 0; r < m.n_rows(); ++r) {
        py::list row;
        for (double v : m.values[r])
            row.append(is_missing(v) ? py::object(py::none())
                                     : py::object(py::float_(v)));
        rows.append(row);
        labels.append(std::string(to_string(m.labels[r])));
        participants.append(m.participants[r]);
    }
    out["features"] = features;
    out["groups"] = groups;
    out["rows"] = rows;
    out["labels"] = labels;
    out["participants"] = participants;
    return out;
}

}  // namespace

PYBIND11_MODULE(pymealsense, m) {
    m.doc() = "eating social-context sensing pipeline";

    m.def(
        "welch_t",
        [](const std::vector<double>& a, const std::vector<double>& b) {
            TTestResult r = welch_t(a, b);
            return py::make_tuple(r.t, r.df, r.p);
        },
        "Welch t-test: returns (t, df, two-sided p)");
    m.def(
        "cohens_d",
        [](const std::vector<double>& a, const std::vector<double>& b) {
            CohensD d = cohens_d(a, b);
            return py::make_tuple(d.d, d.ci_lo, d.ci_hi);
        },
        "Pooled-SD Cohen's d: returns (d, ci_lo, ci_hi)");
    m.def("student_t_two_sided_p", &student_t_two_sided_p);
    m.def("radius_of_gyration", &radius_of_gyration,
          "RMS haversine distance (meters) from the centroid of (lat, lon) points");

    m.def(
        "synth_matrix",
        [](const std::string& style, std::uint64_t seed, int n_participants,
           int n_days, const std::map<std::string, double>& planted,
           double label_signal) {
            CohortSpec spec = make_spec(style, seed, n_participants, n_days,
                                        planted, label_signal);
            SynthResult res = generate_cohort(spec);
            FeatureMatrix mat = build_matrix(res.store, spec.extraction);
            return matrix_to_dict(mat);
        },
        py::arg("style") = "wearable-style", py::arg("seed") = 1,
        py::arg("n_participants") = 0, py::arg("n_days") = 0,
        py::arg("planted_effects") = std::map<std::string, double>{},
        py::arg("label_signal_strength") = 0.0,
        "Generate a synthetic cohort and extract its feature matrix");

    m.def(
        "rank_features_csv",
        [](const std::string& matrix_csv, const std::string& catalog_json) {
            FeatureMatrix mat = matrix_from_csv(matrix_csv, catalog_json);
            return effect_sizes_to_csv(rank_features(mat));
        },
        "Effect-size table (CSV text) from matrix CSV + catalog JSON text");

    m.def(
        "run_experiment",
        [](const std::string& style, std::uint64_t seed, int n_participants,
           int n_days, const std::map<std::string, double>& planted,
           double label_signal, int ntree, int k, bool allow_any_ntree) {
            CohortSpec spec = make_spec(style, seed, n_participants, n_days,
                                        planted, label_signal);
            SynthResult res = generate_cohort(spec);
            FeatureMatrix mat = build_matrix(res.store, spec.extraction);
            ExperimentConfig cfg;
            cfg.seed = seed;
            cfg.k = k;
            cfg.forest.ntree = ntree;
            cfg.forest.allow_any_ntree = allow_any_ntree;
            ExperimentReport rep = run_experiment(mat, cfg);
            py::dict out;
            for (const auto& g : rep.groups)
                out[py::str(g.name)] = py::make_tuple(g.pooled.accuracy,
                                                      g.pooled.macro_precision,
                                                      g.pooled.macro_recall);
            return out;
        },
        py::arg("style") = "wearable-style", py::arg("seed") = 1,
        py::arg("n_participants") = 0, py::arg("n_days") = 0,
        py::arg("planted_effects") = std::map<std::string, double>{},
        py::arg("label_signal_strength") = 0.0, py::arg("ntree") = 128,
        py::arg("k") = 0, py::arg("allow_any_ntree") = false,
        "Feature-group experiment on a synthetic cohort; returns "
        "{group: (accuracy, macro_precision, macro_recall)}");

    py::class_<ForestModel>(m, "ForestModel")
        .def("predict",
             [](const ForestModel& model, const std::vector<double>& x) {
                 Prediction p = predict(model, x);
                 return py::make_tuple(std::string(to_string(p.label)), p.prob);
             })
        .def("feature_importance",
             [](const ForestModel& model) { return feature_importance(model); })
        .def("to_json", &model_to_json);

    m.def(
        "train_forest",
        [](const Rows& X, const std::vector<int>& y, int ntree,
           std::uint64_t seed, int mtry, int max_depth, bool allow_any_ntree) {
            ForestParams params;
            params.ntree = ntree;
            params.seed = seed;
            params.mtry = mtry;
            params.max_depth = max_depth;
            params.allow_any_ntree = allow_any_ntree;
            return train_forest(X, y, params);
        },
        py::arg("X"), py::arg("y"), py::arg("ntree") = 128, py::arg("seed") = 1,
        py::arg("mtry") = 0, py::arg("max_depth") = 0,
        py::arg("allow_any_ntree") = false,
        "Train a random forest; y uses 0 = alone, 1 = with_others");
}
