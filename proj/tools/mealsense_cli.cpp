// mealsense: synthetic eating-episode cohorts, feature extraction,
// effect-size statistics and random-forest experiments.
//
// Exit codes: 0 success, 2 invalid input/config, 3 refusing to overwrite,
// 4 degenerate data.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mealsense/episodes.hpp"
#include "mealsense/eval.hpp"
#include "mealsense/ingest.hpp"
#include "mealsense/stats.hpp"
#include "mealsense/synth.hpp"

namespace fs = std::filesystem;
using namespace mealsense;

namespace {

constexpr int kExitBadInput = 2;
constexpr int kExitRefuseOverwrite = 3;
constexpr int kExitDegenerate = 4;

struct CliError {
    int code;
    std::string message;
};

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw CliError{kExitBadInput, "cannot write " + path.string()};
    out << content;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw CliError{kExitBadInput, "cannot read " + path.string()};
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void ensure_out_dir(const fs::path& dir, bool force) {
    if (fs::exists(dir) && !fs::is_directory(dir))
        throw CliError{kExitBadInput, dir.string() + " is not a directory"};
    if (fs::exists(dir) && !fs::is_empty(dir) && !force)
        throw CliError{kExitRefuseOverwrite,
                       dir.string() + " is not empty (use --force to overwrite)"};
    fs::create_directories(dir);
}

int cmd_synth(const std::string& spec_file, const std::string& style,
              const std::string& out_dir, bool force, long long seed_flag,
              bool seed_given) {
    CohortSpec spec;
    if (!spec_file.empty()) {
        std::ifstream in(spec_file);
        if (!in) throw CliError{kExitBadInput, "cannot read " + spec_file};
        spec = spec_from_json(in);
    } else {
        auto tag = dataset_tag_from_string(style);
        if (!tag) throw CliError{kExitBadInput, "unknown style '" + style + "'"};
        spec = CohortSpec::defaults_for(*tag);
    }
    if (seed_given) {
        spec.seed = static_cast<std::uint64_t>(seed_flag);
        spec.has_seed = true;
    }
    if (!spec.has_seed) throw CliError{kExitBadInput, "seed is required"};

    ensure_out_dir(out_dir, force);
    SynthResult result = generate_cohort(spec);
    write_cohort_files(result, out_dir);
    write_file(fs::path(out_dir) / "cohort_spec.json", spec_to_json(spec));
    std::cout << (fs::path(out_dir) / "manifest.json").string() << "\n";
    std::cout << "episodes: " << result.truth.episodes.size() << "\n";
    return 0;
}

CohortStore load_cohort(const std::string& data_dir) {
    fs::path manifest_path = fs::path(data_dir) / "manifest.json";
    std::ifstream min(manifest_path);
    if (!min)
        throw CliError{kExitBadInput,
                       "missing manifest: " + manifest_path.string()};
    Manifest manifest = parse_manifest(min);
    std::vector<RawRecord> records;
    for (Modality m : {Modality::accel, Modality::wearable, Modality::location,
                       Modality::screen, Modality::battery, Modality::app,
                       Modality::report}) {
        fs::path p = fs::path(data_dir) / (std::string(to_string(m)) + ".jsonl");
        if (!fs::exists(p)) continue;
        std::ifstream in(p);
        try {
            auto recs = parse_stream(in, m);
            records.insert(records.end(), recs.begin(), recs.end());
        } catch (const IngestError& e) {
            throw CliError{kExitBadInput, p.string() + ": " + e.what()};
        }
    }
    return build_cohort(records, manifest);
}

int cmd_extract(const std::string& data_dir, const std::string& out_csv,
                int alpha_min, double min_coverage) {
    CohortStore cohort = load_cohort(data_dir);
    ExtractionConfig config =
        ExtractionConfig::defaults_for(cohort.manifest.dataset_tag);
    if (alpha_min > 0) config.alpha_min = alpha_min;
    if (min_coverage >= 0) config.min_slot_coverage = min_coverage;
    config.validate();

    BuildLog log;
    FeatureMatrix m;
    try {
        m = build_matrix(cohort, config, &log);
    } catch (const std::runtime_error& e) {
        throw CliError{kExitBadInput, e.what()};
    }
    fs::path csv_path(out_csv);
    if (csv_path.has_parent_path()) fs::create_directories(csv_path.parent_path());
    write_file(csv_path, matrix_to_csv(m));
    fs::path catalog_path = csv_path;
    catalog_path.replace_extension(".catalog.json");
    write_file(catalog_path, catalog_to_json(m));
    fs::path log_path = csv_path;
    log_path.replace_extension(".build_log.txt");
    std::ostringstream lg;
    lg << "episodes_total " << log.episodes_total << "\n"
       << "rows_kept " << m.n_rows() << "\n"
       << "rows_dropped " << log.rows_dropped << "\n";
    write_file(log_path, lg.str());
    std::cout << "rows: " << m.n_rows() << " (dropped " << log.rows_dropped
              << ")\n";
    return 0;
}

FeatureMatrix load_matrix(const std::string& matrix_csv,
                          const std::string& catalog_override) {
    fs::path catalog_path = catalog_override.empty()
                                ? fs::path(matrix_csv).replace_extension(
                                      ".catalog.json")
                                : fs::path(catalog_override);
    return matrix_from_csv(read_file(matrix_csv), read_file(catalog_path));
}

int cmd_stats(const std::string& matrix_csv, const std::string& catalog,
              const std::string& out_dir, bool force, int bin_minutes) {
    FeatureMatrix m = load_matrix(matrix_csv, catalog);
    std::size_t n_alone = 0, n_others = 0;
    for (Social s : m.labels) (s == Social::alone ? n_alone : n_others)++;
    if (n_alone < 2 || n_others < 2)
        throw CliError{kExitBadInput,
                       "matrix must contain both classes (>= 2 rows each)"};
    ensure_out_dir(out_dir, force);

    auto rows = rank_features(m);
    write_file(fs::path(out_dir) / "effect_sizes.csv", effect_sizes_to_csv(rows));

    int time_col = m.column_index("time");
    std::vector<std::pair<int, Social>> minutes;
    for (std::size_t r = 0; r < m.n_rows(); ++r) {
        double hour = m.values[r][static_cast<std::size_t>(time_col)];
        minutes.emplace_back(static_cast<int>(hour * 60.0), m.labels[r]);
    }
    write_file(fs::path(out_dir) / "temporal_histogram.csv",
               histogram_to_csv(temporal_histogram(minutes, bin_minutes)));

    // Distribution summaries for the activity features (the violin-plot
    // analog); falls back to all numeric features when none exist.
    std::vector<std::string> names;
    for (const auto& f : m.catalog)
        if (f.group == FeatureGroup::A_fb || f.group == FeatureGroup::A_sp)
            names.push_back(f.name);
    if (names.empty())
        for (const auto& f : m.catalog) names.push_back(f.name);
    auto summaries = distribution_summary(m, names);
    write_file(fs::path(out_dir) / "distributions.csv",
               summaries_to_csv(summaries));
    write_file(fs::path(out_dir) / "distribution_samples.csv",
               summary_samples_to_csv(summaries));
    std::cout << out_dir << "\n";
    return 0;
}

int cmd_evaluate(const std::string& matrix_csv, const std::string& catalog,
                 const std::string& config_file, const std::string& out_dir,
                 bool force, long long seed_flag, bool seed_given, int k,
                 int ntree, int threads, bool allow_any_ntree,
                 const std::string& balance,
                 const std::vector<std::string>& groups) {
    FeatureMatrix m = load_matrix(matrix_csv, catalog);

    ExperimentConfig config;
    if (!config_file.empty()) {
        auto j = nlohmann::json::parse(read_file(config_file), nullptr, false);
        if (j.is_discarded())
            throw CliError{kExitBadInput, "malformed config " + config_file};
        if (j.contains("seed")) {
            config.seed = j["seed"].get<std::uint64_t>();
            seed_given = true;
        }
        config.k = j.value("k", 0);
        config.forest.ntree = j.value("ntree", config.forest.ntree);
        config.forest.mtry = j.value("mtry", 0);
        config.forest.max_depth = j.value("max_depth", 0);
        if (j.contains("groups"))
            config.group_names = j["groups"].get<std::vector<std::string>>();
        std::string bal = j.value("balance", std::string("post_split"));
        if (bal == "pre_split")
            config.balance = BalanceMode::pre_split;
        else if (bal != "post_split")
            throw CliError{kExitBadInput, "unknown balance mode '" + bal + "'"};
    }
    // flags override file values
    if (seed_flag >= 0 || seed_given) {
        if (seed_flag >= 0) config.seed = static_cast<std::uint64_t>(seed_flag);
    }
    if (!seed_given && seed_flag < 0)
        throw CliError{kExitBadInput, "seed is required"};
    if (k > 0) config.k = k;
    if (ntree > 0) config.forest.ntree = ntree;
    config.forest.allow_any_ntree = allow_any_ntree;
    config.n_threads = threads;
    if (balance == "pre_split")
        config.balance = BalanceMode::pre_split;
    else if (balance == "post_split")
        config.balance = BalanceMode::post_split;
    else if (!balance.empty())
        throw CliError{kExitBadInput, "unknown balance mode '" + balance + "'"};
    if (!groups.empty()) config.group_names = groups;
    config.forest.seed = config.seed;

    ensure_out_dir(out_dir, force);
    ExperimentReport report;
    try {
        report = run_experiment(m, config);
    } catch (const std::invalid_argument& e) {
        throw CliError{kExitBadInput, e.what()};
    } catch (const std::runtime_error& e) {
        throw CliError{kExitDegenerate, e.what()};
    }
    write_file(fs::path(out_dir) / "experiment_report.csv",
               report_to_csv(report));
    write_file(fs::path(out_dir) / "details.json", report_to_json(report));
    // effective config, for provenance
    nlohmann::json echo;
    echo["seed"] = config.seed;
    echo["k"] = config.k;
    echo["ntree"] = config.forest.ntree;
    echo["mtry"] = config.forest.mtry;
    echo["max_depth"] = config.forest.max_depth;
    echo["balance"] = config.balance == BalanceMode::post_split ? "post_split"
                                                                : "pre_split";
    echo["groups"] = config.group_names.empty() ? default_feature_groups()
                                                : config.group_names;
    write_file(fs::path(out_dir) / "run_config.json", echo.dump(2) + "\n");
    std::cout << (fs::path(out_dir) / "experiment_report.csv").string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"eating social-context sensing pipeline"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic cohort");
    std::string spec_file, style = "wearable-style", out_dir = "out";
    long long seed = -1;
    bool force = false;
    synth->add_option("--spec", spec_file, "cohort spec JSON file");
    synth->add_option("--style", style, "wearable-style | phone-style");
    synth->add_option("--out", out_dir, "output directory")->required();
    synth->add_option("--seed", seed, "generator seed");
    synth->add_flag("--force", force, "overwrite non-empty output directory");

    // extract
    auto* extract = app.add_subcommand("extract", "build the feature matrix");
    std::string data_dir, out_csv = "features.csv";
    int alpha_min = 0;
    double min_coverage = -1;
    extract->add_option("--data", data_dir, "cohort data directory")->required();
    extract->add_option("--out", out_csv, "output CSV path")->required();
    extract->add_option("--alpha", alpha_min, "window half-width in minutes");
    extract->add_option("--min-coverage", min_coverage,
                        "per-side slot coverage threshold");

    // stats
    auto* stats = app.add_subcommand("stats", "effect sizes and distributions");
    std::string matrix_csv, catalog, stats_out = "stats_out";
    int bin_minutes = 60;
    stats->add_option("--matrix", matrix_csv, "feature matrix CSV")->required();
    stats->add_option("--catalog", catalog, "catalog JSON (default: sidecar)");
    stats->add_option("--out", stats_out, "output directory")->required();
    stats->add_option("--bin-minutes", bin_minutes, "histogram bin width");
    stats->add_flag("--force", force, "overwrite non-empty output directory");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "feature-group experiments");
    std::string config_file, eval_out = "eval_out", balance;
    std::vector<std::string> groups;
    int k = 0, ntree = 0, threads = 1;
    bool allow_any_ntree = false;
    evaluate->add_option("--matrix", matrix_csv, "feature matrix CSV")->required();
    evaluate->add_option("--catalog", catalog, "catalog JSON (default: sidecar)");
    evaluate->add_option("--config", config_file, "run config JSON");
    evaluate->add_option("--out", eval_out, "output directory")->required();
    evaluate->add_option("--seed", seed, "experiment seed");
    evaluate->add_option("--k", k, "participants per test fold");
    evaluate->add_option("--ntree", ntree, "trees per forest");
    evaluate->add_option("--threads", threads, "worker threads (does not change results)");
    evaluate->add_option("--balance", balance, "post_split | pre_split");
    evaluate->add_option("--groups", groups, "feature groups to run");
    evaluate->add_flag("--allow-any-ntree", allow_any_ntree,
                       "permit ntree outside [100,150]");
    evaluate->add_flag("--force", force, "overwrite non-empty output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed())
            return cmd_synth(spec_file, style, out_dir, force, seed, seed >= 0);
        if (extract->parsed())
            return cmd_extract(data_dir, out_csv, alpha_min, min_coverage);
        if (stats->parsed())
            return cmd_stats(matrix_csv, catalog, stats_out, force, bin_minutes);
        if (evaluate->parsed())
            return cmd_evaluate(matrix_csv, catalog, config_file, eval_out, force,
                                seed, false, k, ntree, threads, allow_any_ntree,
                                balance, groups);
    } catch (const CliError& e) {
        std::cerr << "error: " << e.message << "\n";
        return e.code;
    } catch (const IngestError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDegenerate;
    }
    return 0;
}
