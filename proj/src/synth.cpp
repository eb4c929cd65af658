#include "mealsense/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

#include "mealsense/rng.hpp"

namespace mealsense {

using nlohmann::json;

namespace {

const std::vector<int> kActivityVocab = {0, 1, 2, 3, 4};
const std::vector<int> kLocVocab = {0, 1, 2, 3};

const std::vector<std::string>& app_vocab() {
    static const std::vector<std::string> apps = {
        "whatsapp", "instagram", "spotify", "maps",  "mail",  "browser",
        "camera",   "game",      "news",    "music", "clock", "social"};
    return apps;
}

// Latent distribution parameters. Each plantable feature maps to one latent;
// the class separation is delta = d * sigma so the standardized mean
// difference of the rendered feature equals the planted d.
struct Latent {
    double mu, sigma;
};

const std::map<std::string, Latent>& wearable_latents() {
    static const std::map<std::string, Latent> m = {
        {"mean_steps_bef", {300.0, 80.0}},  {"mean_steps_aft", {300.0, 80.0}},
        {"min_lightly_bef", {0.35, 0.10}},  {"min_lightly_aft", {0.35, 0.10}},
        {"location", {150.0, 60.0}},
    };
    return m;
}

const std::map<std::string, Latent>& phone_latents() {
    static const std::map<std::string, Latent> m = {
        {"acc_x_bef", {0.0, 0.05}},       {"acc_y_bef", {0.0, 0.05}},
        {"acc_z_bef", {0.0, 0.05}},       {"acc_x_aft", {0.0, 0.05}},
        {"acc_y_aft", {0.0, 0.05}},       {"acc_z_aft", {0.0, 0.05}},
        {"acc_x_abs_bef", {1.0, 0.30}},   {"acc_y_abs_bef", {1.0, 0.30}},
        {"acc_z_abs_bef", {1.0, 0.30}},   {"acc_x_abs_aft", {1.0, 0.30}},
        {"acc_y_abs_aft", {1.0, 0.30}},   {"acc_z_abs_aft", {1.0, 0.30}},
        {"battery_mean_level", {65.0, 12.0}},
        {"location", {150.0, 60.0}},
    };
    return m;
}

const std::map<std::string, Latent>& latents_for(DatasetTag style) {
    return style == DatasetTag::phone_style ? phone_latents() : wearable_latents();
}

double draw_latent(Rng& rng, const Latent& l, double planted_d, Social label) {
    double delta = planted_d * l.sigma;
    double mu = l.mu + (label == Social::alone ? 0.5 : -0.5) * delta;
    return rng.normal(mu, l.sigma);
}

struct EpisodeDraw {
    LocalTimestamp t;
    Social label;
    int peak;
};

}  // namespace

CohortSpec CohortSpec::defaults_for(DatasetTag style) {
    CohortSpec s;
    s.style = style;
    s.extraction = ExtractionConfig::defaults_for(style);
    if (style == DatasetTag::phone_style) {
        s.n_participants = 84;
        s.n_days = 14;
        s.snack_prob = 0.42;
        s.peaks = {{10.0, 0.8, 0.92, 0.55},
                   {14.0, 0.7, 0.95, 0.35},
                   {20.0, 0.7, 0.92, 0.40}};
    } else {
        s.n_participants = 122;
        s.n_days = 13;
        s.snack_prob = 0.23;
        s.peaks = {{7.5, 0.6, 0.93, 0.72},
                   {12.5, 0.6, 0.95, 0.28},
                   {19.0, 0.7, 0.93, 0.50}};
    }
    return s;
}

void CohortSpec::validate() const {
    if (!has_seed) throw std::invalid_argument("seed is required");
    if (style == DatasetTag::custom)
        throw std::invalid_argument("style must be wearable-style or phone-style");
    if (n_participants < 2)
        throw std::invalid_argument("n_participants must be >= 2");
    if (n_days < 1) throw std::invalid_argument("n_days must be >= 1");
    if (peaks.empty()) throw std::invalid_argument("at least one meal peak required");
    for (const auto& p : peaks) {
        if (p.p_occur < 0 || p.p_occur > 1 || p.p_alone < 0 || p.p_alone > 1)
            throw std::invalid_argument("peak probabilities must lie in [0,1]");
        if (p.hour_sd <= 0 || p.hour_mean < 0 || p.hour_mean >= 24)
            throw std::invalid_argument("invalid peak schedule");
    }
    if (snack_prob < 0 || snack_prob > 1)
        throw std::invalid_argument("snack_prob must lie in [0,1]");
    if (label_signal_strength < 0 || label_signal_strength > 1)
        throw std::invalid_argument("label_signal_strength must lie in [0,1]");
    const auto& lat = latents_for(style);
    for (const auto& [name, d] : planted_effects) {
        if (!lat.count(name))
            throw std::invalid_argument("feature '" + name +
                                        "' is not plantable for this style");
        if (!std::isfinite(d))
            throw std::invalid_argument("planted d must be finite");
    }
    extraction.validate();
}

SynthResult generate_cohort(const CohortSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);

    Manifest manifest;
    manifest.dataset_tag = spec.style;
    manifest.activity_codes = kActivityVocab;
    manifest.loc_codes = kLocVocab;
    for (int i = 0; i < spec.n_participants; ++i) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "p%03d", i + 1);
        manifest.participants.push_back(buf);
    }

    SynthResult out;
    out.store.manifest = manifest;
    out.store.data.resize(manifest.participants.size());
    out.truth.planted_effects = spec.planted_effects;

    const auto& latents = latents_for(spec.style);
    auto planted = [&](const std::string& name) {
        auto it = spec.planted_effects.find(name);
        return it == spec.planted_effects.end() ? 0.0 : it->second;
    };
    auto latent = [&](Rng& r, const std::string& name, Social label) {
        return draw_latent(r, latents.at(name), planted(name), label);
    };

    const std::int64_t slot = static_cast<std::int64_t>(spec.extraction.slot_len_min) * 60;
    const std::int64_t alpha = static_cast<std::int64_t>(spec.extraction.alpha_min) * 60;
    // Windows of consecutive episodes are kept disjoint so that one episode's
    // latent rates cannot leak into a neighbour's slots.
    const std::int64_t min_gap = 2 * alpha + 2 * slot;
    const LocalTimestamp base_day = *make_timestamp(2019, 3, 1, 0, 0, 0);
    const bool phone = spec.style == DatasetTag::phone_style;

    for (int pi = 0; pi < spec.n_participants; ++pi) {
        ParticipantData& pd = out.store.data[static_cast<std::size_t>(pi)];
        const std::string& pid = manifest.participants[static_cast<std::size_t>(pi)];
        double home_lat = 46.5 + 0.01 * (pi % 50);
        double home_lon = 6.6 + 0.01 * (pi / 50);
        std::unordered_set<std::int64_t> emitted_slots;

        for (int day = 0; day < spec.n_days; ++day) {
            LocalTimestamp day_start = base_day + static_cast<std::int64_t>(day) *
                                                      kSecondsPerDay;
            std::vector<EpisodeDraw> eps;
            for (std::size_t k = 0; k < spec.peaks.size(); ++k) {
                const MealPeak& peak = spec.peaks[k];
                if (!rng.bernoulli(peak.p_occur)) continue;
                double hour = rng.normal(peak.hour_mean, peak.hour_sd);
                hour = std::clamp(hour, 0.3, 23.7);
                LocalTimestamp t =
                    day_start + static_cast<std::int64_t>(std::llround(hour * 60.0)) * 60;
                Social label = rng.bernoulli(peak.p_alone) ? Social::alone
                                                           : Social::with_others;
                eps.push_back({t, label, static_cast<int>(k)});
            }
            std::sort(eps.begin(), eps.end(),
                      [](const EpisodeDraw& a, const EpisodeDraw& b) {
                          return a.t < b.t;
                      });
            for (std::size_t k = 1; k < eps.size(); ++k)
                if (eps[k].t - eps[k - 1].t < min_gap)
                    eps[k].t = eps[k - 1].t + min_gap;

            for (const EpisodeDraw& ep : eps) {
                out.truth.episodes.push_back({pid, ep.t, ep.label, ep.peak});

                // Self-report record.
                EatingReport rep;
                rep.participant = pid;
                rep.t = ep.t;
                rep.social_context = ep.label;
                rep.meal_kind = rng.bernoulli(spec.snack_prob) ? MealKind::snack
                                                               : MealKind::meal;
                double s = spec.label_signal_strength;
                int informative = ep.label == Social::alone ? 1 : 2;
                rep.activity_code =
                    rng.bernoulli(s)
                        ? informative
                        : kActivityVocab[rng.below(kActivityVocab.size())];
                rep.loc_code = kLocVocab[rng.below(kLocVocab.size())];
                pd.report.push_back(rep);

                // Slot ranges matching the extractor's assignment rule.
                LocalTimestamp bef_first = align_down(ep.t - alpha, slot);
                LocalTimestamp aft_first = align_up(ep.t, slot);
                LocalTimestamp aft_end = align_up(ep.t + alpha, slot);

                if (!phone) {
                    double steps_bef = latent(rng, "mean_steps_bef", ep.label);
                    double steps_aft = latent(rng, "mean_steps_aft", ep.label);
                    double light_bef = latent(rng, "min_lightly_bef", ep.label);
                    double light_aft = latent(rng, "min_lightly_aft", ep.label);
                    for (int side = 0; side < 2; ++side) {
                        LocalTimestamp first = side == 0 ? bef_first : aft_first;
                        LocalTimestamp end = side == 0 ? ep.t : aft_end;
                        double step_rate = std::max(0.0, side == 0 ? steps_bef
                                                                   : steps_aft);
                        double light_frac = std::clamp(
                            side == 0 ? light_bef : light_aft, 0.0, 1.0);
                        double carry = 0.0;
                        for (LocalTimestamp st = first; st < end; st += slot) {
                            // each slot draws exactly 2 uniforms + 1 normal
                            double jitter = rng.normal(0.0, 10.0);
                            double u = rng.uniform();
                            if (emitted_slots.count(st)) continue;
                            emitted_slots.insert(st);
                            int slot_min = static_cast<int>(slot / 60);
                            int fairly = u < 0.3 ? 1 : 0;
                            int very = u < 0.08 ? 1 : 0;
                            double want = light_frac * slot_min + carry;
                            int lightly = static_cast<int>(std::llround(want));
                            lightly = std::clamp(lightly, 0,
                                                 slot_min - fairly - very);
                            carry = want - lightly;
                            int steps_total = std::max(
                                0, static_cast<int>(std::llround(step_rate + jitter)));
                            int per_min = steps_total / slot_min;
                            int rem = steps_total - per_min * slot_min;
                            for (int m = 0; m < slot_min; ++m) {
                                WearableMinute w;
                                w.participant = pid;
                                w.t = st + static_cast<std::int64_t>(m) * 60;
                                w.steps = per_min + (m < rem ? 1 : 0);
                                if (m < lightly)
                                    w.level = ActivityLevel::lightly;
                                else if (m < lightly + fairly)
                                    w.level = ActivityLevel::fairly;
                                else if (m < lightly + fairly + very)
                                    w.level = ActivityLevel::very;
                                else
                                    w.level = ActivityLevel::sedentary;
                                pd.wearable.push_back(w);
                            }
                        }
                    }
                } else {
                    double mean_lat[2][3], amp_lat[2][3];
                    const char* axes = "xyz";
                    for (int side = 0; side < 2; ++side)
                        for (int ax = 0; ax < 3; ++ax) {
                            std::string sfx = side == 0 ? "bef" : "aft";
                            std::string mname =
                                std::string("acc_") + axes[ax] + "_" + sfx;
                            std::string aname =
                                std::string("acc_") + axes[ax] + "_abs_" + sfx;
                            mean_lat[side][ax] = latent(rng, mname, ep.label);
                            amp_lat[side][ax] =
                                std::max(0.05, latent(rng, aname, ep.label));
                        }
                    for (int side = 0; side < 2; ++side) {
                        LocalTimestamp first = side == 0 ? bef_first : aft_first;
                        LocalTimestamp end = side == 0 ? ep.t : aft_end;
                        for (LocalTimestamp st = first; st < end; st += slot) {
                            if (emitted_slots.count(st)) continue;
                            emitted_slots.insert(st);
                            for (int k = 0; k < 4; ++k) {
                                AccelSample a;
                                a.participant = pid;
                                a.t = st + 60 + 120 * k;
                                double sign = k % 2 == 0 ? 1.0 : -1.0;
                                double v[3];
                                for (int ax = 0; ax < 3; ++ax)
                                    v[ax] = mean_lat[side][ax] +
                                            sign * amp_lat[side][ax];
                                a.x = v[0];
                                a.y = v[1];
                                a.z = v[2];
                                pd.accel.push_back(a);
                            }
                        }
                    }

                    double level = std::clamp(
                        latent(rng, "battery_mean_level", ep.label), 0.0, 100.0);
                    LocalTimestamp btimes[4] = {ep.t - alpha + 180, ep.t - 180,
                                                ep.t + 180, ep.t + alpha - 180};
                    for (LocalTimestamp bt : btimes) {
                        BatteryEvent b;
                        b.participant = pid;
                        b.t = bt;
                        b.level = std::clamp(level + rng.normal(0.0, 1.0), 0.0,
                                             100.0);
                        b.charging = rng.bernoulli(0.10);
                        pd.battery.push_back(b);
                    }

                    // Two screen-on bouts, one per window side.
                    {
                        std::int64_t on1 = 120 + static_cast<std::int64_t>(
                                                     rng.below(300));
                        ScreenEvent e1;
                        e1.participant = pid;
                        e1.t = ep.t - alpha + on1;
                        e1.state = ScreenState::on;
                        ScreenEvent e2 = e1;
                        e2.t = e1.t + 180 + static_cast<std::int64_t>(rng.below(240));
                        e2.state = ScreenState::off;
                        std::int64_t on2 = 120 + static_cast<std::int64_t>(
                                                     rng.below(300));
                        ScreenEvent e3 = e1;
                        e3.t = ep.t + on2;
                        e3.state = ScreenState::on;
                        ScreenEvent e4 = e1;
                        e4.t = e3.t + 120 + static_cast<std::int64_t>(rng.below(240));
                        e4.state = ScreenState::off;
                        pd.screen.push_back(e1);
                        pd.screen.push_back(e2);
                        pd.screen.push_back(e3);
                        pd.screen.push_back(e4);
                    }

                    const auto& apps = app_vocab();
                    double p_app = 0.5;
                    for (const auto& app : apps) {
                        if (rng.bernoulli(p_app)) {
                            AppEvent e;
                            e.participant = pid;
                            e.t = ep.t - alpha +
                                  60 * (1 + static_cast<std::int64_t>(rng.below(
                                                static_cast<std::uint64_t>(
                                                    2 * spec.extraction.alpha_min -
                                                    2))));
                            if (e.t == ep.t) e.t += 30;
                            e.app_id = app;
                            pd.app.push_back(e);
                        }
                        p_app *= 0.75;
                    }
                }

                // Location points: four points at the latent radius around a
                // jittered center; their centroid sits at the center, so the
                // radius of gyration equals the latent.
                double radius = std::max(0.0, latent(rng, "location", ep.label));
                double clat = home_lat + rng.normal(0.0, 0.0005);
                double clon = home_lon + rng.normal(0.0, 0.0005);
                constexpr double kMPerDegLat = 6371000.0 * 3.14159265358979323846 / 180.0;
                double dlat = radius / kMPerDegLat;
                double dlon = radius / (kMPerDegLat *
                                        std::cos(clat * 3.14159265358979323846 / 180.0));
                LocalTimestamp ltimes[4] = {ep.t - alpha + 60, ep.t - 120,
                                            ep.t + 120, ep.t + alpha - 60};
                double offs[4][2] = {{dlat, 0}, {-dlat, 0}, {0, dlon}, {0, -dlon}};
                for (int k = 0; k < 4; ++k) {
                    LocationPoint lp;
                    lp.participant = pid;
                    lp.t = ltimes[k];
                    lp.lat = clat + offs[k][0];
                    lp.lon = clon + offs[k][1];
                    pd.location.push_back(lp);
                }
            }
        }

        auto by_time = [](const auto& a, const auto& b) { return a.t < b.t; };
        std::stable_sort(pd.accel.begin(), pd.accel.end(), by_time);
        std::stable_sort(pd.wearable.begin(), pd.wearable.end(), by_time);
        std::stable_sort(pd.location.begin(), pd.location.end(), by_time);
        std::stable_sort(pd.screen.begin(), pd.screen.end(), by_time);
        std::stable_sort(pd.battery.begin(), pd.battery.end(), by_time);
        std::stable_sort(pd.app.begin(), pd.app.end(), by_time);
        std::stable_sort(pd.report.begin(), pd.report.end(), by_time);
    }
    return out;
}

CohortStore shuffle_labels(const CohortStore& cohort, std::uint64_t seed) {
    CohortStore out = cohort;
    std::vector<Social> labels;
    for (const auto& d : out.data)
        for (const auto& r : d.report) labels.push_back(r.social_context);
    if (labels.size() < 2)
        throw std::invalid_argument("shuffle_labels: need at least 2 episodes");
    Rng rng(seed);
    for (std::size_t i = labels.size() - 1; i > 0; --i) {
        std::size_t j = rng.below(i + 1);
        std::swap(labels[i], labels[j]);
    }
    std::size_t idx = 0;
    for (auto& d : out.data)
        for (auto& r : d.report) r.social_context = labels[idx++];
    return out;
}

CohortSpec spec_from_json(std::istream& in) {
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw std::invalid_argument("cohort spec: malformed JSON");
    std::string style_name = j.value("style", std::string("wearable-style"));
    auto style = dataset_tag_from_string(style_name);
    if (!style) throw std::invalid_argument("cohort spec: unknown style");
    CohortSpec spec = CohortSpec::defaults_for(*style);
    if (j.contains("seed")) {
        spec.seed = j["seed"].get<std::uint64_t>();
        spec.has_seed = true;
    }
    if (j.contains("n_participants"))
        spec.n_participants = j["n_participants"].get<int>();
    if (j.contains("n_days")) spec.n_days = j["n_days"].get<int>();
    if (j.contains("snack_prob")) spec.snack_prob = j["snack_prob"].get<double>();
    if (j.contains("label_signal_strength"))
        spec.label_signal_strength = j["label_signal_strength"].get<double>();
    if (j.contains("planted_effects"))
        for (const auto& [name, d] : j["planted_effects"].items())
            spec.planted_effects[name] = d.get<double>();
    if (j.contains("peaks")) {
        spec.peaks.clear();
        for (const auto& pj : j["peaks"]) {
            MealPeak p;
            p.hour_mean = pj.at("hour").get<double>();
            p.hour_sd = pj.value("sd", 0.6);
            p.p_occur = pj.value("p_occur", 0.9);
            p.p_alone = pj.value("p_alone", 0.5);
            spec.peaks.push_back(p);
        }
    }
    if (j.contains("alpha_min"))
        spec.extraction.alpha_min = j["alpha_min"].get<int>();
    return spec;
}

std::string spec_to_json(const CohortSpec& spec) {
    json j;
    j["style"] = to_string(spec.style);
    j["seed"] = spec.seed;
    j["n_participants"] = spec.n_participants;
    j["n_days"] = spec.n_days;
    j["snack_prob"] = spec.snack_prob;
    j["label_signal_strength"] = spec.label_signal_strength;
    j["planted_effects"] = spec.planted_effects;
    j["alpha_min"] = spec.extraction.alpha_min;
    json peaks = json::array();
    for (const auto& p : spec.peaks)
        peaks.push_back({{"hour", p.hour_mean},
                         {"sd", p.hour_sd},
                         {"p_occur", p.p_occur},
                         {"p_alone", p.p_alone}});
    j["peaks"] = std::move(peaks);
    return j.dump(2) + "\n";
}

std::string ground_truth_to_json(const GroundTruth& truth) {
    json j;
    j["planted_effects"] = truth.planted_effects;
    json eps = json::array();
    for (const auto& e : truth.episodes)
        eps.push_back({{"p", e.participant},
                       {"t", format_timestamp(e.t)},
                       {"label", to_string(e.label)},
                       {"peak", e.peak}});
    j["episodes"] = std::move(eps);
    return j.dump() + "\n";
}

void write_cohort_files(const SynthResult& result, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    for (Modality m : {Modality::accel, Modality::wearable, Modality::location,
                       Modality::screen, Modality::battery, Modality::app,
                       Modality::report}) {
        std::ofstream out(fs::path(dir) /
                          (std::string(to_string(m)) + ".jsonl"));
        out << to_jsonl(result.store, m);
    }
    std::ofstream(fs::path(dir) / "manifest.json")
        << manifest_to_json(result.store.manifest);
    std::ofstream(fs::path(dir) / "ground_truth.json")
        << ground_truth_to_json(result.truth);
}

}  // namespace mealsense
