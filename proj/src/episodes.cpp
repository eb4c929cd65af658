#include "mealsense/episodes.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <unordered_map>

namespace mealsense {

void ExtractionConfig::validate() const {
    if (alpha_min <= 0) throw std::invalid_argument("alpha must be > 0");
    if (slot_len_min <= 0) throw std::invalid_argument("slot_len must be > 0");
    if (alpha_min % slot_len_min != 0)
        throw std::invalid_argument("alpha must be divisible by slot_len");
    if (1440 % slot_len_min != 0)
        throw std::invalid_argument("slot_len must divide 1440 minutes");
    if (top_n_apps < 1) throw std::invalid_argument("top_n_apps must be >= 1");
    if (min_slot_coverage < 0 || min_slot_coverage > 1)
        throw std::invalid_argument("min_slot_coverage must lie in [0,1]");
    if (tsl_cap_hours <= 0) throw std::invalid_argument("tsl_cap_hours must be > 0");
}

ExtractionConfig ExtractionConfig::defaults_for(DatasetTag tag) {
    ExtractionConfig c;
    c.alpha_min = tag == DatasetTag::phone_style ? 30 : 120;
    return c;
}

WindowBounds window_bounds(LocalTimestamp t, int alpha_min) {
    if (alpha_min <= 0) throw std::invalid_argument("alpha must be > 0");
    std::int64_t a = static_cast<std::int64_t>(alpha_min) * 60;
    return WindowBounds{t - a, t, t, t + a};
}

namespace {

constexpr double kEarthRadiusM = 6371000.0;

// Membership in the episode window [T-a, T) u (T, T+a].
bool in_window(LocalTimestamp t, const WindowBounds& w) {
    if (t >= w.before_begin && t < w.before_end) return true;
    if (t > w.after_begin && t <= w.after_end) return true;
    return false;
}

// Slot starts assigned to the before side: aligned starts in
// [align_down(T-a), T). A slot straddling T belongs to before.
void side_ranges(LocalTimestamp t, const ExtractionConfig& cfg,
                 LocalTimestamp& bef_first, LocalTimestamp& bef_end,
                 LocalTimestamp& aft_first, LocalTimestamp& aft_end) {
    std::int64_t slot = static_cast<std::int64_t>(cfg.slot_len_min) * 60;
    std::int64_t a = static_cast<std::int64_t>(cfg.alpha_min) * 60;
    bef_first = align_down(t - a, slot);
    bef_end = t;  // starts strictly below T
    aft_first = align_up(t, slot);
    aft_end = align_up(t + a, slot);  // starts strictly below this
}

int count_slot_starts(LocalTimestamp first, LocalTimestamp end,
                      std::int64_t slot) {
    if (end <= first) return 0;
    return static_cast<int>((end - first + slot - 1) / slot);
}

template <typename Slot>
std::pair<std::size_t, std::size_t> slot_span(const std::vector<Slot>& slots,
                                              LocalTimestamp first,
                                              LocalTimestamp end) {
    auto lo = std::lower_bound(
        slots.begin(), slots.end(), first,
        [](const Slot& s, LocalTimestamp v) { return s.start < v; });
    auto hi = std::lower_bound(
        slots.begin(), slots.end(), end,
        [](const Slot& s, LocalTimestamp v) { return s.start < v; });
    return {static_cast<std::size_t>(lo - slots.begin()),
            static_cast<std::size_t>(hi - slots.begin())};
}

double sample_sd(const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double acc = 0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double haversine_m(double lat1, double lon1, double lat2, double lon2) {
    constexpr double deg = 3.14159265358979323846 / 180.0;
    double dphi = (lat2 - lat1) * deg;
    double dlam = (lon2 - lon1) * deg;
    double s1 = std::sin(dphi / 2), s2 = std::sin(dlam / 2);
    double h = s1 * s1 + std::cos(lat1 * deg) * std::cos(lat2 * deg) * s2 * s2;
    h = std::min(1.0, h);
    return 2.0 * kEarthRadiusM * std::asin(std::sqrt(h));
}

template <typename Rec>
std::pair<std::size_t, std::size_t> event_span(const std::vector<Rec>& recs,
                                               LocalTimestamp lo,
                                               LocalTimestamp hi) {
    auto a = std::lower_bound(
        recs.begin(), recs.end(), lo,
        [](const Rec& r, LocalTimestamp v) { return r.t < v; });
    auto b = std::upper_bound(
        recs.begin(), recs.end(), hi,
        [](LocalTimestamp v, const Rec& r) { return v < r.t; });
    return {static_cast<std::size_t>(a - recs.begin()),
            static_cast<std::size_t>(b - recs.begin())};
}

}  // namespace

SlotSeries slotize(const CohortStore& cohort, const ExtractionConfig& config) {
    config.validate();
    std::int64_t slot = static_cast<std::int64_t>(config.slot_len_min) * 60;
    SlotSeries out;
    out.wearable.resize(cohort.data.size());
    out.accel.resize(cohort.data.size());

    for (std::size_t p = 0; p < cohort.data.size(); ++p) {
        const auto& d = cohort.data[p];
        auto& ws = out.wearable[p];
        for (const auto& r : d.wearable) {
            LocalTimestamp s = align_down(r.t, slot);
            if (ws.empty() || ws.back().start != s) {
                WearableSlot sl;
                sl.start = s;
                ws.push_back(sl);
            }
            ws.back().steps += r.steps;
            ws.back().level_minutes[static_cast<int>(r.level)] += 1;
        }
        auto& as = out.accel[p];
        struct Acc {
            double sum[3], sum_abs[3];
            int n;
        };
        // records are time-sorted, so slots come out sorted too
        for (const auto& r : d.accel) {
            LocalTimestamp s = align_down(r.t, slot);
            if (as.empty() || as.back().start != s) {
                AccelSlot sl;
                sl.start = s;
                as.push_back(sl);
            }
            AccelSlot& sl = as.back();
            double v[3] = {r.x, r.y, r.z};
            for (int i = 0; i < 3; ++i) {
                sl.mean[i] += v[i];
                sl.mean_abs[i] += std::abs(v[i]);
            }
            sl.n += 1;
        }
        for (auto& sl : as)
            for (int i = 0; i < 3; ++i) {
                sl.mean[i] /= sl.n;
                sl.mean_abs[i] /= sl.n;
            }
    }
    return out;
}

FeatureMap wearable_features(const std::vector<WearableSlot>& slots,
                             const EatingEpisode& episode,
                             const ExtractionConfig& config) {
    std::int64_t slot = static_cast<std::int64_t>(config.slot_len_min) * 60;
    LocalTimestamp bf, be, af, ae;
    side_ranges(episode.t, config, bf, be, af, ae);

    FeatureMap out;
    const char* suffix[2] = {"bef", "aft"};
    LocalTimestamp firsts[2] = {bf, af}, ends[2] = {be, ae};
    for (int side = 0; side < 2; ++side) {
        auto [lo, hi] = slot_span(slots, firsts[side], ends[side]);
        int present = static_cast<int>(hi - lo);
        int expected = count_slot_starts(firsts[side], ends[side], slot);
        double coverage =
            expected > 0 ? static_cast<double>(present) / expected : 0.0;
        if (coverage < config.min_slot_coverage || present == 0) continue;

        std::vector<double> steps;
        double level_min[4] = {0, 0, 0, 0};
        for (std::size_t i = lo; i < hi; ++i) {
            steps.push_back(slots[i].steps);
            for (int l = 0; l < 4; ++l) level_min[l] += slots[i].level_minutes[l];
        }
        double tot = 0;
        for (double s : steps) tot += s;
        double mean = tot / static_cast<double>(steps.size());
        std::string sfx = suffix[side];
        out["tot_steps_" + sfx] = tot;
        out["mean_steps_" + sfx] = mean;
        out["median_steps_" + sfx] = median_of(steps);
        out["sd_steps_" + sfx] = sample_sd(steps, mean);
        out["min_sedentary_" + sfx] = level_min[0];
        out["min_lightly_" + sfx] = level_min[1];
        out["min_fairly_" + sfx] = level_min[2];
        out["min_very_" + sfx] = level_min[3];
    }
    return out;
}

FeatureMap accel_features(const std::vector<AccelSlot>& slots,
                          const EatingEpisode& episode,
                          const ExtractionConfig& config) {
    std::int64_t slot = static_cast<std::int64_t>(config.slot_len_min) * 60;
    LocalTimestamp bf, be, af, ae;
    side_ranges(episode.t, config, bf, be, af, ae);

    FeatureMap out;
    const char* suffix[2] = {"bef", "aft"};
    const char* axes = "xyz";
    LocalTimestamp firsts[2] = {bf, af}, ends[2] = {be, ae};
    for (int side = 0; side < 2; ++side) {
        auto [lo, hi] = slot_span(slots, firsts[side], ends[side]);
        int present = static_cast<int>(hi - lo);
        int expected = count_slot_starts(firsts[side], ends[side], slot);
        double coverage =
            expected > 0 ? static_cast<double>(present) / expected : 0.0;
        if (coverage < config.min_slot_coverage || present == 0) continue;

        for (int ax = 0; ax < 3; ++ax) {
            double m = 0, ma = 0;
            for (std::size_t i = lo; i < hi; ++i) {
                m += slots[i].mean[ax];
                ma += slots[i].mean_abs[ax];
            }
            m /= present;
            ma /= present;
            std::string base = std::string("acc_") + axes[ax];
            out[base + "_" + suffix[side]] = m;
            out[base + "_abs_" + suffix[side]] = ma;
        }
    }
    return out;
}

double radius_of_gyration(const std::vector<std::pair<double, double>>& points) {
    if (points.empty())
        throw std::invalid_argument("radius_of_gyration: empty point list");
    double clat = 0, clon = 0;
    for (const auto& [lat, lon] : points) {
        clat += lat;
        clon += lon;
    }
    clat /= static_cast<double>(points.size());
    clon /= static_cast<double>(points.size());
    double acc = 0;
    for (const auto& [lat, lon] : points) {
        double d = haversine_m(lat, lon, clat, clon);
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(points.size()));
}

FeatureMap location_features(const std::vector<LocationPoint>& points,
                             const EatingEpisode& episode,
                             const ExtractionConfig& config) {
    WindowBounds w = window_bounds(episode.t, config.alpha_min);
    auto [lo, hi] = event_span(points, w.before_begin, w.after_end);
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = lo; i < hi; ++i)
        if (in_window(points[i].t, w)) pts.emplace_back(points[i].lat, points[i].lon);
    FeatureMap out;
    if (!pts.empty()) out["location"] = radius_of_gyration(pts);
    return out;
}

FeatureMap screen_features(const std::vector<ScreenEvent>& events,
                           const EatingEpisode& episode,
                           const ExtractionConfig& config) {
    WindowBounds w = window_bounds(episode.t, config.alpha_min);
    // State before the first observed event is off.
    bool on = false;
    LocalTimestamp on_since = 0;
    double on_sec = 0;
    int transitions = 0;
    auto clip = [&](LocalTimestamp a, LocalTimestamp b) {
        LocalTimestamp lo = std::max(a, w.before_begin);
        LocalTimestamp hi = std::min(b, w.after_end);
        if (hi > lo) on_sec += static_cast<double>(hi - lo);
    };
    for (const auto& e : events) {
        if (e.t > w.after_end && !on) break;
        if (e.state == ScreenState::on && !on) {
            on = true;
            on_since = e.t;
            if (in_window(e.t, w)) ++transitions;
        } else if (e.state == ScreenState::off && on) {
            on = false;
            clip(on_since, e.t);
            if (on_since > w.after_end) break;
        }
    }
    if (on) clip(on_since, w.after_end);
    FeatureMap out;
    out["screen_on_sec"] = on_sec;
    out["screen_on_count"] = transitions;
    return out;
}

FeatureMap battery_features(const std::vector<BatteryEvent>& events,
                            const EatingEpisode& episode,
                            const ExtractionConfig& config) {
    WindowBounds w = window_bounds(episode.t, config.alpha_min);
    auto [lo, hi] = event_span(events, w.before_begin, w.after_end);
    double sum = 0;
    int n = 0;
    bool charging = false;
    for (std::size_t i = lo; i < hi; ++i) {
        if (!in_window(events[i].t, w)) continue;
        sum += events[i].level;
        ++n;
        charging = charging || events[i].charging;
    }
    FeatureMap out;
    if (n > 0) out["battery_mean_level"] = sum / n;
    out["charging_event"] = charging ? 1.0 : 0.0;
    return out;
}

std::vector<std::string> top_apps(const CohortStore& cohort, int top_n) {
    std::map<std::string, std::size_t> counts;
    for (const auto& d : cohort.data)
        for (const auto& e : d.app) counts[e.app_id]++;
    std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(),
                                                            counts.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    std::vector<std::string> out;
    for (const auto& [id, n] : ranked) {
        if (static_cast<int>(out.size()) >= top_n) break;
        out.push_back(id);
    }
    return out;
}

FeatureMap app_features(const std::vector<AppEvent>& events,
                        const EatingEpisode& episode,
                        const std::vector<std::string>& top,
                        const ExtractionConfig& config) {
    WindowBounds w = window_bounds(episode.t, config.alpha_min);
    auto [lo, hi] = event_span(events, w.before_begin, w.after_end);
    FeatureMap out;
    for (const auto& id : top) out["app_" + id] = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
        if (!in_window(events[i].t, w)) continue;
        auto it = out.find("app_" + events[i].app_id);
        if (it != out.end()) it->second = 1.0;
    }
    return out;
}

FeatureMap temporal_features(const EatingEpisode& episode,
                             const std::vector<EatingEpisode>& history,
                             const ExtractionConfig& config) {
    FeatureMap out;
    out["time"] = static_cast<double>(seconds_of_day(episode.t)) / 3600.0;
    double tsl = config.tsl_cap_hours;
    for (auto it = history.rbegin(); it != history.rend(); ++it) {
        if (it->t < episode.t) {
            tsl = std::min(tsl,
                           static_cast<double>(episode.t - it->t) / 3600.0);
            break;
        }
    }
    out["time_since_last_meal"] = tsl;
    return out;
}

FeatureMap selfreport_features(const EatingEpisode& episode,
                               const Manifest& manifest) {
    auto check = [](int code, const std::vector<int>& vocab, const char* what) {
        if (vocab.empty()) return;
        if (std::find(vocab.begin(), vocab.end(), code) == vocab.end())
            throw std::runtime_error(std::string("self-report ") + what +
                                     " code " + std::to_string(code) +
                                     " not in manifest vocabulary");
    };
    check(episode.activity_code, manifest.activity_codes, "activity");
    check(episode.loc_code, manifest.loc_codes, "location");
    FeatureMap out;
    out["concurrent_activity"] = episode.activity_code;
    out["loc_category"] = episode.loc_code;
    return out;
}

namespace {

// Modalities whose features enter the catalog, by dataset style.
struct ModalitySet {
    bool wearable = false, accel = false, location = false, screen = false,
         battery = false, apps = false;
};

ModalitySet modalities_for(const CohortStore& cohort) {
    ModalitySet s;
    switch (cohort.manifest.dataset_tag) {
        case DatasetTag::wearable_style:
            s.wearable = s.location = true;
            break;
        case DatasetTag::phone_style:
            s.accel = s.location = s.screen = s.battery = s.apps = true;
            break;
        case DatasetTag::custom:
            for (const auto& d : cohort.data) {
                s.wearable = s.wearable || !d.wearable.empty();
                s.accel = s.accel || !d.accel.empty();
                s.location = s.location || !d.location.empty();
                s.screen = s.screen || !d.screen.empty();
                s.battery = s.battery || !d.battery.empty();
                s.apps = s.apps || !d.app.empty();
            }
            break;
    }
    return s;
}

}  // namespace

FeatureMatrix build_matrix(const CohortStore& cohort,
                           const ExtractionConfig& config, BuildLog* log) {
    config.validate();
    ModalitySet mods = modalities_for(cohort);

    FeatureMatrix m;
    auto add = [&](const std::string& name, FeatureGroup g) {
        m.catalog.push_back({name, g});
    };
    add("time", FeatureGroup::T);
    add("time_since_last_meal", FeatureGroup::T);
    if (mods.wearable) {
        for (const char* sfx : {"bef", "aft"})
            for (const char* stat : {"tot", "mean", "median", "sd"})
                add(std::string(stat) + "_steps_" + sfx, FeatureGroup::A_fb);
        for (const char* sfx : {"bef", "aft"})
            for (const char* lvl : {"sedentary", "lightly", "fairly", "very"})
                add(std::string("min_") + lvl + "_" + sfx, FeatureGroup::A_fb);
    }
    if (mods.accel) {
        for (const char* sfx : {"bef", "aft"})
            for (char ax : {'x', 'y', 'z'})
                add(std::string("acc_") + ax + "_" + sfx, FeatureGroup::A_sp);
        for (const char* sfx : {"bef", "aft"})
            for (char ax : {'x', 'y', 'z'})
                add(std::string("acc_") + ax + "_abs_" + sfx, FeatureGroup::A_sp);
    }
    std::vector<std::string> apps;
    if (mods.location) add("location", FeatureGroup::C_ps);
    if (mods.screen) {
        add("screen_on_sec", FeatureGroup::C_ps);
        add("screen_on_count", FeatureGroup::C_ps);
    }
    if (mods.battery) {
        add("battery_mean_level", FeatureGroup::C_ps);
        add("charging_event", FeatureGroup::C_ps);
    }
    if (mods.apps) {
        apps = top_apps(cohort, config.top_n_apps);
        for (const auto& id : apps) add("app_" + id, FeatureGroup::C_ps);
    }
    add("concurrent_activity", FeatureGroup::C_sr);
    add("loc_category", FeatureGroup::C_sr);

    SlotSeries slots = slotize(cohort, config);

    BuildLog local_log;
    std::size_t total_episodes = 0;
    for (const auto& d : cohort.data) total_episodes += d.report.size();
    if (total_episodes == 0) throw std::runtime_error("empty cohort");
    local_log.episodes_total = total_episodes;

    for (std::size_t p = 0; p < cohort.data.size(); ++p) {
        const auto& d = cohort.data[p];
        std::vector<EatingEpisode> history;
        history.reserve(d.report.size());
        for (std::size_t k = 0; k < d.report.size(); ++k) {
            const EatingReport& r = d.report[k];
            EatingEpisode ep;
            ep.episode_id =
                cohort.manifest.participants[p] + "_e" + std::to_string(k);
            ep.participant = static_cast<int>(p);
            ep.t = r.t;
            ep.label = r.social_context;
            ep.meal_kind = r.meal_kind;
            ep.activity_code = r.activity_code;
            ep.loc_code = r.loc_code;

            FeatureMap feats = temporal_features(ep, history, config);
            history.push_back(ep);
            if (mods.wearable) {
                FeatureMap f = wearable_features(slots.wearable[p], ep, config);
                feats.insert(f.begin(), f.end());
            }
            if (mods.accel) {
                FeatureMap f = accel_features(slots.accel[p], ep, config);
                feats.insert(f.begin(), f.end());
            }
            if (mods.location) {
                FeatureMap f = location_features(d.location, ep, config);
                feats.insert(f.begin(), f.end());
            }
            if (mods.screen) {
                FeatureMap f = screen_features(d.screen, ep, config);
                feats.insert(f.begin(), f.end());
            }
            if (mods.battery) {
                FeatureMap f = battery_features(d.battery, ep, config);
                feats.insert(f.begin(), f.end());
            }
            if (mods.apps) {
                FeatureMap f = app_features(d.app, ep, apps, config);
                feats.insert(f.begin(), f.end());
            }
            {
                FeatureMap f = selfreport_features(ep, cohort.manifest);
                feats.insert(f.begin(), f.end());
            }

            std::vector<double> row(m.catalog.size(), kMissing);
            std::size_t missing = 0;
            for (std::size_t c = 0; c < m.catalog.size(); ++c) {
                auto it = feats.find(m.catalog[c].name);
                if (it != feats.end())
                    row[c] = it->second;
                else
                    ++missing;
            }
            if (static_cast<double>(missing) >
                0.5 * static_cast<double>(m.catalog.size())) {
                local_log.rows_dropped += 1;
                continue;
            }
            m.episode_ids.push_back(ep.episode_id);
            m.participants.push_back(cohort.manifest.participants[p]);
            m.labels.push_back(ep.label);
            m.values.push_back(std::move(row));
        }
    }
    if (log) *log = local_log;
    return m;
}

}  // namespace mealsense
