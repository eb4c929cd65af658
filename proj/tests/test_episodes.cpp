#include <doctest.h>

#include <cmath>
#include <sstream>

#include "mealsense/episodes.hpp"
#include "mealsense/rng.hpp"

using namespace mealsense;

namespace {

LocalTimestamp at(const char* iso) { return *parse_timestamp(iso); }

ExtractionConfig cfg(int alpha) {
    ExtractionConfig c;
    c.alpha_min = alpha;
    return c;
}

EatingEpisode episode_at(LocalTimestamp t) {
    EatingEpisode e;
    e.episode_id = "e0";
    e.t = t;
    return e;
}

WearableSlot wslot(LocalTimestamp start, int steps) {
    WearableSlot s;
    s.start = start;
    s.steps = steps;
    return s;
}

}  // namespace

TEST_CASE("extraction config validation") {
    CHECK_NOTHROW(cfg(120).validate());
    ExtractionConfig c = cfg(120);
    c.slot_len_min = 7;  // neither divides alpha nor 1440
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = cfg(-1);
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = cfg(120);
    c.min_slot_coverage = 1.5;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("window bounds definition") {
    LocalTimestamp t = at("2019-03-01T12:00:00");
    WindowBounds w = window_bounds(t, 30);
    CHECK(w.before_begin == t - 1800);
    CHECK(w.before_end == t);
    CHECK(w.after_begin == t);
    CHECK(w.after_end == t + 1800);
    // before and after never overlap; T belongs to neither side
    CHECK(w.before_end <= w.after_begin);
}

TEST_CASE("slotize aggregates wearable minutes and accel samples") {
    Manifest m;
    m.participants = {"u1"};
    std::vector<RawRecord> recs;
    for (int i = 0; i < 10; ++i) {
        WearableMinute w;
        w.participant = "u1";
        w.t = at("2019-03-01T12:00:00") + i * 60;
        w.steps = 10;
        w.level = ActivityLevel::lightly;
        recs.push_back(w);
    }
    AccelSample a1, a2;
    a1.participant = a2.participant = "u1";
    a1.t = at("2019-03-01T12:01:00");
    a2.t = at("2019-03-01T12:02:00");
    a1.x = -1;
    a2.x = 1;
    recs.push_back(a1);
    recs.push_back(a2);

    auto slots = slotize(build_cohort(recs, m), cfg(120));
    REQUIRE(slots.wearable[0].size() == 1);
    CHECK(slots.wearable[0][0].steps == 100);
    CHECK(slots.wearable[0][0].level_minutes[1] == 10);
    CHECK(slots.wearable[0][0].start == at("2019-03-01T12:00:00"));
    REQUIRE(slots.accel[0].size() == 1);
    CHECK(slots.accel[0][0].mean[0] == doctest::Approx(0.0));
    CHECK(slots.accel[0][0].mean_abs[0] == doctest::Approx(1.0));
}

TEST_CASE("wearable step statistics over before slots") {
    // slots [100, 50, 0] -> tot 150, mean 50, median 50, sample sd 50
    std::vector<WearableSlot> slots = {
        wslot(at("2019-03-01T11:30:00"), 100),
        wslot(at("2019-03-01T11:40:00"), 50),
        wslot(at("2019-03-01T11:50:00"), 0),
    };
    auto f = wearable_features(slots, episode_at(at("2019-03-01T12:00:00")),
                               cfg(30));
    CHECK(f.at("tot_steps_bef") == doctest::Approx(150));
    CHECK(f.at("mean_steps_bef") == doctest::Approx(50));
    CHECK(f.at("median_steps_bef") == doctest::Approx(50));
    CHECK(f.at("sd_steps_bef") == doctest::Approx(50));
    // no after-side data -> after features absent (missing)
    CHECK(f.count("tot_steps_aft") == 0);
}

TEST_CASE("wearable activity-level minutes") {
    std::vector<WearableSlot> slots;
    LocalTimestamp start = at("2019-03-01T10:00:00");
    for (int i = 0; i < 12; ++i) {
        WearableSlot s = wslot(start + i * 600, 0);
        s.level_minutes[0] = 10;  // all sedentary
        slots.push_back(s);
    }
    auto f = wearable_features(slots, episode_at(at("2019-03-01T12:00:00")),
                               cfg(120));
    CHECK(f.at("min_sedentary_bef") == doctest::Approx(120));
    CHECK(f.at("min_lightly_bef") == doctest::Approx(0));
}

TEST_CASE("coverage below threshold marks a side missing") {
    // one slot present of three expected, threshold 0.5
    std::vector<WearableSlot> slots = {wslot(at("2019-03-01T11:30:00"), 10)};
    auto f = wearable_features(slots, episode_at(at("2019-03-01T12:00:00")),
                               cfg(30));
    CHECK(f.count("tot_steps_bef") == 0);
}

TEST_CASE("single-slot window has sd zero") {
    ExtractionConfig c = cfg(10);
    std::vector<WearableSlot> slots = {wslot(at("2019-03-01T11:50:00"), 30)};
    auto f = wearable_features(slots, episode_at(at("2019-03-01T12:00:00")), c);
    CHECK(f.at("sd_steps_bef") == doctest::Approx(0));
}

TEST_CASE("slot straddling the event time counts as before") {
    // T=12:05: the 12:00 slot starts below T and belongs to bef
    std::vector<WearableSlot> slots = {
        wslot(at("2019-03-01T11:30:00"), 1), wslot(at("2019-03-01T11:40:00"), 2),
        wslot(at("2019-03-01T11:50:00"), 4), wslot(at("2019-03-01T12:00:00"), 8),
        wslot(at("2019-03-01T12:10:00"), 16), wslot(at("2019-03-01T12:20:00"), 32),
        wslot(at("2019-03-01T12:30:00"), 64),
    };
    auto f = wearable_features(slots, episode_at(at("2019-03-01T12:05:00")),
                               cfg(30));
    CHECK(f.at("tot_steps_bef") == doctest::Approx(15));   // 1+2+4+8
    CHECK(f.at("tot_steps_aft") == doctest::Approx(112));  // 16+32+64
}

TEST_CASE("window disjointness and additivity over random slot layouts") {
    Rng rng(7);
    LocalTimestamp day = at("2019-03-01T00:00:00");
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<WearableSlot> slots;
        int total = 0;
        // full coverage 08:00-16:00
        for (int i = 0; i < 48; ++i) {
            int steps = static_cast<int>(rng.below(100));
            slots.push_back(wslot(day + 8 * 3600 + i * 600, steps));
        }
        LocalTimestamp t = day + 11 * 3600 + static_cast<std::int64_t>(rng.below(7200));
        auto f = wearable_features(slots, episode_at(t), cfg(60));
        // every in-range slot contributes to exactly one side
        std::int64_t slotsec = 600;
        LocalTimestamp bf = align_down(t - 3600, slotsec);
        LocalTimestamp ae = align_up(t + 3600, slotsec);
        for (const auto& s : slots)
            if (s.start >= bf && s.start < ae) total += s.steps;
        CHECK(f.at("tot_steps_bef") + f.at("tot_steps_aft") ==
              doctest::Approx(total));
    }
}

TEST_CASE("accel mean of slot means, abs dominance") {
    std::vector<AccelSlot> slots;
    AccelSlot s1, s2;
    s1.start = at("2019-03-01T11:30:00");
    s2.start = at("2019-03-01T11:40:00");
    s1.mean[1] = 0.2;
    s2.mean[1] = 0.4;
    s1.mean_abs[1] = 0.2;
    s2.mean_abs[1] = 0.4;
    s1.n = s2.n = 1;
    slots = {s1, s2};
    ExtractionConfig c = cfg(30);
    c.min_slot_coverage = 0.5;
    auto f = accel_features(slots, episode_at(at("2019-03-01T12:00:00")), c);
    CHECK(f.at("acc_y_bef") == doctest::Approx(0.3));

    // random slots: mean-of-abs >= |mean| on every axis and side
    Rng rng(9);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<AccelSlot> rs;
        for (int i = 0; i < 12; ++i) {
            AccelSlot s;
            s.start = at("2019-03-01T11:00:00") + i * 600;
            s.n = 4;
            for (int ax = 0; ax < 3; ++ax) {
                double sum = 0, sum_abs = 0;
                for (int k = 0; k < 4; ++k) {
                    double v = rng.normal();
                    sum += v;
                    sum_abs += std::abs(v);
                }
                s.mean[ax] = sum / 4;
                s.mean_abs[ax] = sum_abs / 4;
            }
            rs.push_back(s);
        }
        auto g = accel_features(rs, episode_at(at("2019-03-01T12:00:00")), c);
        for (const char* ax : {"x", "y", "z"})
            for (const char* side : {"bef", "aft"}) {
                std::string base = std::string("acc_") + ax;
                CHECK(g.at(base + "_abs_" + side) >=
                      std::abs(g.at(base + "_" + side)) - 1e-12);
            }
    }
}

TEST_CASE("radius of gyration") {
    CHECK(radius_of_gyration({{46.5, 6.6}}) == doctest::Approx(0.0));
    CHECK(radius_of_gyration({{46.5, 6.6}, {46.5, 6.6}, {46.5, 6.6}}) ==
          doctest::Approx(0.0).epsilon(1e-9));
    // two points 200 m apart along the equator -> r_g = 100 m
    double dlon = 200.0 / 6371000.0 * 180.0 / 3.14159265358979323846;
    CHECK(radius_of_gyration({{0.0, 0.0}, {0.0, dlon}}) ==
          doctest::Approx(100.0).epsilon(1e-6));
    CHECK_THROWS_AS(radius_of_gyration({}), std::invalid_argument);
}

TEST_CASE("location feature over both window sides") {
    std::vector<LocationPoint> pts;
    LocationPoint p;
    p.participant = "u1";
    p.t = at("2019-03-01T11:50:00");
    p.lat = 0.0;
    p.lon = 0.0;
    pts.push_back(p);
    p.t = at("2019-03-01T12:10:00");
    p.lon = 200.0 / 6371000.0 * 180.0 / 3.14159265358979323846;
    pts.push_back(p);
    auto f = location_features(pts, episode_at(at("2019-03-01T12:00:00")),
                               cfg(30));
    CHECK(f.at("location") == doctest::Approx(100.0).epsilon(1e-6));

    // points only at exactly T are excluded -> feature missing
    std::vector<LocationPoint> at_t = {pts[0]};
    at_t[0].t = at("2019-03-01T12:00:00");
    CHECK(location_features(at_t, episode_at(at("2019-03-01T12:00:00")), cfg(30))
              .count("location") == 0);
}

TEST_CASE("screen on-time and transitions") {
    auto ev = [](const char* iso, ScreenState st) {
        ScreenEvent e;
        e.participant = "u1";
        e.t = *parse_timestamp(iso);
        e.state = st;
        return e;
    };
    // T=10:30, alpha=30 -> window 10:00-11:00
    EatingEpisode ep = episode_at(at("2019-03-01T10:30:00"));
    std::vector<ScreenEvent> events = {
        ev("2019-03-01T10:05:00", ScreenState::on),
        ev("2019-03-01T10:20:00", ScreenState::off),
        ev("2019-03-01T10:40:00", ScreenState::on),
        ev("2019-03-01T10:50:00", ScreenState::off),
    };
    auto f = screen_features(events, ep, cfg(30));
    CHECK(f.at("screen_on_sec") == doctest::Approx(1500));  // 15 + 10 min
    CHECK(f.at("screen_on_count") == doctest::Approx(2));

    // on-interval entering the window from before: clipped, no transition
    std::vector<ScreenEvent> entering = {
        ev("2019-03-01T09:50:00", ScreenState::on),
        ev("2019-03-01T10:10:00", ScreenState::off),
    };
    f = screen_features(entering, ep, cfg(30));
    CHECK(f.at("screen_on_sec") == doctest::Approx(600));
    CHECK(f.at("screen_on_count") == doctest::Approx(0));

    // no events: screen assumed off
    f = screen_features({}, ep, cfg(30));
    CHECK(f.at("screen_on_sec") == doctest::Approx(0));
    CHECK(f.at("screen_on_count") == doctest::Approx(0));

    // still on at the window end: clipped at T+alpha
    std::vector<ScreenEvent> open_ended = {
        ev("2019-03-01T10:55:00", ScreenState::on),
    };
    f = screen_features(open_ended, ep, cfg(30));
    CHECK(f.at("screen_on_sec") == doctest::Approx(300));
    CHECK(f.at("screen_on_count") == doctest::Approx(1));
}

TEST_CASE("battery features") {
    auto ev = [](const char* iso, double level, bool charging) {
        BatteryEvent e;
        e.participant = "u1";
        e.t = *parse_timestamp(iso);
        e.level = level;
        e.charging = charging;
        return e;
    };
    EatingEpisode ep = episode_at(at("2019-03-01T10:30:00"));
    std::vector<BatteryEvent> events = {
        ev("2019-03-01T10:10:00", 80, false),
        ev("2019-03-01T10:50:00", 60, false),
    };
    auto f = battery_features(events, ep, cfg(30));
    CHECK(f.at("battery_mean_level") == doctest::Approx(70));
    CHECK(f.at("charging_event") == doctest::Approx(0));

    events.push_back(ev("2019-03-01T10:40:00", 65, true));
    f = battery_features(events, ep, cfg(30));
    CHECK(f.at("charging_event") == doctest::Approx(1));

    f = battery_features({}, ep, cfg(30));
    CHECK(f.count("battery_mean_level") == 0);
    CHECK(f.at("charging_event") == doctest::Approx(0));
}

TEST_CASE("top apps ranking and ties") {
    Manifest m;
    m.participants = {"u1"};
    std::vector<RawRecord> recs;
    auto push = [&](const char* id, int n) {
        for (int i = 0; i < n; ++i) {
            AppEvent e;
            e.participant = "u1";
            e.t = at("2019-03-01T10:00:00") + i;
            e.app_id = id;
            recs.push_back(e);
        }
    };
    push("maps", 5);
    push("chat", 3);
    push("cam", 1);
    auto cohort = build_cohort(recs, m);
    CHECK(top_apps(cohort, 2) == std::vector<std::string>{"maps", "chat"});
    CHECK(top_apps(cohort, 10).size() == 3);  // shortfall: all apps

    recs.clear();
    push("b", 2);
    push("a", 2);
    CHECK(top_apps(build_cohort(recs, m), 1) ==
          std::vector<std::string>{"a"});  // lexicographic tie-break
}

TEST_CASE("app usage flags") {
    EatingEpisode ep = episode_at(at("2019-03-01T12:00:00"));
    AppEvent e;
    e.participant = "u1";
    e.app_id = "spotify";
    e.t = at("2019-03-01T12:10:00");
    auto f = app_features({e}, ep, {"spotify", "maps"}, cfg(30));
    CHECK(f.at("app_spotify") == doctest::Approx(1));
    CHECK(f.at("app_maps") == doctest::Approx(0));

    // event exactly at T is outside both window sides
    e.t = ep.t;
    f = app_features({e}, ep, {"spotify"}, cfg(30));
    CHECK(f.at("app_spotify") == doctest::Approx(0));
}

TEST_CASE("temporal features") {
    ExtractionConfig c = cfg(120);
    EatingEpisode ep = episode_at(at("2019-03-01T12:30:00"));
    auto f = temporal_features(ep, {}, c);
    CHECK(f.at("time") == doctest::Approx(12.5));
    CHECK(f.at("time_since_last_meal") == doctest::Approx(24.0));  // first ever

    std::vector<EatingEpisode> hist = {episode_at(at("2019-03-01T08:00:00"))};
    f = temporal_features(ep, hist, c);
    CHECK(f.at("time_since_last_meal") == doctest::Approx(4.5));

    // gap beyond the cap clamps to the cap
    hist = {episode_at(at("2019-02-25T08:00:00"))};
    f = temporal_features(ep, hist, c);
    CHECK(f.at("time_since_last_meal") == doctest::Approx(24.0));
}

TEST_CASE("self-report features and vocabulary enforcement") {
    Manifest m;
    m.participants = {"u1"};
    EatingEpisode ep = episode_at(at("2019-03-01T12:00:00"));
    ep.activity_code = 3;
    ep.loc_code = 1;
    auto f = selfreport_features(ep, m);  // unconstrained vocabulary
    CHECK(f.at("concurrent_activity") == doctest::Approx(3));
    CHECK(f.at("loc_category") == doctest::Approx(1));
    CHECK(f.count("social") == 0);  // label never leaks into features

    m.activity_codes = {1, 2};
    CHECK_THROWS_AS(selfreport_features(ep, m), std::runtime_error);
}

namespace {

// Minimal wearable-style cohort: one participant, one day of wearable minutes,
// a couple of location points, and n_reports eating reports.
CohortStore tiny_wearable_cohort(int n_reports, bool with_sensing = true) {
    Manifest m;
    m.participants = {"u1"};
    m.dataset_tag = DatasetTag::wearable_style;
    std::vector<RawRecord> recs;
    LocalTimestamp day = *parse_timestamp("2019-03-01T00:00:00");
    if (with_sensing) {
        for (int i = 0; i < 1440; ++i) {
            WearableMinute w;
            w.participant = "u1";
            w.t = day + i * 60;
            w.steps = (i * 13) % 40;
            w.level = static_cast<ActivityLevel>(i % 4);
            recs.push_back(w);
        }
        for (int i = 0; i < 24; ++i) {
            LocationPoint p;
            p.participant = "u1";
            p.t = day + i * 3600 + 30;
            p.lat = 46.5 + 0.0001 * (i % 3);
            p.lon = 6.6;
            recs.push_back(p);
        }
    }
    for (int i = 0; i < n_reports; ++i) {
        EatingReport r;
        r.participant = "u1";
        r.t = day + (9 + 5 * i) * 3600;
        r.social_context = i % 2 ? Social::with_others : Social::alone;
        recs.push_back(r);
    }
    return build_cohort(recs, m);
}

}  // namespace

TEST_CASE("build_matrix rows, determinism, and drop rule") {
    auto cohort = tiny_wearable_cohort(2);
    BuildLog log;
    FeatureMatrix m = build_matrix(cohort, cfg(120), &log);
    CHECK(m.n_rows() == 2);
    CHECK(log.episodes_total == 2);
    CHECK(log.rows_dropped == 0);
    // wearable-style catalog: 2 temporal + 16 wearable + location + 2 self-report
    CHECK(m.n_cols() == 21);
    for (const auto& f : m.catalog) CHECK(f.name != "social");

    FeatureMatrix m2 = build_matrix(cohort, cfg(120));
    CHECK(matrix_to_csv(m) == matrix_to_csv(m2));

    // no sensing data at all: >50% of features missing, rows dropped
    auto bare = tiny_wearable_cohort(2, /*with_sensing=*/false);
    BuildLog log2;
    FeatureMatrix dropped = build_matrix(bare, cfg(120), &log2);
    CHECK(dropped.n_rows() == 0);
    CHECK(log2.rows_dropped == 2);

    CHECK_THROWS_WITH_AS(build_matrix(tiny_wearable_cohort(0), cfg(120)),
                         "empty cohort", std::runtime_error);
}

TEST_CASE("matrix csv round trip preserves values and missing cells") {
    auto cohort = tiny_wearable_cohort(3);
    FeatureMatrix m = build_matrix(cohort, cfg(120));
    FeatureMatrix back = matrix_from_csv(matrix_to_csv(m), catalog_to_json(m));
    REQUIRE(back.n_rows() == m.n_rows());
    REQUIRE(back.n_cols() == m.n_cols());
    CHECK(matrix_to_csv(back) == matrix_to_csv(m));
    for (std::size_t r = 0; r < m.n_rows(); ++r) {
        CHECK(back.labels[r] == m.labels[r]);
        CHECK(back.participants[r] == m.participants[r]);
    }
}
