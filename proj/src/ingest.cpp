#include "mealsense/ingest.hpp"

#include <algorithm>
#include <istream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

namespace mealsense {

using nlohmann::json;

const char* to_string(Modality m) {
    switch (m) {
        case Modality::accel: return "accel";
        case Modality::wearable: return "wearable";
        case Modality::location: return "location";
        case Modality::screen: return "screen";
        case Modality::battery: return "battery";
        case Modality::app: return "app";
        case Modality::report: return "report";
    }
    return "?";
}

const char* to_string(ActivityLevel l) {
    switch (l) {
        case ActivityLevel::sedentary: return "sedentary";
        case ActivityLevel::lightly: return "lightly";
        case ActivityLevel::fairly: return "fairly";
        case ActivityLevel::very: return "very";
    }
    return "?";
}

const char* to_string(Social s) {
    return s == Social::alone ? "alone" : "with_others";
}

const char* to_string(MealKind k) { return k == MealKind::meal ? "meal" : "snack"; }

const char* to_string(DatasetTag t) {
    switch (t) {
        case DatasetTag::wearable_style: return "wearable-style";
        case DatasetTag::phone_style: return "phone-style";
        case DatasetTag::custom: return "custom";
    }
    return "?";
}

std::optional<Modality> modality_from_string(const std::string& s) {
    for (Modality m : {Modality::accel, Modality::wearable, Modality::location,
                       Modality::screen, Modality::battery, Modality::app,
                       Modality::report})
        if (s == to_string(m)) return m;
    return std::nullopt;
}

std::optional<DatasetTag> dataset_tag_from_string(const std::string& s) {
    for (DatasetTag t :
         {DatasetTag::wearable_style, DatasetTag::phone_style, DatasetTag::custom})
        if (s == to_string(t)) return t;
    return std::nullopt;
}

Modality modality_of(const RawRecord& r) {
    struct V {
        Modality operator()(const AccelSample&) { return Modality::accel; }
        Modality operator()(const WearableMinute&) { return Modality::wearable; }
        Modality operator()(const LocationPoint&) { return Modality::location; }
        Modality operator()(const ScreenEvent&) { return Modality::screen; }
        Modality operator()(const BatteryEvent&) { return Modality::battery; }
        Modality operator()(const AppEvent&) { return Modality::app; }
        Modality operator()(const EatingReport&) { return Modality::report; }
    };
    return std::visit(V{}, r);
}

int CohortStore::participant_index(const std::string& id) const {
    for (std::size_t i = 0; i < manifest.participants.size(); ++i)
        if (manifest.participants[i] == id) return static_cast<int>(i);
    return -1;
}

std::size_t CohortStore::total_records() const {
    std::size_t n = 0;
    for (const auto& d : data)
        n += d.accel.size() + d.wearable.size() + d.location.size() +
             d.screen.size() + d.battery.size() + d.app.size() + d.report.size();
    return n;
}

namespace {

[[noreturn]] void fail(std::size_t line, const std::string& why) {
    throw IngestError("line " + std::to_string(line) + ": " + why);
}

double need_number(const json& j, const char* field, std::size_t line) {
    auto it = j.find(field);
    if (it == j.end() || !it->is_number())
        fail(line, std::string("missing or non-numeric field '") + field + "'");
    return it->get<double>();
}

std::string need_string(const json& j, const char* field, std::size_t line) {
    auto it = j.find(field);
    if (it == j.end() || !it->is_string())
        fail(line, std::string("missing or non-string field '") + field + "'");
    return it->get<std::string>();
}

RecordHeader parse_header(const json& j, std::size_t line) {
    RecordHeader h;
    h.participant = need_string(j, "p", line);
    if (h.participant.empty() || h.participant.size() > 64)
        fail(line, "invalid participant id");
    auto t = parse_timestamp(need_string(j, "t", line));
    if (!t) fail(line, "invalid timestamp");
    h.t = *t;
    return h;
}

RawRecord parse_line(const json& j, Modality kind, std::size_t line) {
    RecordHeader h = parse_header(j, line);
    switch (kind) {
        case Modality::accel: {
            AccelSample r;
            static_cast<RecordHeader&>(r) = h;
            r.x = need_number(j, "x", line);
            r.y = need_number(j, "y", line);
            r.z = need_number(j, "z", line);
            return r;
        }
        case Modality::wearable: {
            WearableMinute r;
            static_cast<RecordHeader&>(r) = h;
            double steps = need_number(j, "steps", line);
            if (steps < 0 || steps != static_cast<int>(steps))
                fail(line, "field 'steps' must be a non-negative integer");
            r.steps = static_cast<int>(steps);
            std::string lvl = need_string(j, "level", line);
            bool ok = false;
            for (ActivityLevel l :
                 {ActivityLevel::sedentary, ActivityLevel::lightly,
                  ActivityLevel::fairly, ActivityLevel::very})
                if (lvl == to_string(l)) {
                    r.level = l;
                    ok = true;
                }
            if (!ok) fail(line, "field 'level' has unknown value '" + lvl + "'");
            return r;
        }
        case Modality::location: {
            LocationPoint r;
            static_cast<RecordHeader&>(r) = h;
            r.lat = need_number(j, "lat", line);
            r.lon = need_number(j, "lon", line);
            if (r.lat < -90 || r.lat > 90) fail(line, "field 'lat' out of range");
            if (r.lon < -180 || r.lon > 180)
                fail(line, "field 'lon' out of range");
            return r;
        }
        case Modality::screen: {
            ScreenEvent r;
            static_cast<RecordHeader&>(r) = h;
            std::string st = need_string(j, "state", line);
            if (st == "on")
                r.state = ScreenState::on;
            else if (st == "off")
                r.state = ScreenState::off;
            else
                fail(line, "field 'state' must be 'on' or 'off'");
            return r;
        }
        case Modality::battery: {
            BatteryEvent r;
            static_cast<RecordHeader&>(r) = h;
            r.level = need_number(j, "level", line);
            if (r.level < 0 || r.level > 100)
                fail(line, "field 'level' out of range");
            auto it = j.find("charging");
            if (it == j.end() || !it->is_boolean())
                fail(line, "missing or non-boolean field 'charging'");
            r.charging = it->get<bool>();
            return r;
        }
        case Modality::app: {
            AppEvent r;
            static_cast<RecordHeader&>(r) = h;
            r.app_id = need_string(j, "app", line);
            if (r.app_id.empty()) fail(line, "field 'app' must be non-empty");
            return r;
        }
        case Modality::report: {
            EatingReport r;
            static_cast<RecordHeader&>(r) = h;
            std::string social = need_string(j, "social", line);
            if (social == "alone")
                r.social_context = Social::alone;
            else if (social == "with_others")
                r.social_context = Social::with_others;
            else
                fail(line, "field 'social' has unknown value '" + social + "'");
            std::string meal = need_string(j, "meal", line);
            if (meal == "meal")
                r.meal_kind = MealKind::meal;
            else if (meal == "snack")
                r.meal_kind = MealKind::snack;
            else
                fail(line, "field 'meal' has unknown value '" + meal + "'");
            double ac = need_number(j, "activity_code", line);
            double lc = need_number(j, "loc_code", line);
            if (ac != static_cast<int>(ac) || lc != static_cast<int>(lc))
                fail(line, "self-report codes must be integers");
            r.activity_code = static_cast<int>(ac);
            r.loc_code = static_cast<int>(lc);
            return r;
        }
    }
    fail(line, "unknown modality");
}

}  // namespace

std::vector<RawRecord> parse_stream(std::istream& in, Modality kind) {
    std::vector<RawRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) fail(lineno, "malformed JSON");
        out.push_back(parse_line(j, kind, lineno));
    }
    return out;
}

Manifest parse_manifest(std::istream& in) {
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw IngestError("manifest: malformed JSON");
    Manifest m;
    if (!j.contains("participants") || !j["participants"].is_array())
        throw IngestError("manifest: missing 'participants' array");
    std::unordered_map<std::string, int> seen;
    for (const auto& p : j["participants"]) {
        if (!p.is_string()) throw IngestError("manifest: participant ids must be strings");
        std::string id = p.get<std::string>();
        if (id.empty() || id.size() > 64)
            throw IngestError("manifest: invalid participant id '" + id + "'");
        if (seen.count(id))
            throw IngestError("manifest: duplicate participant '" + id + "'");
        seen[id] = 1;
        m.participants.push_back(id);
    }
    std::string tag = j.value("dataset_tag", std::string("custom"));
    auto dt = dataset_tag_from_string(tag);
    if (!dt) throw IngestError("manifest: unknown dataset_tag '" + tag + "'");
    m.dataset_tag = *dt;
    if (j.contains("activity_codes"))
        m.activity_codes = j["activity_codes"].get<std::vector<int>>();
    if (j.contains("loc_codes"))
        m.loc_codes = j["loc_codes"].get<std::vector<int>>();
    return m;
}

CohortStore build_cohort(const std::vector<RawRecord>& records,
                         const Manifest& manifest) {
    CohortStore store;
    store.manifest = manifest;
    store.data.resize(manifest.participants.size());
    std::unordered_map<std::string, int> index;
    for (std::size_t i = 0; i < manifest.participants.size(); ++i)
        index[manifest.participants[i]] = static_cast<int>(i);

    for (const auto& r : records) {
        const auto& h = header_of(r);
        auto it = index.find(h.participant);
        if (it == index.end())
            throw IngestError("unknown participant " + h.participant);
        ParticipantData& d = store.data[static_cast<std::size_t>(it->second)];
        std::visit(
            [&](const auto& rec) {
                using T = std::decay_t<decltype(rec)>;
                if constexpr (std::is_same_v<T, AccelSample>)
                    d.accel.push_back(rec);
                else if constexpr (std::is_same_v<T, WearableMinute>)
                    d.wearable.push_back(rec);
                else if constexpr (std::is_same_v<T, LocationPoint>)
                    d.location.push_back(rec);
                else if constexpr (std::is_same_v<T, ScreenEvent>)
                    d.screen.push_back(rec);
                else if constexpr (std::is_same_v<T, BatteryEvent>)
                    d.battery.push_back(rec);
                else if constexpr (std::is_same_v<T, AppEvent>)
                    d.app.push_back(rec);
                else
                    d.report.push_back(rec);
            },
            r);
    }

    auto by_time = [](const auto& a, const auto& b) { return a.t < b.t; };
    for (auto& d : store.data) {
        std::stable_sort(d.accel.begin(), d.accel.end(), by_time);
        std::stable_sort(d.wearable.begin(), d.wearable.end(), by_time);
        std::stable_sort(d.location.begin(), d.location.end(), by_time);
        std::stable_sort(d.screen.begin(), d.screen.end(), by_time);
        std::stable_sort(d.battery.begin(), d.battery.end(), by_time);
        std::stable_sort(d.app.begin(), d.app.end(), by_time);
        std::stable_sort(d.report.begin(), d.report.end(), by_time);
    }
    return store;
}

namespace {

json record_json(const AccelSample& r) {
    return json{{"x", r.x}, {"y", r.y}, {"z", r.z}};
}
json record_json(const WearableMinute& r) {
    return json{{"steps", r.steps}, {"level", to_string(r.level)}};
}
json record_json(const LocationPoint& r) {
    return json{{"lat", r.lat}, {"lon", r.lon}};
}
json record_json(const ScreenEvent& r) {
    return json{{"state", r.state == ScreenState::on ? "on" : "off"}};
}
json record_json(const BatteryEvent& r) {
    return json{{"level", r.level}, {"charging", r.charging}};
}
json record_json(const AppEvent& r) { return json{{"app", r.app_id}}; }
json record_json(const EatingReport& r) {
    return json{{"social", to_string(r.social_context)},
                {"meal", to_string(r.meal_kind)},
                {"activity_code", r.activity_code},
                {"loc_code", r.loc_code}};
}

template <typename T>
void emit(std::ostringstream& out, const std::string& participant,
          const std::vector<T>& recs) {
    for (const auto& r : recs) {
        json j = record_json(r);
        j["p"] = participant;
        j["t"] = format_timestamp(r.t);
        out << j.dump() << "\n";
    }
}

}  // namespace

std::string to_jsonl(const CohortStore& store, Modality kind) {
    std::ostringstream out;
    for (std::size_t i = 0; i < store.data.size(); ++i) {
        const std::string& p = store.manifest.participants[i];
        const ParticipantData& d = store.data[i];
        switch (kind) {
            case Modality::accel: emit(out, p, d.accel); break;
            case Modality::wearable: emit(out, p, d.wearable); break;
            case Modality::location: emit(out, p, d.location); break;
            case Modality::screen: emit(out, p, d.screen); break;
            case Modality::battery: emit(out, p, d.battery); break;
            case Modality::app: emit(out, p, d.app); break;
            case Modality::report: emit(out, p, d.report); break;
        }
    }
    return out.str();
}

std::string manifest_to_json(const Manifest& manifest) {
    json j;
    j["participants"] = manifest.participants;
    j["dataset_tag"] = to_string(manifest.dataset_tag);
    if (!manifest.activity_codes.empty())
        j["activity_codes"] = manifest.activity_codes;
    if (!manifest.loc_codes.empty()) j["loc_codes"] = manifest.loc_codes;
    return j.dump(2) + "\n";
}

}  // namespace mealsense
