#include "mealsense/matrix.hpp"

#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace mealsense {

using nlohmann::json;

const char* to_string(FeatureGroup g) {
    switch (g) {
        case FeatureGroup::T: return "T";
        case FeatureGroup::A_fb: return "A_fb";
        case FeatureGroup::A_sp: return "A_sp";
        case FeatureGroup::C_ps: return "C_ps";
        case FeatureGroup::C_sr: return "C_sr";
    }
    return "?";
}

std::optional<FeatureGroup> feature_group_from_string(const std::string& s) {
    for (FeatureGroup g : {FeatureGroup::T, FeatureGroup::A_fb, FeatureGroup::A_sp,
                           FeatureGroup::C_ps, FeatureGroup::C_sr})
        if (s == to_string(g)) return g;
    return std::nullopt;
}

int FeatureMatrix::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < catalog.size(); ++i)
        if (catalog[i].name == name) return static_cast<int>(i);
    return -1;
}

namespace {

std::string fmt_value(double v) {
    if (is_missing(v)) return "";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

std::string matrix_to_csv(const FeatureMatrix& m) {
    std::ostringstream out;
    out << "episode_id,participant_id,label";
    for (const auto& f : m.catalog) out << "," << f.name;
    out << "\n";
    for (std::size_t r = 0; r < m.n_rows(); ++r) {
        out << m.episode_ids[r] << "," << m.participants[r] << ","
            << to_string(m.labels[r]);
        for (double v : m.values[r]) out << "," << fmt_value(v);
        out << "\n";
    }
    return out.str();
}

std::string catalog_to_json(const FeatureMatrix& m) {
    json j = json::object();
    for (const auto& f : m.catalog) j[f.name] = to_string(f.group);
    return j.dump(2) + "\n";
}

FeatureMatrix matrix_from_csv(const std::string& csv_text,
                              const std::string& catalog_json) {
    json cat = json::parse(catalog_json);
    FeatureMatrix m;
    std::istringstream in(csv_text);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("matrix csv: empty file");
    auto header = split_csv_line(line);
    if (header.size() < 3 || header[0] != "episode_id" ||
        header[1] != "participant_id" || header[2] != "label")
        throw std::runtime_error("matrix csv: bad header");
    for (std::size_t i = 3; i < header.size(); ++i) {
        const std::string& name = header[i];
        if (!cat.contains(name))
            throw std::runtime_error("matrix csv: feature '" + name +
                                     "' missing from catalog");
        auto g = feature_group_from_string(cat[name].get<std::string>());
        if (!g)
            throw std::runtime_error("matrix csv: unknown group for '" + name + "'");
        m.catalog.push_back({name, *g});
    }
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw std::runtime_error("matrix csv: line " + std::to_string(lineno) +
                                     ": wrong cell count");
        m.episode_ids.push_back(cells[0]);
        m.participants.push_back(cells[1]);
        if (cells[2] == "alone")
            m.labels.push_back(Social::alone);
        else if (cells[2] == "with_others")
            m.labels.push_back(Social::with_others);
        else
            throw std::runtime_error("matrix csv: line " + std::to_string(lineno) +
                                     ": unknown label '" + cells[2] + "'");
        std::vector<double> row;
        row.reserve(m.catalog.size());
        for (std::size_t i = 3; i < cells.size(); ++i) {
            if (cells[i].empty())
                row.push_back(kMissing);
            else
                row.push_back(std::stod(cells[i]));
        }
        m.values.push_back(std::move(row));
    }
    return m;
}

FeatureMatrix expand_categoricals(const FeatureMatrix& m) {
    FeatureMatrix out;
    out.episode_ids = m.episode_ids;
    out.participants = m.participants;
    out.labels = m.labels;
    out.values.resize(m.n_rows());

    for (std::size_t c = 0; c < m.n_cols(); ++c) {
        std::set<double> distinct;
        for (std::size_t r = 0; r < m.n_rows(); ++r)
            if (!is_missing(m.values[r][c])) distinct.insert(m.values[r][c]);
        bool binary = true;
        for (double v : distinct)
            if (v != 0.0 && v != 1.0) binary = false;
        bool expand = m.catalog[c].group == FeatureGroup::C_sr && !binary;

        if (!expand) {
            out.catalog.push_back(m.catalog[c]);
            for (std::size_t r = 0; r < m.n_rows(); ++r)
                out.values[r].push_back(m.values[r][c]);
        } else {
            for (double cat : distinct) {
                char buf[40];
                std::snprintf(buf, sizeof(buf), "%s=%g", m.catalog[c].name.c_str(),
                              cat);
                out.catalog.push_back({buf, m.catalog[c].group});
                for (std::size_t r = 0; r < m.n_rows(); ++r) {
                    double v = m.values[r][c];
                    out.values[r].push_back(is_missing(v) ? kMissing
                                                          : (v == cat ? 1.0 : 0.0));
                }
            }
        }
    }
    return out;
}

}  // namespace mealsense
