#include "mealsense/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace mealsense {

namespace {

struct Moments {
    std::size_t n = 0;
    double mean = 0;
    double var = 0;  // sample variance, n-1 denominator
};

Moments moments(const std::vector<double>& v) {
    Moments m;
    m.n = v.size();
    if (m.n == 0) return m;
    double s = 0;
    for (double x : v) s += x;
    m.mean = s / static_cast<double>(m.n);
    if (m.n >= 2) {
        double acc = 0;
        for (double x : v) acc += (x - m.mean) * (x - m.mean);
        m.var = acc / static_cast<double>(m.n - 1);
    }
    return m;
}

// Continued fraction for the incomplete beta function (Lentz's method).
double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 1e-12;
    constexpr double kTiny = 1e-300;

    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                      a * std::log(x) + b * std::log1p(-x);
    double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
    if (df <= 0) throw std::invalid_argument("df must be > 0");
    if (t == 0.0) return 1.0;
    if (std::isinf(t)) return 5e-324;  // smallest positive; p stays in (0, 1]
    double x = df / (df + t * t);
    double p = incomplete_beta(df / 2.0, 0.5, x);
    if (p <= 0.0) p = 5e-324;
    if (p > 1.0) p = 1.0;
    return p;
}

TTestResult welch_t(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2)
        throw std::invalid_argument("welch_t: need at least 2 samples per group");
    Moments ma = moments(a), mb = moments(b);
    double na = static_cast<double>(ma.n), nb = static_cast<double>(mb.n);
    double va = ma.var / na, vb = mb.var / nb;
    if (va + vb == 0.0) {
        if (ma.mean == mb.mean) return {0.0, na + nb - 2.0, 1.0};
        throw std::invalid_argument("welch_t: degenerate variance");
    }
    TTestResult r;
    r.t = (ma.mean - mb.mean) / std::sqrt(va + vb);
    r.df = (va + vb) * (va + vb) /
           (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    r.p = student_t_two_sided_p(r.t, r.df);
    return r;
}

CohensD cohens_d(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2)
        throw std::invalid_argument("cohens_d: need at least 2 samples per group");
    Moments ma = moments(a), mb = moments(b);
    double n1 = static_cast<double>(ma.n), n2 = static_cast<double>(mb.n);
    double pooled_var =
        ((n1 - 1.0) * ma.var + (n2 - 1.0) * mb.var) / (n1 + n2 - 2.0);
    double d;
    if (pooled_var == 0.0) {
        if (ma.mean != mb.mean)
            throw std::invalid_argument("cohens_d: degenerate variance");
        d = 0.0;
    } else {
        d = (ma.mean - mb.mean) / std::sqrt(pooled_var);
    }
    double se =
        std::sqrt((n1 + n2) / (n1 * n2) + d * d / (2.0 * (n1 + n2)));
    return {d, d - 1.96 * se, d + 1.96 * se};
}

double quantile(std::vector<double> v, double q) {
    if (v.empty()) throw std::invalid_argument("quantile: empty sample");
    if (q < 0 || q > 1) throw std::invalid_argument("quantile: q outside [0,1]");
    std::sort(v.begin(), v.end());
    double h = q * static_cast<double>(v.size() - 1);
    std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= v.size()) return v.back();
    return v[lo] + (h - static_cast<double>(lo)) * (v[lo + 1] - v[lo]);
}

namespace {

std::string stars_for(double p) {
    // The paper's convention, reproduced verbatim (note the inversion of
    // common practice): p<0.0001=*, p<0.001=**, p<0.01=***.
    if (p < 0.0001) return "*";
    if (p < 0.001) return "**";
    if (p < 0.01) return "***";
    return "";
}

std::string effect_class_for(double d) {
    double a = std::abs(d);
    if (a >= 0.8) return "large";
    if (a >= 0.5) return "medium";
    if (a >= 0.2) return "small";
    return "negligible";
}

}  // namespace

std::vector<EffectSizeRow> rank_features(const FeatureMatrix& matrix) {
    FeatureMatrix m = expand_categoricals(matrix);
    std::size_t n_alone = 0, n_others = 0;
    for (Social s : m.labels) (s == Social::alone ? n_alone : n_others)++;
    if (n_alone < 2 || n_others < 2)
        throw std::runtime_error(
            "rank_features: both classes need at least 2 rows");

    std::vector<EffectSizeRow> rows;
    for (std::size_t c = 0; c < m.n_cols(); ++c) {
        std::vector<double> a, b;
        for (std::size_t r = 0; r < m.n_rows(); ++r) {
            double v = m.values[r][c];
            if (is_missing(v)) continue;
            (m.labels[r] == Social::alone ? a : b).push_back(v);
        }
        if (a.size() < 2 || b.size() < 2) continue;

        EffectSizeRow row;
        row.feature = m.catalog[c].name;
        row.group = m.catalog[c].group;
        row.n_alone = a.size();
        row.n_others = b.size();
        try {
            CohensD d = cohens_d(a, b);
            TTestResult t = welch_t(a, b);
            row.cohen_d = d.d;
            row.ci_lo = d.ci_lo;
            row.ci_hi = d.ci_hi;
            row.t_stat = t.t;
            row.p_value = t.p;
        } catch (const std::invalid_argument&) {
            continue;  // degenerate-variance column with unequal means
        }
        row.stars = stars_for(row.p_value);
        row.ci_includes_zero = row.ci_lo <= 0.0 && 0.0 <= row.ci_hi;
        row.effect_class = effect_class_for(row.cohen_d);
        rows.push_back(std::move(row));
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const EffectSizeRow& x, const EffectSizeRow& y) {
                         return std::abs(x.cohen_d) > std::abs(y.cohen_d);
                     });
    return rows;
}

TemporalHistogram temporal_histogram(
    const std::vector<std::pair<int, Social>>& episodes_minute_of_day,
    int bin_minutes) {
    if (bin_minutes <= 0 || 1440 % bin_minutes != 0)
        throw std::invalid_argument("bin_minutes must divide 1440");
    TemporalHistogram h;
    h.bin_minutes = bin_minutes;
    std::size_t bins = static_cast<std::size_t>(1440 / bin_minutes);
    h.alone.assign(bins, 0);
    h.with_others.assign(bins, 0);
    for (const auto& [minute, cls] : episodes_minute_of_day) {
        if (minute < 0 || minute >= 1440)
            throw std::invalid_argument("minute of day outside [0, 1440)");
        std::size_t bin = static_cast<std::size_t>(minute / bin_minutes);
        (cls == Social::alone ? h.alone : h.with_others)[bin] += 1;
    }
    return h;
}

std::vector<DistributionSummary> distribution_summary(
    const FeatureMatrix& matrix, const std::vector<std::string>& feature_names) {
    std::vector<DistributionSummary> out;
    for (const auto& name : feature_names) {
        int c = matrix.column_index(name);
        if (c < 0)
            throw std::runtime_error("distribution_summary: unknown feature '" +
                                     name + "'");
        for (Social cls : {Social::alone, Social::with_others}) {
            DistributionSummary s;
            s.feature = name;
            s.cls = cls;
            for (std::size_t r = 0; r < matrix.n_rows(); ++r) {
                if (matrix.labels[r] != cls) continue;
                double v = matrix.values[r][static_cast<std::size_t>(c)];
                if (!is_missing(v)) s.samples.push_back(v);
            }
            s.n = s.samples.size();
            if (s.n > 0) {
                s.min = quantile(s.samples, 0.0);
                s.q1 = quantile(s.samples, 0.25);
                s.median = quantile(s.samples, 0.5);
                s.q3 = quantile(s.samples, 0.75);
                s.max = quantile(s.samples, 1.0);
                double sum = 0;
                for (double v : s.samples) sum += v;
                s.mean = sum / static_cast<double>(s.n);
                double acc = 0;
                for (double v : s.samples) acc += (v - s.mean) * (v - s.mean);
                s.sd = s.n >= 2
                           ? std::sqrt(acc / static_cast<double>(s.n - 1))
                           : 0.0;
            } else {
                s.min = s.q1 = s.median = s.q3 = s.max = s.mean = s.sd = kMissing;
            }
            out.push_back(std::move(s));
        }
    }
    return out;
}

namespace {

std::string num(double v) {
    if (is_missing(v)) return "";
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

}  // namespace

std::string effect_sizes_to_csv(const std::vector<EffectSizeRow>& rows) {
    std::ostringstream out;
    out << "# star convention (as in the source table): p<0.0001=*, p<0.001=**, "
           "p<0.01=***; ci_includes_zero=x marks a 95% CI containing 0\n";
    out << "feature,group,cohens_d,ci_lo,ci_hi,t_stat,p_value,stars,"
           "ci_includes_zero,effect_class\n";
    for (const auto& r : rows) {
        out << r.feature << "," << to_string(r.group) << "," << num(r.cohen_d)
            << "," << num(r.ci_lo) << "," << num(r.ci_hi) << "," << num(r.t_stat)
            << "," << num(r.p_value) << "," << r.stars << ","
            << (r.ci_includes_zero ? "x" : "") << "," << r.effect_class << "\n";
    }
    return out.str();
}

std::string histogram_to_csv(const TemporalHistogram& h) {
    std::ostringstream out;
    out << "bin_start_minute,alone,with_others\n";
    for (std::size_t i = 0; i < h.alone.size(); ++i)
        out << i * static_cast<std::size_t>(h.bin_minutes) << "," << h.alone[i]
            << "," << h.with_others[i] << "\n";
    return out.str();
}

std::string summaries_to_csv(const std::vector<DistributionSummary>& s) {
    std::ostringstream out;
    out << "feature,class,n,min,q1,median,q3,max,mean,sd\n";
    for (const auto& d : s)
        out << d.feature << "," << to_string(d.cls) << "," << d.n << ","
            << num(d.min) << "," << num(d.q1) << "," << num(d.median) << ","
            << num(d.q3) << "," << num(d.max) << "," << num(d.mean) << ","
            << num(d.sd) << "\n";
    return out.str();
}

std::string summary_samples_to_csv(const std::vector<DistributionSummary>& s) {
    std::ostringstream out;
    out << "feature,class,value\n";
    for (const auto& d : s)
        for (double v : d.samples)
            out << d.feature << "," << to_string(d.cls) << "," << num(v) << "\n";
    return out.str();
}

}  // namespace mealsense
