#pragma once

#include <string>
#include <vector>

#include "mealsense/matrix.hpp"

namespace mealsense {

struct TTestResult {
    double t = 0;
    double df = 0;
    double p = 1;
};

struct CohensD {
    double d = 0;
    double ci_lo = 0;
    double ci_hi = 0;
};

struct EffectSizeRow {
    std::string feature;
    FeatureGroup group = FeatureGroup::T;
    double cohen_d = 0;
    double ci_lo = 0, ci_hi = 0;
    double t_stat = 0;
    double p_value = 1;
    std::size_t n_alone = 0, n_others = 0;
    std::string stars;          // paper convention: p<0.0001=*, p<0.001=**, p<0.01=***
    bool ci_includes_zero = false;
    std::string effect_class;   // negligible | small | medium | large
};

struct TemporalHistogram {
    int bin_minutes = 60;
    std::vector<std::size_t> alone;
    std::vector<std::size_t> with_others;
};

struct DistributionSummary {
    std::string feature;
    Social cls = Social::alone;
    std::size_t n = 0;
    double min = 0, q1 = 0, median = 0, q3 = 0, max = 0, mean = 0, sd = 0;
    std::vector<double> samples;
};

// Regularized incomplete beta I_x(a, b), continued-fraction expansion
// (tolerance 1e-12, 300 iterations).
double incomplete_beta(double a, double b, double x);

// Two-sided tail probability of Student's t with df degrees of freedom.
double student_t_two_sided_p(double t, double df);

// Welch unequal-variance t-test with Welch-Satterthwaite df.
TTestResult welch_t(const std::vector<double>& a, const std::vector<double>& b);

// Pooled-SD Cohen's d with normal-approximation 95% CI.
CohensD cohens_d(const std::vector<double>& a, const std::vector<double>& b);

// Linear-interpolation (type-7) quantile; q in [0, 1]; v need not be sorted.
double quantile(std::vector<double> v, double q);

// Table 1 analog: one row per numeric feature (categoricals one-hot expanded),
// sorted by |d| descending. Missing values excluded per feature.
std::vector<EffectSizeRow> rank_features(const FeatureMatrix& matrix);

TemporalHistogram temporal_histogram(
    const std::vector<std::pair<int, Social>>& episodes_minute_of_day,
    int bin_minutes);

std::vector<DistributionSummary> distribution_summary(
    const FeatureMatrix& matrix, const std::vector<std::string>& feature_names);

std::string effect_sizes_to_csv(const std::vector<EffectSizeRow>& rows);
std::string histogram_to_csv(const TemporalHistogram& h);
std::string summaries_to_csv(const std::vector<DistributionSummary>& s);
std::string summary_samples_to_csv(const std::vector<DistributionSummary>& s);

}  // namespace mealsense
