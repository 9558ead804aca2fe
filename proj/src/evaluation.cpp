#include "lvse/evaluation.hpp"

#include <algorithm>
#include <cmath>

namespace lvse {

double voltage_quality(double v_est, double v_pf) {
    if (v_pf <= 0.0) throw ValidationError("voltage quality: reference magnitude must be positive");
    return (std::abs(v_est) - std::abs(v_pf)) / std::abs(v_pf);
}

double loading_quality(double i_est, double i_pf, double i_th_max) {
    if (i_th_max <= 0.0)
        throw ValidationError("loading quality: thermal current limit must be positive");
    return (std::abs(i_est) - std::abs(i_pf)) / i_th_max;
}

double pooled_quantile(const std::vector<double>& samples, double q) {
    if (samples.empty()) throw ValidationError("quantile of empty sample set");
    if (q <= 0.0 || q >= 1.0) throw ValidationError("quantile level must be in (0, 1)");
    std::vector<double> abs_values;
    abs_values.reserve(samples.size());
    for (double s : samples) abs_values.push_back(std::abs(s));
    std::sort(abs_values.begin(), abs_values.end());
    // nearest rank: 1-based index ceil(q * n)
    std::size_t rank = static_cast<std::size_t>(
        std::ceil(q * static_cast<double>(abs_values.size())));
    rank = std::max<std::size_t>(rank, 1);
    return abs_values[rank - 1];
}

QualityReport assess(const std::vector<QualitySample>& voltage_samples,
                     const std::vector<QualitySample>& loading_samples,
                     const UseCaseThresholds& thresholds) {
    if (voltage_samples.empty() || loading_samples.empty())
        throw ValidationError("assessment needs both voltage and loading samples");

    std::vector<double> v, l;
    v.reserve(voltage_samples.size());
    l.reserve(loading_samples.size());
    for (const auto& s : voltage_samples) v.push_back(s.value);
    for (const auto& s : loading_samples) l.push_back(s.value);

    QualityReport report;
    report.voltage_q99 = pooled_quantile(v, 0.99);
    report.loading_q95 = pooled_quantile(l, 0.95);
    report.voltage_sample_count = v.size();
    report.loading_sample_count = l.size();

    auto judge = [&](const UseCaseLimits& limits) {
        UseCaseVerdict verdict;
        verdict.voltage_limit = limits.voltage_limit;
        verdict.loading_limit = limits.loading_limit;
        verdict.pass = report.voltage_q99 <= limits.voltage_limit &&
                       report.loading_q95 <= limits.loading_limit;
        return verdict;
    };
    report.use_cases["grid_planning"] = judge(thresholds.grid_planning);
    report.use_cases["connection_request"] = judge(thresholds.connection_request);
    report.use_cases["monitoring_active_mgmt"] = judge(thresholds.monitoring_active_mgmt);
    return report;
}

} // namespace lvse
