#ifndef LVSE_EVALUATION_HPP
#define LVSE_EVALUATION_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lvse/common.hpp"

namespace lvse {

enum class QualityKind { voltage, line_loading };

// One estimation-quality sample: signed relative deviation of an estimate
// from the power-flow truth for one element at one timestep.
struct QualitySample {
    std::string element;
    std::size_t timestep = 0;
    QualityKind kind = QualityKind::voltage;
    double value = 0.0;
};

// (|V_est| - |V_pf|) / |V_pf|
double voltage_quality(double v_est, double v_pf);

// (|I_est| - |I_pf|) / I_th_max : the share of line loading lost to the
// estimation error.
double loading_quality(double i_est, double i_pf, double i_th_max);

// Empirical quantile of the absolute sample values, nearest-rank definition
// (1-based index ceil(q * n) on the ascending sort). Throws on empty input.
double pooled_quantile(const std::vector<double>& samples, double q);

struct UseCaseLimits {
    double voltage_limit = 0.0; // fraction, symmetric band
    double loading_limit = 0.0;
};

// Estimation-quality requirements per grid-operator use case.
struct UseCaseThresholds {
    UseCaseLimits grid_planning{0.02, 0.10};
    UseCaseLimits connection_request{0.015, 0.05};
    UseCaseLimits monitoring_active_mgmt{0.01, 0.05};
};

struct UseCaseVerdict {
    bool pass = false;
    double voltage_limit = 0.0;
    double loading_limit = 0.0;
};

struct QualityReport {
    std::string grid_name;
    std::string variant_id;
    double voltage_q99 = 0.0; // 99% quantile of |voltage samples|
    double loading_q95 = 0.0; // 95% quantile of |loading samples|
    std::size_t voltage_sample_count = 0;
    std::size_t loading_sample_count = 0;
    std::map<std::string, UseCaseVerdict> use_cases;
    std::uint64_t master_seed = 0;
    std::size_t t_begin = 0;
    std::size_t t_end = 0;
    std::string config_fingerprint;
    // echo of the variant configuration, for reproducibility
    std::map<std::string, std::string> config_echo;
    // diagnostics
    int se_nonconverged_steps = 0;
    double se_max_objective = 0.0;
    int pf_max_iterations = 0;
};

// Pools the samples, takes the quantiles and judges each use case: pass iff
// q99(voltage) <= voltage limit and q95(loading) <= loading limit.
QualityReport assess(const std::vector<QualitySample>& voltage_samples,
                     const std::vector<QualitySample>& loading_samples,
                     const UseCaseThresholds& thresholds = {});

} // namespace lvse

#endif
