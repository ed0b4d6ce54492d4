#pragma once

#include "drt/limit_sim.hpp"
#include "drt/model.hpp"

#include <functional>

namespace drt {

// Difference of two sequential conditional-CDF estimates on a shared grid.
struct DeltaField {
    EvalGrid grid;
    CovariatePoint point;
    std::vector<double> values;  // n_t * n_y, row-major in (t, y)
    Eigen::Index n_failed_cells = 0;      // summed over both input fields
    Eigen::Index n_degenerate_cells = 0;

    double at(Eigen::Index j, Eigen::Index k) const { return values[j * grid.n_y() + k]; }
};

DeltaField delta_field(const CdfField& f1, const CdfField& f2);

// T = integral over I of Delta-hat^2(1, y) dy.
double t_statistic(const DeltaField& d);

// V = sqrt( integral_eps^1 { inner(t) - inner(1) }^2 dt ) with
// inner(t) = integral over I of Delta-hat^2(t, y) dy.
double v_statistic(const DeltaField& d);

struct TestDiagnostics {
    Eigen::Index n_failed_cells = 0;
    Eigen::Index n_degenerate_cells = 0;
    Eigen::Index n_t = 0;
    Eigen::Index n_y = 0;
    double epsilon = 0.0;
    bool finite_outcome_set = false;
    double y_lo = 0.0;
    double y_hi = 0.0;
};

struct TestReport {
    double t_stat = 0.0;
    double v_stat = 0.0;
    double delta = 0.0;      // threshold in distance units
    double delta_sq = 0.0;
    double alpha = 0.0;
    double quantile = 0.0;   // q_{1-alpha}
    bool reject = false;
    double p_value = 1.0;
    double delta_hat_alpha = 0.0;  // smallest non-rejected threshold
    double ci_lower = 0.0;         // == delta_hat_alpha (one-sided interval)
    TestDiagnostics diagnostics;
};

// Decision arithmetic given precomputed statistics: reject iff
// T > Delta^2 + q_{1-alpha} V; p-value is the fraction of W samples strictly
// greater than (T - Delta^2)/V; V = 0 degenerates to the plain comparison
// T > Delta^2 (p-value 0 or 1).
TestReport make_report(double t_stat, double v_stat, double delta, double alpha,
                       double q, const std::function<double(double)>& p_of_x,
                       const TestDiagnostics& diagnostics = {});

// Full test on a difference field. wq must have been simulated with the same
// epsilon as the field's grid.
TestReport run_test(const DeltaField& d, double delta, double alpha, const WSampleSet& wq);

}  // namespace drt
