#include "drt/sn_test.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace drt {

DeltaField delta_field(const CdfField& f1, const CdfField& f2) {
    if (!(f1.grid == f2.grid))
        throw std::invalid_argument("delta_field: fields use different grids");
    if (!(f1.point == f2.point))
        throw std::invalid_argument("delta_field: fields use different covariate points");
    DeltaField d;
    d.grid = f1.grid;
    d.point = f1.point;
    d.values.resize(f1.values.size());
    for (std::size_t i = 0; i < d.values.size(); ++i) d.values[i] = f1.values[i] - f2.values[i];
    d.n_failed_cells = f1.n_failed_cells + f2.n_failed_cells;
    d.n_degenerate_cells = f1.n_degenerate_cells + f2.n_degenerate_cells;
    return d;
}

namespace {

double inner_integral(const DeltaField& d, Eigen::Index j, std::vector<double>& scratch) {
    const Eigen::Index n_y = d.grid.n_y();
    scratch.resize(static_cast<std::size_t>(n_y));
    for (Eigen::Index k = 0; k < n_y; ++k) {
        const double v = d.at(j, k);
        scratch[static_cast<std::size_t>(k)] = v * v;
    }
    return d.grid.integrate_y(scratch);
}

}  // namespace

double t_statistic(const DeltaField& d) {
    std::vector<double> scratch;
    return inner_integral(d, d.grid.n_t() - 1, scratch);
}

double v_statistic(const DeltaField& d) {
    const Eigen::Index n_t = d.grid.n_t();
    std::vector<double> scratch;
    std::vector<double> dev(static_cast<std::size_t>(n_t));
    const double at_one = inner_integral(d, n_t - 1, scratch);
    for (Eigen::Index j = 0; j < n_t; ++j) {
        const double diff = inner_integral(d, j, scratch) - at_one;
        dev[static_cast<std::size_t>(j)] = diff * diff;
    }
    return std::sqrt(d.grid.integrate_t(dev));
}

TestReport make_report(double t_stat, double v_stat, double delta, double alpha,
                       double q, const std::function<double(double)>& p_of_x,
                       const TestDiagnostics& diagnostics) {
    if (!(delta >= 0.0)) throw std::invalid_argument("make_report: delta must be >= 0");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("make_report: alpha must lie in (0, 1)");
    TestReport r;
    r.t_stat = t_stat;
    r.v_stat = v_stat;
    r.delta = delta;
    r.delta_sq = delta * delta;
    r.alpha = alpha;
    r.quantile = q;
    r.diagnostics = diagnostics;
    if (v_stat == 0.0) {
        r.reject = t_stat > r.delta_sq;
        r.p_value = r.reject ? 0.0 : 1.0;
    } else {
        r.reject = t_stat > r.delta_sq + q * v_stat;
        r.p_value = p_of_x((t_stat - r.delta_sq) / v_stat);
    }
    r.delta_hat_alpha = std::sqrt(std::max(t_stat - q * v_stat, 0.0));
    r.ci_lower = r.delta_hat_alpha;
    return r;
}

TestReport run_test(const DeltaField& d, double delta, double alpha, const WSampleSet& wq) {
    if (wq.epsilon != d.grid.epsilon())
        throw std::invalid_argument("run_test: W samples were simulated with a different epsilon");
    TestDiagnostics diag;
    diag.n_failed_cells = d.n_failed_cells;
    diag.n_degenerate_cells = d.n_degenerate_cells;
    diag.n_t = d.grid.n_t();
    diag.n_y = d.grid.n_y();
    diag.epsilon = d.grid.epsilon();
    diag.finite_outcome_set = !d.grid.is_interval();
    diag.y_lo = d.grid.y_lo();
    diag.y_hi = d.grid.y_hi();
    const double q = quantile(wq, 1.0 - alpha);
    return make_report(t_statistic(d), v_statistic(d), delta, alpha, q,
                       [&wq](double x) { return p_value(wq, x); }, diag);
}

}  // namespace drt
