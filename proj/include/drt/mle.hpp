#pragma once

#include "drt/model.hpp"

#include <optional>

namespace drt {

struct FitOptions {
    int max_iter = 100;
    double grad_tol = 1e-8;          // max-norm of the score at the optimum
    int step_halving_max = 30;
    std::optional<Eigen::VectorXd> init;  // starting point; zeros if unset
};

struct FitResult {
    Eigen::VectorXd beta;
    FitStatus status = FitStatus::failed;
    int iterations = 0;
};

// Maximum-likelihood fit of the binary regression I{Y <= y} ~ Lambda(x'beta)
// on the first prefix_rows rows of the sample. Newton steps with a
// Fisher-scoring fallback and step halving on likelihood decrease. Labels all
// equal yield the degenerate statuses all_below / all_above.
FitResult fit_at_threshold(const Sample& sample, Eigen::Index prefix_rows, double y,
                           const LinkSpec& link, const FitOptions& opts = {});

// Full-sample (t = 1) sweep over the y-grid, fitting from the median node
// outward with warm starts. Cell k of the returned pair vectors corresponds
// to grid.y_nodes()[k].
struct RowFit {
    std::vector<Eigen::VectorXd> betas;
    std::vector<FitStatus> statuses;
};
RowFit fit_full_sample_row(const Sample& sample, const EvalGrid& grid, const LinkSpec& link,
                           const FitOptions& opts = {});

// Sequential coefficient field beta-hat(t_j, y_k): for every fraction node
// the fit uses the first floor(n t_j) rows in stored order. Warm starts: the
// t = 1 row is fitted median-outward in y, then each y-column is swept
// downward in t starting from its t = 1 solution. Columns are independent
// after the t = 1 sweep, so they may run in parallel; results do not depend
// on the worker count.
CoefficientField fit_field(const Sample& sample, const EvalGrid& grid, const LinkSpec& link,
                           const FitOptions& opts = {}, unsigned workers = 0);

// Lambda(x' beta-hat(t, y)) over the grid. Degenerate cells map to exactly 0
// or 1; failed cells are filled by linear interpolation in y between the
// nearest converged neighbours at the same t (endpoint failures copy the
// nearest converged value).
CdfField cdf_field(const CoefficientField& field, const CovariatePoint& x);

}  // namespace drt
