#include "drt/mle.hpp"

#include "drt/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace drt {

namespace {

constexpr double kMaxCondition = 1e12;

// One evaluation pass over the prefix: log-likelihood, score, and both the
// Newton and Fisher weighting matrices (lower triangles).
struct Pass {
    double loglik = 0.0;
    Eigen::VectorXd score;
    Eigen::MatrixXd newton;  // -d(score)/d(beta), lower triangle
    Eigen::MatrixXd fisher;  // sum of x x' lambda^2 / (Lambda (1-Lambda)), lower triangle
};

class ThresholdFitter {
public:
    ThresholdFitter(const Sample& sample, const std::uint8_t* labels, Eigen::Index prefix_rows,
                    const LinkSpec& link)
        : design_(sample.design), labels_(labels), k_(prefix_rows), link_(link) {}

    // Score and weights at beta. with_matrices=false computes only the
    // log-likelihood (used by the line search).
    void evaluate(const Eigen::VectorXd& beta, Pass& pass, bool with_matrices) const {
        const Eigen::Index p = design_.cols();
        pass.loglik = 0.0;
        if (with_matrices) {
            pass.score.setZero(p);
            pass.newton.setZero(p, p);
            pass.fisher.setZero(p, p);
        }
        for (Eigen::Index i = 0; i < k_; ++i) {
            const auto row = design_.row(i);
            const double a = row.dot(beta);
            const LinkSpec::Eval e = link_.eval_clipped(a);
            const bool z = labels_[i] != 0;
            pass.loglik += z ? std::log(e.cdf) : std::log(e.sf);
            if (!with_matrices) continue;
            const double v = e.cdf * e.sf;
            const double resid = z ? e.sf : -e.cdf;  // z - Lambda
            const double gw = e.pdf * resid / v;
            const double dpdf = link_.pdf_deriv(a);
            const double fw = e.pdf * e.pdf / v;
            // -d/da of the score weight lambda (z - Lambda) / v
            const double nw = (e.pdf * e.pdf - dpdf * resid) / v +
                              e.pdf * e.pdf * resid * (1.0 - 2.0 * e.cdf) / (v * v);
            for (Eigen::Index c = 0; c < p; ++c) {
                const double xc = row[c];
                pass.score[c] += gw * xc;
                for (Eigen::Index d = 0; d <= c; ++d) {
                    pass.newton(c, d) += nw * xc * row[d];
                    pass.fisher(c, d) += fw * xc * row[d];
                }
            }
        }
    }

    FitResult fit(const Eigen::VectorXd& init, const FitOptions& opts) const {
        const Eigen::Index p = design_.cols();
        FitResult result;
        result.beta = init;

        Pass pass;
        Pass probe;
        Eigen::VectorXd candidate(p);
        for (int iter = 0; iter <= opts.max_iter; ++iter) {
            evaluate(result.beta, pass, true);
            result.iterations = iter;
            if (pass.score.lpNorm<Eigen::Infinity>() <= opts.grad_tol) {
                result.status = FitStatus::converged;
                return result;
            }
            if (iter == opts.max_iter) break;

            Eigen::VectorXd direction;
            if (!solve_spd(pass.newton, pass.score, direction)) {
                if (!solve_spd(pass.fisher, pass.score, direction)) {
                    result.status = FitStatus::failed;  // singular information
                    return result;
                }
            }

            // Step halving on likelihood decrease.
            double step = 1.0;
            bool accepted = false;
            for (int h = 0; h <= opts.step_halving_max; ++h) {
                candidate = result.beta + step * direction;
                evaluate(candidate, probe, false);
                if (probe.loglik >= pass.loglik) {
                    result.beta = candidate;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if (!accepted) break;  // stalled; score check above did not pass
        }
        result.status = FitStatus::failed;
        return result;
    }

private:
    // Solves A x = b for a symmetric matrix given by its lower triangle.
    // Rejects indefinite or numerically singular systems (condition estimate
    // from the LDLT diagonal above kMaxCondition).
    static bool solve_spd(const Eigen::MatrixXd& lower, const Eigen::VectorXd& b,
                          Eigen::VectorXd& x) {
        Eigen::LDLT<Eigen::MatrixXd, Eigen::Lower> ldlt(lower.selfadjointView<Eigen::Lower>());
        if (ldlt.info() != Eigen::Success) return false;
        const auto& d = ldlt.vectorD();
        const double dmin = d.minCoeff();
        const double dmax = d.maxCoeff();
        if (!(dmin > 0.0) || dmax / dmin > kMaxCondition) return false;
        x = ldlt.solve(b);
        return x.allFinite();
    }

    const Eigen::MatrixXd& design_;
    const std::uint8_t* labels_;
    Eigen::Index k_;
    const LinkSpec& link_;
};

void compute_labels(const Sample& sample, double y, std::vector<std::uint8_t>& labels) {
    const Eigen::Index n = sample.size();
    labels.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) labels[i] = sample.outcomes[i] <= y ? 1 : 0;
}

Eigen::Index count_ones(const std::vector<std::uint8_t>& labels, Eigen::Index k) {
    Eigen::Index ones = 0;
    for (Eigen::Index i = 0; i < k; ++i) ones += labels[i];
    return ones;
}

FitResult fit_prefix(const Sample& sample, const std::vector<std::uint8_t>& labels,
                     Eigen::Index k, Eigen::Index ones, const LinkSpec& link,
                     const FitOptions& opts, const Eigen::VectorXd* warm) {
    FitResult result;
    if (ones == 0) {
        result.status = FitStatus::all_below;
        return result;
    }
    if (ones == k) {
        result.status = FitStatus::all_above;
        return result;
    }
    Eigen::VectorXd init;
    if (warm != nullptr)
        init = *warm;
    else if (opts.init)
        init = *opts.init;
    else
        init = Eigen::VectorXd::Zero(sample.dim());
    if (init.size() != sample.dim())
        throw std::invalid_argument("fit_at_threshold: init has wrong dimension");
    ThresholdFitter fitter(sample, labels.data(), k, link);
    return fitter.fit(init, opts);
}

void validate_options(const FitOptions& opts) {
    if (opts.max_iter < 1) throw std::invalid_argument("FitOptions: max_iter must be >= 1");
    if (!(opts.grad_tol > 0.0)) throw std::invalid_argument("FitOptions: grad_tol must be > 0");
    if (opts.step_halving_max < 1)
        throw std::invalid_argument("FitOptions: step_halving_max must be >= 1");
}

}  // namespace

FitResult fit_at_threshold(const Sample& sample, Eigen::Index prefix_rows, double y,
                           const LinkSpec& link, const FitOptions& opts) {
    validate_options(opts);
    if (prefix_rows < 1 || prefix_rows > sample.size())
        throw std::invalid_argument("fit_at_threshold: prefix size out of range");
    if (!std::isfinite(y)) throw std::invalid_argument("fit_at_threshold: threshold not finite");
    std::vector<std::uint8_t> labels;
    compute_labels(sample, y, labels);
    return fit_prefix(sample, labels, prefix_rows, count_ones(labels, prefix_rows), link, opts,
                      nullptr);
}

RowFit fit_full_sample_row(const Sample& sample, const EvalGrid& grid, const LinkSpec& link,
                           const FitOptions& opts) {
    validate_options(opts);
    const Eigen::Index n_y = grid.n_y();
    const Eigen::Index n = sample.size();
    RowFit row;
    row.betas.assign(n_y, Eigen::VectorXd());
    row.statuses.assign(n_y, FitStatus::failed);

    std::vector<std::uint8_t> labels;
    const Eigen::Index median = n_y / 2;
    Eigen::VectorXd carry;
    bool have_carry = false;
    auto fit_one = [&](Eigen::Index k) {
        compute_labels(sample, grid.y_nodes()[k], labels);
        FitResult r = fit_prefix(sample, labels, n, count_ones(labels, n), link, opts,
                                 have_carry ? &carry : nullptr);
        row.statuses[k] = r.status;
        if (r.status == FitStatus::converged) {
            row.betas[k] = r.beta;
            carry = r.beta;
            have_carry = true;
        }
    };
    for (Eigen::Index k = median; k < n_y; ++k) fit_one(k);
    have_carry = row.statuses[median] == FitStatus::converged;
    if (have_carry) carry = row.betas[median];
    for (Eigen::Index k = median - 1; k >= 0; --k) fit_one(k);
    return row;
}

CoefficientField fit_field(const Sample& sample, const EvalGrid& grid, const LinkSpec& link,
                           const FitOptions& opts, unsigned workers) {
    validate_options(opts);
    const Eigen::Index n = sample.size();
    const Eigen::Index p = sample.dim();
    const Eigen::Index smallest = static_cast<Eigen::Index>(
        std::floor(n * grid.t_nodes().front()));
    if (smallest < p + 1)
        throw std::invalid_argument(
            "fit_field: smallest prefix floor(n epsilon) must be at least p + 1");

    std::vector<Eigen::Index> prefix_sizes(grid.n_t());
    for (Eigen::Index j = 0; j < grid.n_t(); ++j)
        prefix_sizes[j] = std::min<Eigen::Index>(
            n, static_cast<Eigen::Index>(std::floor(n * grid.t_nodes()[j])));
    prefix_sizes.back() = n;

    CoefficientField field(grid, link, p, prefix_sizes);
    const Eigen::Index n_t = grid.n_t();
    const Eigen::Index n_y = grid.n_y();
    const Eigen::Index top = n_t - 1;

    RowFit row = fit_full_sample_row(sample, grid, link, opts);
    bool any_top_ok = false;
    for (Eigen::Index k = 0; k < n_y; ++k) {
        field.set_cell(top, k, row.betas[k], row.statuses[k]);
        if (row.statuses[k] != FitStatus::failed) any_top_ok = true;
    }
    if (!any_top_ok)
        throw std::runtime_error("fit_field: every full-sample fit failed");

    // Sweep each y-column downward in t, warm-starting from the cell above.
    parallel_for(static_cast<std::size_t>(n_y), workers, [&](std::size_t column) {
        const Eigen::Index k = static_cast<Eigen::Index>(column);
        const FitStatus top_status = field.status(top, k);
        if (top_status == FitStatus::all_below || top_status == FitStatus::all_above) {
            // Prefix labels are subsets of the full-sample labels, so the
            // degeneracy propagates to every smaller prefix.
            for (Eigen::Index j = top - 1; j >= 0; --j) field.copy_cell(top, j, k);
            return;
        }
        std::vector<std::uint8_t> labels;
        compute_labels(sample, grid.y_nodes()[k], labels);
        Eigen::VectorXd carry;
        bool have_carry = top_status == FitStatus::converged;
        if (have_carry) carry = field.beta(top, k);
        Eigen::Index ones = count_ones(labels, n);
        Eigen::Index counted = n;
        for (Eigen::Index j = top - 1; j >= 0; --j) {
            const Eigen::Index k_rows = prefix_sizes[j];
            if (k_rows == prefix_sizes[j + 1]) {
                field.copy_cell(j + 1, j, k);
                continue;
            }
            while (counted > k_rows) ones -= labels[--counted];
            FitResult r = fit_prefix(sample, labels, k_rows, ones, link, opts,
                                     have_carry ? &carry : nullptr);
            field.set_cell(j, k, r.beta, r.status);
            if (r.status == FitStatus::converged) {
                carry = r.beta;
                have_carry = true;
            }
        }
    });

    return field;
}

CdfField cdf_field(const CoefficientField& field, const CovariatePoint& x) {
    if (x.dim() != field.dim())
        throw std::invalid_argument("cdf_field: covariate point has wrong dimension");
    const EvalGrid& grid = field.grid();
    const Eigen::Index n_t = grid.n_t();
    const Eigen::Index n_y = grid.n_y();

    CdfField out;
    out.grid = grid;
    out.point = x;
    out.values.assign(static_cast<std::size_t>(n_t * n_y), 0.0);

    std::vector<Eigen::Index> failed_cols;
    for (Eigen::Index j = 0; j < n_t; ++j) {
        failed_cols.clear();
        bool row_has_converged = false;
        for (Eigen::Index k = 0; k < n_y; ++k) {
            switch (field.status(j, k)) {
                case FitStatus::converged:
                    out.values[j * n_y + k] = field.link().cdf(x.x.dot(field.beta(j, k)));
                    row_has_converged = true;
                    break;
                case FitStatus::all_below:
                    out.values[j * n_y + k] = 0.0;
                    ++out.n_degenerate_cells;
                    break;
                case FitStatus::all_above:
                    out.values[j * n_y + k] = 1.0;
                    ++out.n_degenerate_cells;
                    break;
                case FitStatus::failed:
                    failed_cols.push_back(k);
                    ++out.n_failed_cells;
                    break;
            }
        }
        if (failed_cols.empty()) continue;
        if (!row_has_converged)
            throw std::runtime_error("cdf_field: a fraction row has failed cells and no converged cell");
        // Linear interpolation in y between the nearest converged neighbours;
        // failures at the ends copy the nearest converged value.
        for (Eigen::Index k : failed_cols) {
            Eigen::Index left = -1, right = -1;
            for (Eigen::Index c = k - 1; c >= 0; --c)
                if (field.status(j, c) == FitStatus::converged) { left = c; break; }
            for (Eigen::Index c = k + 1; c < n_y; ++c)
                if (field.status(j, c) == FitStatus::converged) { right = c; break; }
            double value = 0.0;
            if (left >= 0 && right >= 0) {
                const double yl = grid.y_nodes()[left];
                const double yr = grid.y_nodes()[right];
                const double w = (grid.y_nodes()[k] - yl) / (yr - yl);
                value = (1.0 - w) * out.values[j * n_y + left] + w * out.values[j * n_y + right];
            } else if (left >= 0) {
                value = out.values[j * n_y + left];
            } else {
                value = out.values[j * n_y + right];
            }
            out.values[j * n_y + k] = value;
        }
    }
    return out;
}

}  // namespace drt
