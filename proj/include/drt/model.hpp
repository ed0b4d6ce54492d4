#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace drt {

// Lambda values are clipped to [kProbClip, 1 - kProbClip] inside likelihood
// code so that logs stay finite; reported CDF values are never clipped.
inline constexpr double kProbClip = 1e-12;

// ---------------------------------------------------------------------------
// Link functions
// ---------------------------------------------------------------------------

enum class LinkKind : std::uint8_t { standard_normal, logistic_unit, normal_scaled };

const char* to_string(LinkKind kind);

// A known CDF Lambda with density lambda, mapping the linear predictor to a
// probability. normal_scaled(sigma2) is the N(0, sigma2) distribution
// function, used when the error variance of a generating model is known.
class LinkSpec {
public:
    static LinkSpec standard_normal();
    static LinkSpec logistic_unit();
    static LinkSpec normal_scaled(double sigma2);

    LinkKind kind() const { return kind_; }
    double sigma2() const { return sigma_ * sigma_; }

    double cdf(double a) const;  // Lambda(a), unclipped
    double sf(double a) const;   // 1 - Lambda(a), computed on the stable side
    double pdf(double a) const;  // lambda(a)
    double pdf_deriv(double a) const;  // lambda'(a)

    struct Eval {
        double cdf;  // clipped to [kProbClip, 1 - kProbClip]
        double sf;   // clipped likewise
        double pdf;
    };
    // Likelihood-side evaluation: cdf/sf clipped away from {0, 1}.
    Eval eval_clipped(double a) const;

    bool operator==(const LinkSpec& other) const = default;

private:
    LinkSpec(LinkKind kind, double sigma) : kind_(kind), sigma_(sigma) {}

    LinkKind kind_;
    double sigma_;  // 1 except for normal_scaled
};

// ---------------------------------------------------------------------------
// Samples and covariate points
// ---------------------------------------------------------------------------

// One group's observations: outcome vector and design matrix whose i-th row
// is X_i' (by convention the first column is the constant 1 unless the caller
// builds the design otherwise). Row order is meaningful: prefix estimators
// use the first k rows as stored.
struct Sample {
    Eigen::VectorXd outcomes;
    Eigen::MatrixXd design;
    std::string group_label;

    Sample(Eigen::VectorXd y, Eigen::MatrixXd x, std::string label = {});

    Eigen::Index size() const { return outcomes.size(); }
    Eigen::Index dim() const { return design.cols(); }
};

struct CovariatePoint {
    Eigen::VectorXd x;

    explicit CovariatePoint(Eigen::VectorXd v);
    CovariatePoint() = default;

    Eigen::Index dim() const { return x.size(); }
    bool operator==(const CovariatePoint& other) const { return x == other.x; }
};

// ---------------------------------------------------------------------------
// Evaluation grid
// ---------------------------------------------------------------------------

// Discretization of the outcome set I and the fraction interval [epsilon, 1].
// I is either a compact interval (equally spaced nodes, trapezoid weights) or
// a finite set (counting measure, plain sums). Fraction nodes are
// t_j = epsilon + j (1 - epsilon)/(n_t - 1); the last node is exactly 1.
class EvalGrid {
public:
    static EvalGrid interval(double y_lo, double y_hi, int n_y, double epsilon, int n_t);
    static EvalGrid finite(std::vector<double> y_values, double epsilon, int n_t);

    bool is_interval() const { return interval_; }
    double y_lo() const { return y_lo_; }
    double y_hi() const { return y_hi_; }
    double epsilon() const { return epsilon_; }
    Eigen::Index n_y() const { return static_cast<Eigen::Index>(y_nodes_.size()); }
    Eigen::Index n_t() const { return static_cast<Eigen::Index>(t_nodes_.size()); }
    const std::vector<double>& y_nodes() const { return y_nodes_; }
    const std::vector<double>& t_nodes() const { return t_nodes_; }

    // Integral over I: composite trapezoid in the interval case, plain sum in
    // the finite (counting-measure) case. values must have n_y entries.
    double integrate_y(std::span<const double> values) const;
    // Composite trapezoid over [epsilon, 1] on the t-grid.
    double integrate_t(std::span<const double> values) const;

    bool operator==(const EvalGrid& other) const = default;

private:
    EvalGrid() = default;

    bool interval_ = true;
    double y_lo_ = 0.0, y_hi_ = 0.0;
    double epsilon_ = 0.0;
    std::vector<double> y_nodes_;
    std::vector<double> t_nodes_;
};

// ---------------------------------------------------------------------------
// Fitted fields
// ---------------------------------------------------------------------------

enum class FitStatus : std::uint8_t { converged, all_below, all_above, failed };

const char* to_string(FitStatus status);

// beta-hat(t_j, y_k) over the grid with per-cell fit status. Cells flagged
// all_below / all_above have every prefix label 0 resp. 1; their coefficient
// values are unused.
class CoefficientField {
public:
    CoefficientField(EvalGrid grid, LinkSpec link, Eigen::Index dim,
                     std::vector<Eigen::Index> prefix_sizes);

    const EvalGrid& grid() const { return grid_; }
    const LinkSpec& link() const { return link_; }
    Eigen::Index dim() const { return dim_; }
    const std::vector<Eigen::Index>& prefix_sizes() const { return prefix_sizes_; }

    Eigen::Map<const Eigen::VectorXd> beta(Eigen::Index j, Eigen::Index k) const {
        return {values_.data() + (j * grid_.n_y() + k) * dim_, dim_};
    }
    FitStatus status(Eigen::Index j, Eigen::Index k) const {
        return status_[j * grid_.n_y() + k];
    }

    void set_cell(Eigen::Index j, Eigen::Index k, const Eigen::VectorXd& beta, FitStatus status);
    void copy_cell(Eigen::Index from_j, Eigen::Index j, Eigen::Index k);

    Eigen::Index count(FitStatus status) const;

private:
    EvalGrid grid_;
    LinkSpec link_;
    Eigen::Index dim_;
    std::vector<Eigen::Index> prefix_sizes_;   // floor(n t_j) per fraction node
    std::vector<double> values_;               // n_t * n_y * dim
    std::vector<FitStatus> status_;            // n_t * n_y
};

// F-hat(t, y | x) = Lambda(x' beta-hat(t, y)) on the grid; degenerate cells
// are 0 (all_below) or 1 (all_above), failed cells are interpolated.
struct CdfField {
    EvalGrid grid;
    CovariatePoint point;
    std::vector<double> values;  // n_t * n_y, row-major in (t, y)
    Eigen::Index n_failed_cells = 0;
    Eigen::Index n_degenerate_cells = 0;

    double at(Eigen::Index j, Eigen::Index k) const { return values[j * grid.n_y() + k]; }
};

}  // namespace drt
