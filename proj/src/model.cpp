#include "drt/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace drt {

namespace {

constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;

double normal_cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }
double normal_sf(double z) { return 0.5 * std::erfc(z * kInvSqrt2); }
double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

double logistic_cdf(double a) {
    if (a >= 0.0) return 1.0 / (1.0 + std::exp(-a));
    const double e = std::exp(a);
    return e / (1.0 + e);
}

double logistic_pdf(double a) {
    const double e = std::exp(-std::abs(a));
    const double d = 1.0 + e;
    return e / (d * d);
}

}  // namespace

const char* to_string(LinkKind kind) {
    switch (kind) {
        case LinkKind::standard_normal: return "standard_normal";
        case LinkKind::logistic_unit: return "logistic_unit";
        case LinkKind::normal_scaled: return "normal_scaled";
    }
    return "?";
}

LinkSpec LinkSpec::standard_normal() { return {LinkKind::standard_normal, 1.0}; }

LinkSpec LinkSpec::logistic_unit() { return {LinkKind::logistic_unit, 1.0}; }

LinkSpec LinkSpec::normal_scaled(double sigma2) {
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
        throw std::invalid_argument("LinkSpec: normal_scaled requires sigma2 > 0");
    return {LinkKind::normal_scaled, std::sqrt(sigma2)};
}

double LinkSpec::cdf(double a) const {
    if (kind_ == LinkKind::logistic_unit) return logistic_cdf(a);
    return normal_cdf(a / sigma_);
}

double LinkSpec::sf(double a) const {
    if (kind_ == LinkKind::logistic_unit) return logistic_cdf(-a);
    return normal_sf(a / sigma_);
}

double LinkSpec::pdf(double a) const {
    if (kind_ == LinkKind::logistic_unit) return logistic_pdf(a);
    return normal_pdf(a / sigma_) / sigma_;
}

double LinkSpec::pdf_deriv(double a) const {
    if (kind_ == LinkKind::logistic_unit) {
        // lambda' = lambda (1 - 2 Lambda)
        return logistic_pdf(a) * (1.0 - 2.0 * logistic_cdf(a));
    }
    const double z = a / sigma_;
    return -z * normal_pdf(z) / (sigma_ * sigma_);
}

LinkSpec::Eval LinkSpec::eval_clipped(double a) const {
    Eval e{cdf(a), sf(a), pdf(a)};
    e.cdf = std::clamp(e.cdf, kProbClip, 1.0 - kProbClip);
    e.sf = std::clamp(e.sf, kProbClip, 1.0 - kProbClip);
    return e;
}

Sample::Sample(Eigen::VectorXd y, Eigen::MatrixXd x, std::string label)
    : outcomes(std::move(y)), design(std::move(x)), group_label(std::move(label)) {
    if (outcomes.size() < 1) throw std::invalid_argument("Sample: need at least one observation");
    if (design.cols() < 1) throw std::invalid_argument("Sample: need at least one regressor");
    if (design.rows() != outcomes.size())
        throw std::invalid_argument("Sample: design row count must match outcome length");
    if (!outcomes.allFinite()) throw std::invalid_argument("Sample: non-finite outcome");
    if (!design.allFinite()) throw std::invalid_argument("Sample: non-finite design entry");
}

CovariatePoint::CovariatePoint(Eigen::VectorXd v) : x(std::move(v)) {
    if (x.size() < 1) throw std::invalid_argument("CovariatePoint: empty");
    if (!x.allFinite()) throw std::invalid_argument("CovariatePoint: non-finite entry");
}

namespace {

std::vector<double> make_t_nodes(double epsilon, int n_t) {
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::invalid_argument("EvalGrid: epsilon must lie in (0, 1)");
    if (n_t < 2) throw std::invalid_argument("EvalGrid: n_t must be at least 2");
    std::vector<double> t(n_t);
    const double step = (1.0 - epsilon) / (n_t - 1);
    for (int j = 0; j < n_t; ++j) t[j] = epsilon + j * step;
    t.back() = 1.0;
    return t;
}

}  // namespace

EvalGrid EvalGrid::interval(double y_lo, double y_hi, int n_y, double epsilon, int n_t) {
    if (!(y_lo < y_hi)) throw std::invalid_argument("EvalGrid: y_lo must be below y_hi");
    if (n_y < 2) throw std::invalid_argument("EvalGrid: n_y must be at least 2");
    EvalGrid g;
    g.interval_ = true;
    g.y_lo_ = y_lo;
    g.y_hi_ = y_hi;
    g.epsilon_ = epsilon;
    g.y_nodes_.resize(n_y);
    const double step = (y_hi - y_lo) / (n_y - 1);
    for (int k = 0; k < n_y; ++k) g.y_nodes_[k] = y_lo + k * step;
    g.y_nodes_.back() = y_hi;
    g.t_nodes_ = make_t_nodes(epsilon, n_t);
    return g;
}

EvalGrid EvalGrid::finite(std::vector<double> y_values, double epsilon, int n_t) {
    if (y_values.empty()) throw std::invalid_argument("EvalGrid: empty finite outcome set");
    std::sort(y_values.begin(), y_values.end());
    for (std::size_t k = 0; k + 1 < y_values.size(); ++k)
        if (!(y_values[k] < y_values[k + 1]))
            throw std::invalid_argument("EvalGrid: finite outcome values must be distinct");
    for (double v : y_values)
        if (!std::isfinite(v)) throw std::invalid_argument("EvalGrid: non-finite outcome value");
    EvalGrid g;
    g.interval_ = false;
    g.y_lo_ = y_values.front();
    g.y_hi_ = y_values.back();
    g.epsilon_ = epsilon;
    g.y_nodes_ = std::move(y_values);
    g.t_nodes_ = make_t_nodes(epsilon, n_t);
    return g;
}

double EvalGrid::integrate_y(std::span<const double> values) const {
    if (values.size() != y_nodes_.size())
        throw std::invalid_argument("EvalGrid: integrand size mismatch");
    if (!interval_) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const double dx = (y_hi_ - y_lo_) / (static_cast<double>(y_nodes_.size()) - 1.0);
    double s = 0.5 * (values.front() + values.back());
    for (std::size_t k = 1; k + 1 < values.size(); ++k) s += values[k];
    return s * dx;
}

double EvalGrid::integrate_t(std::span<const double> values) const {
    if (values.size() != t_nodes_.size())
        throw std::invalid_argument("EvalGrid: integrand size mismatch");
    const double dt = (1.0 - epsilon_) / (static_cast<double>(t_nodes_.size()) - 1.0);
    double s = 0.5 * (values.front() + values.back());
    for (std::size_t j = 1; j + 1 < values.size(); ++j) s += values[j];
    return s * dt;
}

const char* to_string(FitStatus status) {
    switch (status) {
        case FitStatus::converged: return "converged";
        case FitStatus::all_below: return "all_below";
        case FitStatus::all_above: return "all_above";
        case FitStatus::failed: return "failed";
    }
    return "?";
}

CoefficientField::CoefficientField(EvalGrid grid, LinkSpec link, Eigen::Index dim,
                                   std::vector<Eigen::Index> prefix_sizes)
    : grid_(std::move(grid)),
      link_(link),
      dim_(dim),
      prefix_sizes_(std::move(prefix_sizes)) {
    if (dim_ < 1) throw std::invalid_argument("CoefficientField: dim must be positive");
    if (static_cast<Eigen::Index>(prefix_sizes_.size()) != grid_.n_t())
        throw std::invalid_argument("CoefficientField: one prefix size per fraction node");
    values_.assign(static_cast<std::size_t>(grid_.n_t() * grid_.n_y() * dim_), 0.0);
    status_.assign(static_cast<std::size_t>(grid_.n_t() * grid_.n_y()), FitStatus::failed);
}

void CoefficientField::set_cell(Eigen::Index j, Eigen::Index k, const Eigen::VectorXd& beta,
                                FitStatus status) {
    status_[j * grid_.n_y() + k] = status;
    if (beta.size() == dim_)
        Eigen::Map<Eigen::VectorXd>(values_.data() + (j * grid_.n_y() + k) * dim_, dim_) = beta;
}

void CoefficientField::copy_cell(Eigen::Index from_j, Eigen::Index j, Eigen::Index k) {
    const auto src = (from_j * grid_.n_y() + k) * dim_;
    const auto dst = (j * grid_.n_y() + k) * dim_;
    std::copy_n(values_.begin() + src, dim_, values_.begin() + dst);
    status_[j * grid_.n_y() + k] = status_[from_j * grid_.n_y() + k];
}

Eigen::Index CoefficientField::count(FitStatus status) const {
    return static_cast<Eigen::Index>(std::count(status_.begin(), status_.end(), status));
}

}  // namespace drt
