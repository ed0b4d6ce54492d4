#include "drt/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace drt {

BetaAt beta_at_full_sample(const CoefficientField& field) {
    const Eigen::Index top = field.grid().n_t() - 1;
    return [&field, top](double y) -> Eigen::VectorXd {
        const auto& nodes = field.grid().y_nodes();
        const auto it = std::lower_bound(nodes.begin(), nodes.end(), y - 1e-12);
        if (it == nodes.end() || std::abs(*it - y) > 1e-9)
            throw std::invalid_argument("beta_at_full_sample: y is not a grid node");
        const Eigen::Index k = it - nodes.begin();
        const FitStatus s = field.status(top, k);
        if (s != FitStatus::converged)
            throw std::invalid_argument(std::string("beta_at_full_sample: fit at threshold is ") +
                                        to_string(s));
        return field.beta(top, k);
    };
}

Eigen::MatrixXd estimate_C(const Sample& sample, const BetaAt& beta_at, const LinkSpec& link,
                           double y1, double y2, KernelForm form) {
    const Eigen::VectorXd b1 = beta_at(y1);
    const Eigen::VectorXd b2 = beta_at(y2);
    const Eigen::VectorXd& bmin = (y1 <= y2) ? b1 : b2;
    const Eigen::Index n = sample.size();
    const Eigen::Index p = sample.dim();
    if (b1.size() != p || b2.size() != p)
        throw std::invalid_argument("estimate_C: coefficient dimension mismatch");

    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(p, p);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto row = sample.design.row(i);
        const double a1 = row.dot(b1);
        const double a2 = row.dot(b2);
        const double amin = row.dot(bmin);
        const LinkSpec::Eval e1 = link.eval_clipped(a1);
        const LinkSpec::Eval e2 = link.eval_clipped(a2);
        const double cov_z = link.cdf(amin) - e1.cdf * e2.cdf;  // Cov(I{Y<=y1}, I{Y<=y2})
        // grouped so that swapping (y1, y2) gives bitwise identical products
        double weight;
        if (form == KernelForm::standard) {
            weight = (e1.pdf * e2.pdf) * cov_z / ((e1.cdf * e1.sf) * (e2.cdf * e2.sf));
        } else {
            weight = ((e1.pdf * e1.cdf) * (e2.pdf * e2.cdf)) * cov_z / (e1.sf * e2.sf);
        }
        acc.selfadjointView<Eigen::Lower>().rankUpdate(row.transpose(), weight);
    }
    acc /= static_cast<double>(n);
    return acc.selfadjointView<Eigen::Lower>();
}

double estimate_H(const CovariatePoint& x, const Sample& sample1, const Sample& sample2,
                  const BetaAt& beta1_at, const BetaAt& beta2_at, const LinkSpec& link,
                  double c_hat, double y1, double y2, KernelForm form) {
    if (!(c_hat > 0.0 && c_hat < 1.0))
        throw std::invalid_argument("estimate_H: c_hat must lie in (0, 1)");
    const Eigen::MatrixXd C1 = estimate_C(sample1, beta1_at, link, y1, y2, form);
    const Eigen::MatrixXd C2 = estimate_C(sample2, beta2_at, link, y1, y2, form);
    const double q1 = x.x.dot(C1 * x.x);
    const double q2 = x.x.dot(C2 * x.x);
    double l1, l2;
    if (form == KernelForm::standard) {
        l1 = link.pdf(x.x.dot(beta1_at(y1))) * link.pdf(x.x.dot(beta1_at(y2)));
        l2 = link.pdf(x.x.dot(beta2_at(y1))) * link.pdf(x.x.dot(beta2_at(y2)));
    } else {
        const double d1 = link.pdf(x.x.dot(beta1_at(y1)));
        const double d2 = link.pdf(x.x.dot(beta2_at(y2)));
        l1 = d1 * d1;
        l2 = d2 * d2;
    }
    return l1 * q1 / c_hat + l2 * q2 / (1.0 - c_hat);
}

Tau2Result estimate_tau2(const std::function<double(double)>& delta_at,
                         const std::function<double(double, double)>& H_at,
                         const EvalGrid& grid) {
    const auto& y = grid.y_nodes();
    const std::size_t m = y.size();
    std::vector<double> delta(m), weight(m, 1.0);
    for (std::size_t k = 0; k < m; ++k) delta[k] = delta_at(y[k]);
    if (grid.is_interval()) {
        const double dx = (grid.y_hi() - grid.y_lo()) / (static_cast<double>(m) - 1.0);
        for (std::size_t k = 0; k < m; ++k) weight[k] = dx;
        weight.front() *= 0.5;
        weight.back() *= 0.5;
    }
    double acc = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        // symmetry of H: off-diagonal pairs counted twice
        acc += weight[k] * weight[k] * delta[k] * delta[k] * H_at(y[k], y[k]);
        for (std::size_t l = k + 1; l < m; ++l)
            acc += 2.0 * weight[k] * weight[l] * delta[k] * delta[l] * H_at(y[k], y[l]);
    }
    Tau2Result result;
    result.value = 4.0 * acc;
    if (result.value < 0.0) {
        result.value = 0.0;
        result.clamped = true;
    }
    return result;
}

KernelEstimate build_kernel_estimate(const Sample& sample1, const Sample& sample2,
                                     const CoefficientField& field1,
                                     const CoefficientField& field2, const CovariatePoint& x,
                                     const std::vector<double>& y_values,
                                     const std::function<double(double)>& delta_at,
                                     const EvalGrid& tau_grid) {
    KernelEstimate est;
    est.c_hat = static_cast<double>(sample1.size()) /
                static_cast<double>(sample1.size() + sample2.size());
    const BetaAt b1 = beta_at_full_sample(field1);
    const BetaAt b2 = beta_at_full_sample(field2);
    const LinkSpec& link = field1.link();
    for (double y1 : y_values) {
        for (double y2 : y_values) {
            if (y2 < y1) continue;
            est.y_pairs.emplace_back(y1, y2);
            est.C1.push_back(estimate_C(sample1, b1, link, y1, y2));
            est.C2.push_back(estimate_C(sample2, b2, link, y1, y2));
            est.H.push_back(estimate_H(x, sample1, sample2, b1, b2, link, est.c_hat, y1, y2));
        }
    }
    const auto H_at = [&](double y1, double y2) {
        return estimate_H(x, sample1, sample2, b1, b2, link, est.c_hat, y1, y2);
    };
    const Tau2Result tau = estimate_tau2(delta_at, H_at, tau_grid);
    est.tau2 = tau.value;
    est.tau2_clamped = tau.clamped;
    return est;
}

}  // namespace drt
