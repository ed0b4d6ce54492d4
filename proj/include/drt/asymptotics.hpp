#pragma once

#include "drt/model.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace drt {

// Plug-in estimators of the limiting covariance objects. These are
// diagnostics: the test itself never consumes them.

using BetaAt = std::function<Eigen::VectorXd(double)>;

// Full-sample coefficient lookup backed by a fitted field; throws on y values
// off the grid and on degenerate/failed cells.
BetaAt beta_at_full_sample(const CoefficientField& field);

// `standard` is the score-covariance kernel (the one that reduces to the
// information matrix on the diagonal). `paper_literal` keeps the displayed
// Lambda products for comparison; it does not reproduce the information
// matrix at y1 == y2.
enum class KernelForm { standard, paper_literal };

// Empirical covariance kernel of the per-observation scores between
// thresholds y1 and y2.
Eigen::MatrixXd estimate_C(const Sample& sample, const BetaAt& beta_at, const LinkSpec& link,
                           double y1, double y2, KernelForm form = KernelForm::standard);

// Scalar kernel of the limiting difference process at the covariate point x:
//   H(y1,y2) = (1/c)   lam1(y1) lam1(y2) x'C1(y1,y2)x
//            + (1/(1-c)) lam2(y1) lam2(y2) x'C2(y1,y2)x
// with lam_l(y) = lambda(x' beta_l(y)). paper_literal squares the density at
// a single threshold per group instead (asymmetric).
double estimate_H(const CovariatePoint& x, const Sample& sample1, const Sample& sample2,
                  const BetaAt& beta1_at, const BetaAt& beta2_at, const LinkSpec& link,
                  double c_hat, double y1, double y2, KernelForm form = KernelForm::standard);

struct Tau2Result {
    double value = 0.0;
    bool clamped = false;  // negative round-off clamped to zero
};

// tau^2 = 4 double-integral of Delta(y1) Delta(y2) H(y1,y2) over I x I,
// double trapezoid on interval grids, double sum on finite ones.
Tau2Result estimate_tau2(const std::function<double(double)>& delta_at,
                         const std::function<double(double, double)>& H_at,
                         const EvalGrid& grid);

struct KernelEstimate {
    std::vector<std::pair<double, double>> y_pairs;
    std::vector<Eigen::MatrixXd> C1;
    std::vector<Eigen::MatrixXd> C2;
    std::vector<double> H;
    double c_hat = 0.0;   // n1 / (n1 + n2)
    double tau2 = 0.0;
    bool tau2_clamped = false;
};

// Evaluates the kernels on all pairs of the given y values and integrates
// tau^2 over the full grid. delta_at must return Delta-hat(1, y | x).
KernelEstimate build_kernel_estimate(const Sample& sample1, const Sample& sample2,
                                     const CoefficientField& field1,
                                     const CoefficientField& field2, const CovariatePoint& x,
                                     const std::vector<double>& y_values,
                                     const std::function<double(double)>& delta_at,
                                     const EvalGrid& tau_grid);

}  // namespace drt
