#pragma once

#include "drt/limit_sim.hpp"
#include "drt/mle.hpp"
#include "drt/model.hpp"
#include "drt/sn_test.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <utility>

namespace drt {

enum class ScenarioId : std::uint8_t { scen1, scen2a, scen2b, scen1_mislink, local_alt };

const char* to_string(ScenarioId id);
ScenarioId scenario_from_string(const std::string& name);

// A simulation scenario: linear location models with Gaussian errors of
// variance sigma2 (logistic(0,1) errors for scen1_mislink), evaluated at a
// fixed covariate point on a fixed outcome interval. local_alt shifts the
// group-2 intercept of scen1 so the true distance sits delta/sqrt(2n) above
// the scen1 margin distance.
struct ScenarioSpec {
    ScenarioId id = ScenarioId::scen1;
    Eigen::Index n = 500;  // per-group sample size
    double sigma2 = 1.0;
    CovariatePoint x_eval;
    double y_lo = 0.0;
    double y_hi = 0.0;
    LinkSpec fit_link = LinkSpec::standard_normal();
    LinkSpec true_link = LinkSpec::standard_normal();
    double local_delta = 0.0;

    static ScenarioSpec make(ScenarioId id, Eigen::Index n, double sigma2,
                             double local_delta = 0.0);
};

std::pair<Sample, Sample> generate(const ScenarioSpec& spec, std::uint64_t seed);

// Conditional law of the outcome at the evaluation point under the true
// model: a location-scale Gaussian or logistic, optionally censored from
// below (outcome replaced by max(Y, floor)).
struct ConditionalLaw {
    enum class Family : std::uint8_t { gaussian, logistic };
    Family family = Family::gaussian;
    double location = 0.0;
    double scale = 1.0;
    std::optional<double> floor;

    double cdf(double y) const;
};

std::pair<ConditionalLaw, ConditionalLaw> true_laws(const ScenarioSpec& spec);

// Squared L2 distance between two conditional CDFs on [y_lo, y_hi], fine
// composite trapezoid. This is the oracle the experiments are judged against.
double true_squared_distance(const ConditionalLaw& law1, const ConditionalLaw& law2,
                             double y_lo, double y_hi, int n_nodes = 100001);
double true_squared_distance(const ScenarioSpec& spec);

// Group-2 intercept shift s(n) solving distance(s) = scen1 margin distance
// + local_delta / sqrt(2n). Throws when no feasible shift exists.
double calibrate_local_shift(const ScenarioSpec& spec);

struct RejectionCurve {
    std::vector<double> delta_sq_grid;
    std::vector<double> rates;
    int reps = 0;          // completed replications
    int dropped = 0;       // replications lost to fatal fit errors
    double margin = 0.0;   // true squared distance of the generated data
    double alpha = 0.0;
    double epsilon = 0.0;
    Eigen::Index n = 0;
    ScenarioId scenario = ScenarioId::scen1;
};

struct ExperimentOptions {
    int n_y = 201;
    int n_t = 50;
    unsigned workers = 0;
    FitOptions fit;
};

// One fit per replication serves the whole Delta^2 grid (T and V do not
// depend on the threshold). Deterministic given the seed; replication r uses
// substream r, so results do not depend on the worker count. More than 1% of
// dropped replications fails the run.
RejectionCurve rejection_experiment(const ScenarioSpec& spec,
                                    std::vector<double> delta_sq_grid, int reps, double alpha,
                                    double epsilon, const WSampleSet& wq, std::uint64_t seed,
                                    const ExperimentOptions& opts = {});

// T and V of a single seeded replication (used for p-value curves).
std::pair<double, double> replication_stats(const ScenarioSpec& spec, std::uint64_t seed,
                                            double epsilon, const ExperimentOptions& opts = {});

// CSV: delta_sq,rate,reps,margin,alpha,epsilon,n,scenario
void write_rejection_csv(std::ostream& os, const RejectionCurve& curve);

}  // namespace drt
