#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace drt {

// Monte Carlo samples of the pivotal limit variable
//   W = B(1) / [ integral_eps^1 (B(t)/t - B(1))^2 dt ]^{1/2},
// B a standard Brownian motion, simulated as cumulative sums of i.i.d.
// Gaussian increments on {k/n_steps}. Samples are sorted ascending.
struct WSampleSet {
    double epsilon = 0.0;
    std::int64_t n_paths = 0;
    std::int64_t n_steps = 0;
    std::uint64_t seed = 0;
    std::vector<double> samples;
    std::int64_t n_nonpositive_denominators = 0;
};

// W realized from one path of raw N(0,1) increments (scaled by sqrt(1/n)
// internally). The time integral is a trapezoid over the nodes with t >= eps.
double w_from_increments(std::span<const double> increments, double epsilon);

// Deterministic in (seed, n_paths, n_steps) and independent of the worker
// count: path i draws from substream i of the master seed.
WSampleSet simulate_w(double epsilon, std::int64_t n_paths, std::int64_t n_steps,
                      std::uint64_t seed, unsigned workers = 0);

// Type-1 empirical quantile: order statistic at index ceil(level * n_paths).
double quantile(const WSampleSet& ws, double level);

// P(W > x): fraction of stored samples strictly greater than x.
double p_value(const WSampleSet& ws, double x);

// ---------------------------------------------------------------------------
// Quantile cache (CSV: epsilon,n_paths,n_steps,seed,level,quantile)
// ---------------------------------------------------------------------------

struct QuantileCacheRow {
    double epsilon;
    std::int64_t n_paths;
    std::int64_t n_steps;
    std::uint64_t seed;
    double level;
    double quantile;
};

void write_quantile_cache(std::ostream& os, const std::vector<QuantileCacheRow>& rows);
std::vector<QuantileCacheRow> read_quantile_cache(std::istream& is);
void append_quantile_cache_file(const std::string& path, const std::vector<QuantileCacheRow>& rows);
std::vector<QuantileCacheRow> read_quantile_cache_file(const std::string& path);

// Rows of one cached table (matching epsilon/n_paths/n_steps/seed), sorted by
// level. Empty when no row matches.
std::vector<QuantileCacheRow> select_cache_table(const std::vector<QuantileCacheRow>& rows,
                                                 double epsilon, std::int64_t n_paths,
                                                 std::int64_t n_steps, std::uint64_t seed);

// Quantile lookup from cached rows; exact level match required.
std::optional<double> cached_quantile(const std::vector<QuantileCacheRow>& table, double level);

// P(W > x) from a cached level grid: 1 - max{level : q_level <= x}, the step
// function induced by the cached quantiles.
double p_value_from_table(const std::vector<QuantileCacheRow>& table, double x);

}  // namespace drt
