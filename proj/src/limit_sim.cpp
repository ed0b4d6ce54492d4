#include "drt/limit_sim.hpp"

#include "drt/csv.hpp"
#include "drt/parallel.hpp"
#include "drt/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <stdexcept>

namespace drt {

double w_from_increments(std::span<const double> increments, double epsilon) {
    const std::size_t n = increments.size();
    if (n < 2) throw std::invalid_argument("w_from_increments: need at least 2 steps");
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::invalid_argument("w_from_increments: epsilon must lie in (0, 1)");
    const double dt = 1.0 / static_cast<double>(n);
    const double sqrt_dt = std::sqrt(dt);
    const std::size_t k0 = static_cast<std::size_t>(std::ceil(epsilon * static_cast<double>(n)));

    // Expand (B/t - B1)^2 = (B/t)^2 - 2 B1 (B/t) + B1^2 so the trapezoid sums
    // can be accumulated in one pass before B1 is known.
    double b = 0.0;
    double s2 = 0.0, s1 = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
        b += increments[k - 1] * sqrt_dt;
        if (k < k0) continue;
        const double t = static_cast<double>(k) * dt;
        const double r = b / t;
        const double w = (k == k0 || k == n) ? 0.5 : 1.0;
        s2 += w * r * r;
        s1 += w * r;
    }
    const double b1 = b;
    const double span_len = (static_cast<double>(n) - static_cast<double>(k0)) * dt;
    const double den2 = dt * s2 - 2.0 * b1 * dt * s1 + b1 * b1 * span_len;
    if (!(den2 > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return b1 / std::sqrt(den2);
}

WSampleSet simulate_w(double epsilon, std::int64_t n_paths, std::int64_t n_steps,
                      std::uint64_t seed, unsigned workers) {
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::invalid_argument("simulate_w: epsilon must lie in (0, 1)");
    if (n_steps < 1000) throw std::invalid_argument("simulate_w: need at least 1000 steps");
    if (n_paths < 1000) throw std::invalid_argument("simulate_w: need at least 1000 paths");

    WSampleSet ws;
    ws.epsilon = epsilon;
    ws.n_paths = n_paths;
    ws.n_steps = n_steps;
    ws.seed = seed;
    ws.samples.assign(static_cast<std::size_t>(n_paths), 0.0);

    std::atomic<std::int64_t> bad{0};
    // thread_local buffer: one allocation per worker, reused across paths
    parallel_for(static_cast<std::size_t>(n_paths), workers, [&](std::size_t path) {
        thread_local std::vector<double> increments;
        increments.resize(static_cast<std::size_t>(n_steps));
        std::mt19937_64 engine = substream_engine(seed, path);
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (auto& xi : increments) xi = gauss(engine);
        const double w = w_from_increments(increments, epsilon);
        if (std::isnan(w)) {
            bad.fetch_add(1, std::memory_order_relaxed);
            ws.samples[path] = 0.0;
        } else {
            ws.samples[path] = w;
        }
    });

    ws.n_nonpositive_denominators = bad.load();
    if (ws.n_nonpositive_denominators > 0)
        throw std::runtime_error("simulate_w: encountered a nonpositive denominator");
    std::sort(ws.samples.begin(), ws.samples.end());
    return ws;
}

double quantile(const WSampleSet& ws, double level) {
    if (ws.samples.empty()) throw std::invalid_argument("quantile: empty sample set");
    if (!(level > 0.0 && level < 1.0))
        throw std::invalid_argument("quantile: level must lie in (0, 1)");
    const auto n = static_cast<double>(ws.samples.size());
    auto index = static_cast<std::size_t>(std::ceil(level * n));
    if (index < 1) index = 1;
    if (index > ws.samples.size()) index = ws.samples.size();
    return ws.samples[index - 1];
}

double p_value(const WSampleSet& ws, double x) {
    if (ws.samples.empty()) throw std::invalid_argument("p_value: empty sample set");
    const auto it = std::upper_bound(ws.samples.begin(), ws.samples.end(), x);
    return static_cast<double>(ws.samples.end() - it) / static_cast<double>(ws.samples.size());
}

// ---------------------------------------------------------------------------
// Cache IO
// ---------------------------------------------------------------------------

namespace {
constexpr const char* kCacheHeader = "epsilon,n_paths,n_steps,seed,level,quantile";
}

void write_quantile_cache(std::ostream& os, const std::vector<QuantileCacheRow>& rows) {
    os << kCacheHeader << '\n';
    for (const auto& r : rows) {
        os << csv::format(r.epsilon) << ',' << r.n_paths << ',' << r.n_steps << ',' << r.seed
           << ',' << csv::format(r.level) << ',' << csv::format(r.quantile) << '\n';
    }
}

std::vector<QuantileCacheRow> read_quantile_cache(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("quantile cache: empty file");
    if (csv::strip_cr(line) != kCacheHeader)
        throw std::runtime_error("quantile cache: unexpected header");
    std::vector<QuantileCacheRow> rows;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (csv::strip_cr(line).empty()) continue;
        const auto fields = csv::split(line);
        if (fields.size() != 6)
            throw std::runtime_error("quantile cache: wrong field count on line " +
                                     std::to_string(line_no));
        QuantileCacheRow r{};
        r.epsilon = csv::parse_double(fields[0], line_no, "epsilon");
        r.n_paths = static_cast<std::int64_t>(csv::parse_double(fields[1], line_no, "n_paths"));
        r.n_steps = static_cast<std::int64_t>(csv::parse_double(fields[2], line_no, "n_steps"));
        r.seed = static_cast<std::uint64_t>(csv::parse_double(fields[3], line_no, "seed"));
        r.level = csv::parse_double(fields[4], line_no, "level");
        r.quantile = csv::parse_double(fields[5], line_no, "quantile");
        rows.push_back(r);
    }
    return rows;
}

void append_quantile_cache_file(const std::string& path,
                                const std::vector<QuantileCacheRow>& rows) {
    std::vector<QuantileCacheRow> all;
    {
        std::ifstream in(path);
        if (in.good()) all = read_quantile_cache(in);
    }
    for (const auto& r : rows) {
        const bool duplicate = std::any_of(all.begin(), all.end(), [&](const QuantileCacheRow& a) {
            return a.epsilon == r.epsilon && a.n_paths == r.n_paths && a.n_steps == r.n_steps &&
                   a.seed == r.seed && a.level == r.level;
        });
        if (!duplicate) all.push_back(r);
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("quantile cache: cannot write " + path);
    write_quantile_cache(out, all);
}

std::vector<QuantileCacheRow> read_quantile_cache_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("quantile cache: cannot open " + path);
    return read_quantile_cache(in);
}

std::vector<QuantileCacheRow> select_cache_table(const std::vector<QuantileCacheRow>& rows,
                                                 double epsilon, std::int64_t n_paths,
                                                 std::int64_t n_steps, std::uint64_t seed) {
    std::vector<QuantileCacheRow> table;
    for (const auto& r : rows)
        if (r.epsilon == epsilon && r.n_paths == n_paths && r.n_steps == n_steps && r.seed == seed)
            table.push_back(r);
    std::sort(table.begin(), table.end(),
              [](const QuantileCacheRow& a, const QuantileCacheRow& b) { return a.level < b.level; });
    return table;
}

std::optional<double> cached_quantile(const std::vector<QuantileCacheRow>& table, double level) {
    for (const auto& r : table)
        if (r.level == level) return r.quantile;
    return std::nullopt;
}

double p_value_from_table(const std::vector<QuantileCacheRow>& table, double x) {
    if (table.empty()) throw std::invalid_argument("p_value_from_table: empty table");
    double best_level = 0.0;
    for (const auto& r : table)
        if (r.quantile <= x && r.level > best_level) best_level = r.level;
    return 1.0 - best_level;
}

}  // namespace drt
