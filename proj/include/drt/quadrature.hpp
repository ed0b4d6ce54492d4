#pragma once

#include <span>
#include <stdexcept>

namespace drt {

// Composite trapezoid on an equally spaced grid with spacing dx.
inline double trapezoid_uniform(std::span<const double> f, double dx) {
    if (f.size() < 2) throw std::invalid_argument("trapezoid_uniform: need at least 2 nodes");
    double s = 0.5 * (f.front() + f.back());
    for (std::size_t i = 1; i + 1 < f.size(); ++i) s += f[i];
    return s * dx;
}

// Composite trapezoid on an arbitrary strictly increasing grid.
inline double trapezoid(std::span<const double> f, std::span<const double> x) {
    if (f.size() != x.size()) throw std::invalid_argument("trapezoid: size mismatch");
    if (f.size() < 2) throw std::invalid_argument("trapezoid: need at least 2 nodes");
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < f.size(); ++i)
        s += 0.5 * (f[i] + f[i + 1]) * (x[i + 1] - x[i]);
    return s;
}

}  // namespace drt
