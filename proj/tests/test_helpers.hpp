#pragma once
// Shared helpers for the unit suites.
#include <cmath>
#include <random>
#include <string>

#include "ecb/config.hpp"
#include "ecb/model.hpp"

namespace ecb::test {

// Relative difference |a - b| / max(|a|, |b|); zero when both are zero.
inline double rel_diff(double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

inline double rel_diff(std::complex<double> a, std::complex<double> b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

// The bundled model at its built-in defaults (solution-1 geometry).
inline torque_model default_model() { return parse_config("").model; }

// Solution-2 geometry: thicker magnets, same ring.
inline torque_model solution2_model() {
    torque_model m = default_model();
    m.geometry.magnet_thickness = 0.040;
    return m;
}

inline const std::vector<double> table_speeds_rpm{1000.0, 2000.0, 4000.0, 6000.0, 8000.0};

}  // namespace ecb::test
