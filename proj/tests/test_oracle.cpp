#include <cmath>
#include <complex>
#include <limits>

#include "doctest.h"

#include "ecb/oracle.hpp"
#include "reference_values.hpp"
#include "test_helpers.hpp"

using namespace ecb;
using test::default_model;
using test::rel_diff;

namespace {
const operating_point rad_1000{1000.0, speed_convention::radians_per_second};
const operating_point rad_4000{4000.0, speed_convention::radians_per_second};
const operating_point rad_8000{8000.0, speed_convention::radians_per_second};
}  // namespace

TEST_SUITE("layer_oracle") {

TEST_CASE("finite-difference solution matches the frozen cross-implementation pins") {
    // The pins were produced by an independent implementation of the same
    // scheme; the remaining gap is cross-implementation rounding (different
    // pivot tie-breaks in the tridiagonal elimination), hence 1e-10 rather
    // than machine precision.
    const torque_model m = default_model();

    const oracle_result r11 = solve_harmonic_bvp(1, 1, m, rad_1000, 128);
    CHECK(rel_diff(r11.r_numeric, ref::fd_r11_1000rpm_mesh128) <= 1e-10);
    CHECK(r11.grid_size == 128);

    const oracle_result r35 = solve_harmonic_bvp(3, 5, m, rad_4000, 64);
    CHECK(rel_diff(r35.r_numeric, ref::fd_r35_4000rpm_mesh64) <= 1e-10);
}

TEST_CASE("closed form agrees with finite differences across harmonics and speeds") {
    const torque_model m = default_model();
    const oracle_report report =
        run_oracle_check(m, speed_convention::radians_per_second, 128);

    CHECK(report.pass);
    CHECK(report.max_rel_error < report.gate);
    CHECK(report.gate == 1e-6);
    CHECK(report.records.size() == 9 * 4);  // (n,k) in {1,3,5}^2 x 4 speeds
    for (const oracle_record& rec : report.records) {
        CHECK(rec.status == "ok");
        CHECK(rec.rel_error <= report.max_rel_error);
    }
    CHECK(report.refinement.observed_order > 1.8);
    CHECK(report.refinement.observed_order < 2.2);
}

TEST_CASE("the check also passes under the rpm convention") {
    const torque_model m = default_model();
    const oracle_report report = run_oracle_check(m, speed_convention::rpm, 128);
    CHECK(report.pass);
    CHECK(report.max_rel_error < 1e-6);
}

TEST_CASE("single-grid errors shrink at second order") {
    const torque_model m = default_model();
    const refinement_result study =
        refinement_study(1, 1, m, rad_8000, {32, 64, 128});
    REQUIRE(study.errors.size() == 3);
    CHECK(study.observed_order == doctest::Approx(2.0).epsilon(0.1));
    // Error drops by ~4x per mesh doubling.
    const double ratio10 = study.errors[0].second / study.errors[1].second;
    const double ratio21 = study.errors[1].second / study.errors[2].second;
    CHECK(ratio10 == doctest::Approx(4.0).epsilon(0.05));
    CHECK(ratio21 == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("zero-conductivity stacks solve to rounding accuracy") {
    // Non-conducting layers use a recurrence the exact solution satisfies
    // identically, so with sigma = 0 the only error left is rounding.
    torque_model m = default_model();
    m.materials.sigma_Sm = 0.0;
    const oracle_result numeric = solve_harmonic_bvp(1, 1, m, rad_8000, 32);
    const std::complex<double> closed = reflection_coefficient(1, 1, m, rad_8000);
    CHECK(rel_diff(numeric.r_numeric, closed) <= 1e-12);
}

TEST_CASE("zero slip yields a purely real response") {
    const torque_model m = default_model();
    const operating_point rest{0.0, speed_convention::radians_per_second};
    const oracle_result r = solve_harmonic_bvp(1, 1, m, rest, 64);
    CHECK(r.r_numeric.imag() == 0.0);
    CHECK(std::abs(r.r_numeric.real()) > 0.0);
}

TEST_CASE("finite-permeability back irons approach the ideal closure") {
    const torque_model m = default_model();
    const oracle_result ideal = solve_harmonic_bvp(1, 1, m, rad_1000, 64);

    layer_stack soft = default_layer_stack(m, 64);
    REQUIRE(soft.layers.size() == 5);
    soft.layers.front().relative_permeability = 1e6;
    soft.layers.back().relative_permeability = 1e6;
    const oracle_result meshed = solve_stack_bvp(soft, 1, 1, m, rad_1000);
    CHECK(rel_diff(meshed.r_numeric, ideal.r_numeric) <= 1e-6);
}

TEST_CASE("badly under-resolved problems raise NO_CONVERGENCE") {
    torque_model m = default_model();
    m.geometry.plate_thickness = 0.020;  // skin depth far below the cell size
    const operating_point fast{1e5, speed_convention::radians_per_second};
    CHECK_THROWS_AS(solve_harmonic_bvp(1, 1, m, fast, 8), error);
    try {
        solve_harmonic_bvp(1, 1, m, fast, 8);
    } catch (const error& e) {
        CHECK(e.code() == errc::no_convergence);
        CHECK(std::string(e.what()).find("mesh") != std::string::npos);
    }
}

TEST_CASE("stack validation rejects malformed inputs") {
    const torque_model m = default_model();
    const layer_stack good = default_layer_stack(m, 64);

    layer_stack bad = good;
    bad.layers.resize(2);
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = good;
    bad.mesh_points_per_layer = 7;  // odd
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = good;
    bad.mesh_points_per_layer = 6;  // below the minimum
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = good;
    for (layer& l : bad.layers) l.is_source = false;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = good;
    bad.layers[2].is_source = true;  // second source
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = good;
    bad.layers[1].thickness_m = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = good;
    bad.layers[2].relative_permeability = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(solve_stack_bvp(bad, 1, 1, m, rad_1000), std::invalid_argument);
}

TEST_CASE("refinement study rejects malformed mesh lists") {
    const torque_model m = default_model();
    CHECK_THROWS_AS(refinement_study(1, 1, m, rad_1000, {32, 64}), std::invalid_argument);
    CHECK_THROWS_AS(refinement_study(1, 1, m, rad_1000, {64, 32, 128}),
                    std::invalid_argument);
    CHECK_THROWS_AS(refinement_study(1, 1, m, rad_1000, {4, 8, 16}), std::invalid_argument);
}

TEST_CASE("report formatting carries the verdict and the gate") {
    const torque_model m = default_model();
    const oracle_report report =
        run_oracle_check(m, speed_convention::radians_per_second, 32);
    const std::string text = format_oracle_report(report);
    CHECK(text.find("max_rel_error") != std::string::npos);
    CHECK(text.find("observed_order") != std::string::npos);
    CHECK(text.find(report.pass ? "verdict PASS" : "verdict FAIL") != std::string::npos);
}

}  // TEST_SUITE
