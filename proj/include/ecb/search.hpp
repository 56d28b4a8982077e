#pragma once
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ecb/model.hpp"
#include "ecb/regulations.hpp"

namespace ecb {

// ---------------------------------------------------------------------------
// Parameter sweep over (magnet thickness b, magnet ring radial width w_m) at
// a fixed speed set, ranking against a per-wheel torque target, plus the
// empirical calibration of the model's output scale lambda against a bundled
// pair of reference designs.
//
// The ring inner radius is derived per cell as r1 = r2 - w_m (the outer
// radius stays fixed), so w_m is the one free radial parameter.
// ---------------------------------------------------------------------------

struct sweep_range {
    double min_m = 0.0;
    double max_m = 0.0;
    double step_m = 0.0;

    // Grid points from min to max inclusive; max is included when
    // (max - min) is an integer multiple of step (to rounding).
    std::vector<double> points() const;

    void validate() const;
};

struct sweep_grid {
    sweep_range b_range{0.002, 0.040, 0.001};    // magnet thickness
    sweep_range wm_range{0.002, 0.110, 0.002};   // ring radial width
    std::vector<double> speeds_rpm{1000.0, 2000.0, 4000.0, 6000.0, 8000.0};

    void validate() const;
};

struct sweep_entry {
    double b_m = 0.0;
    double w_m_m = 0.0;
    double speed_rpm = 0.0;
    double torque_Nm = 0.0;  // NaN when !ok
    bool ok = true;
    std::string status = "ok";  // error name when the evaluation failed
};

struct sweep_result {
    std::vector<sweep_entry> entries;      // b-major, then w_m, then speed
    std::uint64_t model_fingerprint = 0;   // hash of every input that shaped the run
    sweep_grid grid;
    speed_convention convention = speed_convention::radians_per_second;
};

struct design_solution {
    double b_m = 0.0;
    double w_m_m = 0.0;
    std::vector<std::pair<double, double>> torque_by_speed;  // (rpm, N*m), speed-ordered
    double avg_torque_Nm = 0.0;
    double min_torque_Nm = 0.0;
    double objective = 0.0;  // |avg - target|, the ranking key
    bool feasible = false;   // min_torque >= target
};

// --- fingerprints -----------------------------------------------------------

// FNV-1a over the canonical text of the physical model inputs: geometry,
// magnets, materials, truncation.  Excludes the output scale lambda and the
// speed convention, because this is the key under which a calibration record
// (which supplies those two) is stored and looked up.
std::uint64_t calibration_fingerprint(const torque_model& model);

// Full run fingerprint: the calibration fingerprint extended with lambda, the
// speed convention, and the sweep grid.  Two sweeps with equal fingerprints
// are bitwise-identical runs.
std::uint64_t sweep_fingerprint(const torque_model& model, speed_convention convention,
                                const sweep_grid& grid);

// --- sweep and ranking -------------------------------------------------------

// Evaluates torque at every (b, w_m, speed) cell of the grid.  Entries are
// ordered b-major, then w_m, then speed, and each is computed independently:
// `threads` workers write to preallocated slots, so the output is bitwise
// identical for any worker count (0 = hardware concurrency).  Per-point
// evaluation failures are recorded in the entry's status and never abort the
// sweep.  Geometry preconditions (r1 = r2 - w_m positive and consistent) are
// checked up front for every w_m point.
sweep_result run_sweep(const torque_model& model_template, const sweep_grid& grid,
                       speed_convention convention, int threads = 0);

// Aggregates sweep entries per (b, w_m) cell and ranks cells by
// |avg_torque - target| ascending, tie-broken by smaller b then smaller w_m
// (less magnet material).  Cells with any failed entry are dropped.  When
// feasible_only is set, cells with min_torque < target are dropped first;
// throws EMPTY_FEASIBLE_SET if that leaves nothing.
std::vector<design_solution> rank_solutions(const sweep_result& result, double target_Nm,
                                            bool feasible_only);

// --- calibration -------------------------------------------------------------

// A published operating point the scale factor is anchored to.
struct calibration_reference {
    brake_geometry geometry;
    double speed_rpm = 0.0;
    double torque_Nm = 0.0;
};

struct calibration_residual {
    double speed_rpm = 0.0;
    std::string solution_id;
    double relative_error = 0.0;  // signed, (lambda T_model - T_ref) / T_ref
};

struct calibration_result {
    double lambda_star = 1.0;
    calibration_reference reference_point;
    std::vector<calibration_residual> residuals;  // under convention_used, all table rows
    speed_convention convention_used = speed_convention::radians_per_second;

    // Diagnostics: the same fit under the other convention.
    double max_abs_residual = 0.0;
    double lambda_star_other = 1.0;
    double max_abs_residual_other = 0.0;
    std::vector<calibration_residual> residuals_other;
};

// A reference design: a sweep cell with its published torque-speed samples.
struct reference_design {
    std::string id;
    double b_m = 0.0;
    double w_m_m = 0.0;
    std::vector<std::pair<double, double>> torque_by_speed;  // (rpm, N*m)
};

// The bundled reference data: two full-width designs (b = 30 mm and 40 mm,
// w_m = 110 mm) sampled at the five standard speeds.
const std::vector<reference_design>& reference_designs();

// Fits lambda_star = T_ref / T(lambda=1) at the reference point, then scores
// the fit on every bundled reference row under both speed conventions;
// convention_used is the one with the smaller maximum |relative error|.  The
// reference row's own residual is zero by construction.  Throws
// ZERO_REFERENCE when the uncalibrated torque vanishes at the reference
// point.
calibration_result calibrate_lambda(const torque_model& model_template,
                                    const calibration_reference& reference);

// --- requirement check --------------------------------------------------------

struct speed_margin {
    double speed_rpm = 0.0;
    double torque_Nm = 0.0;
    double margin_Nm = 0.0;  // torque - per-wheel target
    bool pass = false;
};

struct requirement_report {
    bool pass = false;  // min over speeds >= per-wheel target
    double per_wheel_torque_Nm = 0.0;
    std::vector<speed_margin> margins;
};

// Margin of a candidate design against the per-wheel torque target at every
// sampled speed.  The solution must cover both endpoints of
// req.speed_range_rpm.
requirement_report check_requirement(const design_solution& solution,
                                     const requirement_spec& req);

}  // namespace ecb
