#pragma once
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "ecb/model.hpp"

namespace ecb {

// ---------------------------------------------------------------------------
// Finite-difference check of the closed-form layer response.
//
// For fixed transverse wavenumbers (n pi / r3, k pi / tau) the field through
// the stack obeys the two-point boundary-value problem
//
//   u''(z) = (a_nk^2 + j sigma(z) mu0 N r_m k pi / tau) u(z)
//
// with u = 0 at the back-iron faces (infinitely permeable closure), u and the
// weighted flux p u' continuous at layer interfaces (p = a^2 / gamma^2 inside
// a conducting layer, 1 in non-conducting unit-permeability layers), and a
// magnetization sheet of strength J at the magnet/air-gap interface
// ([p u'] = J).  The closed-form reflection coefficient is then recovered as
//
//   r_numeric = a u(sheet) / (J sinh(a b)).
//
// The solver discretizes layer by layer: layers whose coefficient is real use
// the recurrence u_{i-1} - 2 cosh(kappa h) u_i + u_{i+1} = 0, which the exact
// solution satisfies identically (so sigma = 0 problems solve to rounding);
// conducting layers use the standard second-order stencil.  Solving at mesh/2
// and mesh and Richardson-extrapolating gives a fourth-order-accurate value
// plus an error estimate.
// ---------------------------------------------------------------------------

struct layer {
    double thickness_m = 0.0;
    double relative_permeability = 1.0;  // may be +infinity for ideal back iron
    double conductivity_Sm = 0.0;
    bool is_source = false;  // magnet region (carries the sheet source)
};

struct layer_stack {
    // Bottom to top: back iron, magnet, air gap, conducting plate, back iron.
    std::vector<layer> layers;
    int mesh_points_per_layer = 128;

    void validate() const;
};

// The default stack for a model: ideal (infinitely permeable) back irons,
// which the solver treats as Dirichlet closures rather than meshed layers.
layer_stack default_layer_stack(const torque_model& model, int mesh_points_per_layer);

struct oracle_result {
    std::complex<double> r_numeric;  // Richardson-extrapolated reflection coefficient
    int grid_size = 0;               // mesh points per layer of the fine solve
    double residual_norm = 0.0;      // backward error of the fine discrete solve
    double error_estimate = 0.0;     // |r(mesh) - r(mesh/2)| / 3
};

// Solves the stack problem for harmonic (n, k) at the given operating point
// and extracts the reflection coefficient.  `mesh` is the number of cells per
// meshed layer for the fine solve (even, >= 8); a mesh/2 solve feeds the
// Richardson extrapolation.  Layers with infinite permeability become
// Dirichlet closures; finite-permeability irons are meshed with flux weight
// mu_r a^2 / gamma^2 (whose mu_r -> infinity limit reproduces the closure).
// Throws SINGULAR_SYSTEM if elimination hits a vanishing pivot and
// NO_CONVERGENCE if the extrapolation error estimate exceeds 1% of the
// result.
oracle_result solve_harmonic_bvp(int n, int k, const torque_model& model,
                                 const operating_point& op, int mesh);

// Same, over an explicit stack (finite-permeability mode included).
oracle_result solve_stack_bvp(const layer_stack& stack, int n, int k,
                              const torque_model& model, const operating_point& op);

struct refinement_result {
    // (mesh, relative error against the Richardson reference built from the
    // two finest solves)
    std::vector<std::pair<int, double>> errors;
    double observed_order = 0.0;  // mean slope of log(error) vs log(mesh)
};

// Single-grid solves at each mesh, measured against the scheme's own
// Richardson limit.  Meshes must be strictly increasing, at least 3 entries.
refinement_result refinement_study(int n, int k, const torque_model& model,
                                   const operating_point& op,
                                   const std::vector<int>& meshes);

// ---------------------------------------------------------------------------
// Self-check report: closed form vs numeric over a fixed sample of harmonics
// and speeds, plus a refinement study.  Formatted as structured text by the
// CLI layer.
// ---------------------------------------------------------------------------

struct oracle_record {
    int n = 0;
    int k = 0;
    double speed_rpm = 0.0;
    std::complex<double> r_closed;
    std::complex<double> r_numeric;
    double rel_error = 0.0;
    int mesh = 0;
    double residual_norm = 0.0;
    std::string status = "ok";  // or an error name when the solve failed
};

struct oracle_report {
    std::vector<oracle_record> records;
    double max_rel_error = 0.0;
    bool pass = false;  // max_rel_error < gate over successful records, none failed
    double gate = 1e-6;
    refinement_result refinement;  // at (n,k) = (1,1), largest sampled speed
};

// Runs the standard sample set (n,k) in {1,3,5}^2, speeds {0, 1000, 4000,
// 8000} rpm at the model's parameters, `mesh` points per layer.
oracle_report run_oracle_check(const torque_model& model, speed_convention convention,
                               int mesh);

// One line per record: n k speed_rpm r_closed r_numeric rel_error mesh residual.
std::string format_oracle_report(const oracle_report& report);

}  // namespace ecb
