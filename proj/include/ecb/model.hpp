#pragma once
#include <complex>
#include <utility>
#include <vector>

#include "ecb/error.hpp"

namespace ecb {

// ---------------------------------------------------------------------------
// Axial-flux eddy-current brake, harmonic layer model.
//
// The brake is a ring of axially magnetized permanent magnets (inner radius
// r1, outer radius r2, thickness b) facing a conducting disc (radius r3,
// thickness d) across an air gap c, closed by back iron on both sides.  At
// the mean radius the field problem unrolls into a 2-D Cartesian layer stack,
// and each transverse harmonic (n, k) obeys a 1-D diffusion equation through
// the stack.  Summing the per-harmonic surface stresses gives the drag
// torque:
//
//   T = (lambda/2) mu0 p^2 tau r3 Re[ sum_{n,k} j k (M_nk^2 / a_nk)
//                                      r_nk sinh(a_nk b) ]
//
// with tau = pi r_m / p the pole pitch, M_nk the magnetization coefficient,
// a_nk the spatial eigenvalue, and r_nk the layer reflection coefficient.
// lambda is an empirical scale factor fitted by design_search::calibrate.
// Positive torque opposes positive slip (checked against the finite-
// difference layer solver in the test suite).
// ---------------------------------------------------------------------------

inline constexpr double pi_d = 3.141592653589793238462643383279502884;

// All lengths in meters.
struct brake_geometry {
    double r1;                   // magnet ring inner radius
    double r2;                   // magnet ring outer radius
    double r3;                   // conducting disc radius
    double magnet_thickness;     // axial magnet thickness b
    double air_gap;              // air-gap thickness c
    double plate_thickness;      // conducting plate thickness d
    double back_iron_thickness;  // back-iron axial thickness

    // Radial width of the magnet ring.
    double radial_width() const { return r2 - r1; }

    void validate() const;
};

struct magnet_spec {
    int pole_pairs;         // p
    double pole_arc_ratio;  // fraction of the pole pitch covered by magnet, in (0,1)
    double remanence_T;     // magnet remanence

    void validate() const;
};

struct material_spec {
    double mu0_Hm = 4e-7 * pi_d;  // free-space permeability
    double sigma_Sm = 0.0;        // plate conductivity

    void validate() const;
};

// How the slip figure enters the diffusion eigenvalue.  The rotational speed
// is always STORED in rpm (the unit used throughout the design tables); the
// convention decides what number the field equations see:
//   radians_per_second: omega = 2 pi rpm / 60 (converted exactly once,
//                       at series-evaluation entry)
//   rpm:                the raw rpm figure
// Both are provided because the source data's units are ambiguous; the
// calibration step picks whichever fits the published torques better.
enum class speed_convention { radians_per_second, rpm };

struct operating_point {
    double slip_rpm = 0.0;  // signed slip speed, rpm
    speed_convention convention = speed_convention::radians_per_second;

    // The speed figure entering the diffusion eigenvalue.
    double series_speed() const {
        return convention == speed_convention::radians_per_second
                   ? 2.0 * pi_d * slip_rpm / 60.0
                   : slip_rpm;
    }

    // Mechanical angular speed, rad/s, for power bookkeeping.  Independent of
    // the series convention.
    double omega_mech() const { return 2.0 * pi_d * slip_rpm / 60.0; }
};

struct truncation {
    int n_max = 30;
    int k_max = 30;

    // Convergence guard: the series evaluation flags NON_CONVERGED when the
    // last L-shaped index band max(n,k) = m contributes more than this
    // fraction of the accumulated term-magnitude sum.  The tail of this
    // series decays only like k^-3, so the guard is a coarse sanity check
    // against blatantly inadequate truncations (the default trips 3x3 and
    // below and accepts the default 30x30 everywhere inside the design box,
    // where the worst band fraction is 2.4e-2 at w_m = 2 mm).
    double band_tolerance = 5e-2;

    void validate() const;
};

struct torque_model {
    brake_geometry geometry;
    magnet_spec magnets;
    material_spec materials;
    truncation trunc;
    double lambda_scale = 1.0;  // multiplicative output scale, > 0

    void validate() const;
};

// One (n, k) summand, fully expanded for inspection.
struct harmonic_term {
    int n = 0;
    int k = 0;
    double m_nk = 0.0;                       // magnetization coefficient
    double a_nk = 0.0;                       // spatial eigenvalue, 1/m
    std::complex<double> gamma_nk;           // diffusion eigenvalue, 1/m
    std::complex<double> r_nk;               // layer reflection coefficient
    std::complex<double> contribution;       // j k (M^2/a) r sinh(a b)
};

// Diagnostics from one full series evaluation.
struct series_evaluation {
    double torque_Nm = 0.0;
    std::complex<double> series_sum;     // sum of contributions
    double term_magnitude_sum = 0.0;     // sum of |contribution|
    double last_band_magnitude = 0.0;    // |contribution| summed over the last band
    double band_fraction = 0.0;          // last_band_magnitude / term_magnitude_sum
    bool truncation_converged = false;   // band_fraction <= band_tolerance
};

// --- geometry-level quantities ---------------------------------------------

// Mean radius (r1 + r2) / 2 of the magnet ring.
double mean_radius(const brake_geometry& geometry);

// Pole pitch tau = pi r_m / p at the mean radius.
double pole_pitch(const brake_geometry& geometry, const magnet_spec& magnets);

// --- per-harmonic quantities ------------------------------------------------

// Magnetization coefficient
//   M_nk = 16 Br / (pi^2 mu0 n k) sin(k alpha pi / 2)
//          sin(n (pi/2) (r2 - r1) / r3).
double magnetization_coefficient(int n, int k, const torque_model& model);

// Spatial eigenvalue a_nk = sqrt((n pi / r3)^2 + (k pi / tau)^2).
double spatial_eigenvalue(int n, int k, const torque_model& model);

// Diffusion eigenvalue gamma_nk = sqrt(a_nk^2 + j sigma mu0 N r_m k pi / tau)
// (principal branch).  N is the convention-resolved speed figure.  At zero
// slip gamma_nk equals a_nk exactly.
std::complex<double> diffusion_eigenvalue(int n, int k, const torque_model& model,
                                          const operating_point& op);

// Layer reflection coefficient
//   r_nk = -[cosh(a c) sinh(g d) + (a/g) sinh(a c) cosh(g d)]
//          / [cosh(a (b+c)) sinh(g d) + (a/g) sinh(a (b+c)) cosh(g d)]
// evaluated in exponential-rescaled form so that arguments far beyond the
// floating-point exp range stay finite.  Throws DEGENERATE_DENOMINATOR if the
// rescaled denominator collapses.
std::complex<double> reflection_coefficient(int n, int k, const torque_model& model,
                                            const operating_point& op);

// All per-harmonic pieces of one summand.
harmonic_term harmonic(int n, int k, const torque_model& model, const operating_point& op);

// --- series evaluation -------------------------------------------------------

// Evaluates the double sum with full diagnostics.  Terms are accumulated in
// L-shaped bands m = max(n, k) so the convergence guard can compare the last
// band against the running total.  Does not throw on a failed band check
// (inspect truncation_converged); throws DEGENERATE_DENOMINATOR on a
// collapsed term denominator.
series_evaluation evaluate_series(const torque_model& model, const operating_point& op);

// Brake torque in newton-meters.  Positive output opposes positive slip.
// Throws NON_CONVERGED when the band check fails at the configured
// truncation, DEGENERATE_DENOMINATOR on a collapsed denominator.
double torque(const torque_model& model, const operating_point& op);

// Torque at each operating point, in input order.  Returned pairs are
// (slip_rpm, torque_Nm).
std::vector<std::pair<double, double>> torque_speed_curve(
    const torque_model& model, const std::vector<operating_point>& speeds);

// Dissipated power T * omega_mech in watts; the mechanical conversion
// 2 pi / 60 is applied to the rpm figure regardless of the series convention.
double dissipated_power(double torque_Nm, const operating_point& op);

}  // namespace ecb
