#include "ecb/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace ecb {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

// ---------------------------------------------------------------------------
// validation
// ---------------------------------------------------------------------------

void brake_geometry::validate() const {
    require(finite(r1) && finite(r2) && finite(r3), "brake_geometry: radii must be finite");
    require(finite(magnet_thickness) && finite(air_gap) && finite(plate_thickness) &&
                finite(back_iron_thickness),
            "brake_geometry: thicknesses must be finite");
    require(r1 > 0.0, "brake_geometry: r1 must be > 0");
    require(r1 < r2, "brake_geometry: r1 must be < r2");
    require(r2 <= r3, "brake_geometry: r2 must be <= r3");
    require(magnet_thickness > 0.0, "brake_geometry: magnet_thickness must be > 0");
    require(air_gap > 0.0, "brake_geometry: air_gap must be > 0");
    require(plate_thickness > 0.0, "brake_geometry: plate_thickness must be > 0");
    require(back_iron_thickness > 0.0, "brake_geometry: back_iron_thickness must be > 0");
}

void magnet_spec::validate() const {
    require(pole_pairs >= 1, "magnet_spec: pole_pairs must be >= 1");
    require(finite(pole_arc_ratio) && pole_arc_ratio > 0.0 && pole_arc_ratio < 1.0,
            "magnet_spec: pole_arc_ratio must lie in (0,1)");
    require(finite(remanence_T) && remanence_T >= 0.0,
            "magnet_spec: remanence_T must be >= 0");
}

void material_spec::validate() const {
    require(finite(mu0_Hm) && mu0_Hm > 0.0, "material_spec: mu0_Hm must be > 0");
    require(finite(sigma_Sm) && sigma_Sm >= 0.0, "material_spec: sigma_Sm must be >= 0");
}

void truncation::validate() const {
    require(n_max >= 1, "truncation: n_max must be >= 1");
    require(k_max >= 1, "truncation: k_max must be >= 1");
    require(finite(band_tolerance) && band_tolerance > 0.0,
            "truncation: band_tolerance must be > 0");
}

void torque_model::validate() const {
    geometry.validate();
    magnets.validate();
    materials.validate();
    trunc.validate();
    require(finite(lambda_scale) && lambda_scale > 0.0,
            "torque_model: lambda_scale must be > 0");
}

// ---------------------------------------------------------------------------
// geometry-level quantities
// ---------------------------------------------------------------------------

double mean_radius(const brake_geometry& geometry) {
    return 0.5 * (geometry.r1 + geometry.r2);
}

double pole_pitch(const brake_geometry& geometry, const magnet_spec& magnets) {
    return pi_d * mean_radius(geometry) / static_cast<double>(magnets.pole_pairs);
}

// ---------------------------------------------------------------------------
// per-harmonic quantities
// ---------------------------------------------------------------------------

namespace {

// Squared spatial eigenvalue.  Kept in one place so that the real part of the
// diffusion eigenvalue's square and the spatial eigenvalue agree exactly.
double eigen_a2(int n, int k, const brake_geometry& g, double tau) {
    const double xi = static_cast<double>(n) * pi_d / g.r3;
    const double kap = static_cast<double>(k) * pi_d / tau;
    return xi * xi + kap * kap;
}

// Everything one summand needs, computed with the common exponential factor
// exp(a (b+c) + Re(gamma) d) divided out of the layer-response fraction.
// With E1 = exp(-2ab), E2 = exp(-2ac), E3 = exp(-2a(b+c)) and S, C the
// rescaled sinh/cosh of gamma d, the reflection coefficient becomes
//   r = -exp(-ab) [(1+E2) S + w (1-E2) C] / 2 / D
// and the bounded pairing used by the torque sum becomes
//   r sinh(ab) = P / D
//   P = -[(1-E1)(1+E2)/4 S + w (1-E1)(1-E2)/4 C]
//   D =  (1+E3)/2 S + w (1-E3)/2 C
// where w = a / gamma.  Neither P nor D can overflow for any admissible
// geometry or truncation.
struct term_parts {
    double a = 0.0;
    double m = 0.0;
    std::complex<double> gamma;
    std::complex<double> r;          // reflection coefficient
    std::complex<double> r_sinh_ab;  // r * sinh(a b), bounded pairing
};

term_parts make_term(int n, int k, const torque_model& model, const operating_point& op) {
    const brake_geometry& g = model.geometry;
    const double tau = pole_pitch(g, model.magnets);
    const double a2 = eigen_a2(n, k, g, tau);
    const double a = std::sqrt(a2);

    term_parts t;
    t.a = a;
    t.m = magnetization_coefficient(n, k, model);
    t.gamma = diffusion_eigenvalue(n, k, model, op);

    const double b = g.magnet_thickness;
    const double c = g.air_gap;
    const double d = g.plate_thickness;

    const double E1 = std::exp(-2.0 * a * b);
    const double E2 = std::exp(-2.0 * a * c);
    const double E3 = std::exp(-2.0 * a * (b + c));

    // sinh(gamma d) and cosh(gamma d), both scaled by exp(-Re(gamma) d).
    // Re(gamma) >= 0 on the principal branch, so the scale factor never grows.
    const double red = t.gamma.real() * d;
    const double imd = t.gamma.imag() * d;
    const std::complex<double> eplus = std::polar(1.0, imd);
    const std::complex<double> eminus = std::exp(-2.0 * red) * std::polar(1.0, -imd);
    const std::complex<double> S = 0.5 * (eplus - eminus);
    const std::complex<double> C = 0.5 * (eplus + eminus);

    const std::complex<double> w = a / t.gamma;
    const std::complex<double> P =
        -((1.0 - E1) * (1.0 + E2) * 0.25 * S + w * ((1.0 - E1) * (1.0 - E2) * 0.25) * C);
    const std::complex<double> D =
        (1.0 + E3) * 0.5 * S + w * ((1.0 - E3) * 0.5) * C;

    if (std::abs(D) < 1e-300) {
        std::ostringstream msg;
        msg << "layer-response denominator collapsed at n=" << n << " k=" << k;
        throw error(errc::degenerate_denominator, msg.str());
    }

    const std::complex<double> num_scaled =
        -std::exp(-a * b) * 0.5 * ((1.0 + E2) * S + w * (1.0 - E2) * C);
    t.r = num_scaled / D;
    t.r_sinh_ab = P / D;
    return t;
}

}  // namespace

double magnetization_coefficient(int n, int k, const torque_model& model) {
    require(n >= 1 && k >= 1, "harmonic indices must be >= 1");
    const brake_geometry& g = model.geometry;
    const double lead = 16.0 * model.magnets.remanence_T /
                        (pi_d * pi_d * model.materials.mu0_Hm *
                         static_cast<double>(n) * static_cast<double>(k));
    return lead * std::sin(static_cast<double>(k) * model.magnets.pole_arc_ratio * pi_d / 2.0) *
           std::sin(static_cast<double>(n) * (pi_d / 2.0) * (g.r2 - g.r1) / g.r3);
}

double spatial_eigenvalue(int n, int k, const torque_model& model) {
    require(n >= 1 && k >= 1, "harmonic indices must be >= 1");
    const double tau = pole_pitch(model.geometry, model.magnets);
    return std::sqrt(eigen_a2(n, k, model.geometry, tau));
}

std::complex<double> diffusion_eigenvalue(int n, int k, const torque_model& model,
                                          const operating_point& op) {
    require(n >= 1 && k >= 1, "harmonic indices must be >= 1");
    const double tau = pole_pitch(model.geometry, model.magnets);
    const double a2 = eigen_a2(n, k, model.geometry, tau);
    const double kap = static_cast<double>(k) * pi_d / tau;
    const double beta = model.materials.sigma_Sm * model.materials.mu0_Hm *
                        op.series_speed() * mean_radius(model.geometry) * kap;
    if (beta == 0.0) {
        // keep gamma == a exact at zero slip (and for sigma = 0)
        return {std::sqrt(a2), 0.0};
    }
    return std::sqrt(std::complex<double>(a2, beta));
}

std::complex<double> reflection_coefficient(int n, int k, const torque_model& model,
                                            const operating_point& op) {
    model.validate();
    return make_term(n, k, model, op).r;
}

harmonic_term harmonic(int n, int k, const torque_model& model, const operating_point& op) {
    model.validate();
    const term_parts t = make_term(n, k, model, op);
    harmonic_term h;
    h.n = n;
    h.k = k;
    h.m_nk = t.m;
    h.a_nk = t.a;
    h.gamma_nk = t.gamma;
    h.r_nk = t.r;
    h.contribution = std::complex<double>(0.0, 1.0) *
                     (static_cast<double>(k) * t.m * t.m / t.a) * t.r_sinh_ab;
    return h;
}

// ---------------------------------------------------------------------------
// series evaluation
// ---------------------------------------------------------------------------

series_evaluation evaluate_series(const torque_model& model, const operating_point& op) {
    model.validate();
    const int n_max = model.trunc.n_max;
    const int k_max = model.trunc.k_max;
    const std::complex<double> j(0.0, 1.0);

    series_evaluation ev;
    std::complex<double> sum(0.0, 0.0);
    double mag_sum = 0.0;
    double band_mag = 0.0;

    // Accumulate in L-shaped bands m = max(n, k): first the row n = m, then
    // the column k = m.  Each (n, k) pair is visited exactly once, and the
    // final band is what the convergence guard compares against the total.
    const int m_last = std::max(n_max, k_max);
    for (int m = 1; m <= m_last; ++m) {
        band_mag = 0.0;
        if (m <= n_max) {
            for (int k = 1; k <= std::min(m, k_max); ++k) {
                const term_parts t = make_term(m, k, model, op);
                const std::complex<double> c =
                    j * (static_cast<double>(k) * t.m * t.m / t.a) * t.r_sinh_ab;
                sum += c;
                const double cm = std::abs(c);
                mag_sum += cm;
                band_mag += cm;
            }
        }
        if (m <= k_max) {
            for (int n = 1; n <= std::min(m - 1, n_max); ++n) {
                const term_parts t = make_term(n, m, model, op);
                const std::complex<double> c =
                    j * (static_cast<double>(m) * t.m * t.m / t.a) * t.r_sinh_ab;
                sum += c;
                const double cm = std::abs(c);
                mag_sum += cm;
                band_mag += cm;
            }
        }
    }

    const double tau = pole_pitch(model.geometry, model.magnets);
    const double p = static_cast<double>(model.magnets.pole_pairs);
    ev.series_sum = sum;
    ev.term_magnitude_sum = mag_sum;
    ev.last_band_magnitude = band_mag;
    ev.band_fraction = mag_sum > 0.0 ? band_mag / mag_sum : 0.0;
    ev.truncation_converged = ev.band_fraction <= model.trunc.band_tolerance;
    ev.torque_Nm = 0.5 * model.lambda_scale * model.materials.mu0_Hm * p * p * tau *
                   model.geometry.r3 * sum.real();
    return ev;
}

double torque(const torque_model& model, const operating_point& op) {
    const series_evaluation ev = evaluate_series(model, op);
    if (!ev.truncation_converged) {
        std::ostringstream msg;
        msg << "series band check failed at truncation " << model.trunc.n_max << "x"
            << model.trunc.k_max << ": last band carries " << ev.band_fraction
            << " of the term-magnitude sum (tolerance " << model.trunc.band_tolerance
            << "); raise n_max/k_max";
        throw error(errc::non_converged, msg.str());
    }
    return ev.torque_Nm;
}

std::vector<std::pair<double, double>> torque_speed_curve(
    const torque_model& model, const std::vector<operating_point>& speeds) {
    std::vector<std::pair<double, double>> curve;
    curve.reserve(speeds.size());
    for (const operating_point& op : speeds) {
        curve.emplace_back(op.slip_rpm, torque(model, op));
    }
    return curve;
}

double dissipated_power(double torque_Nm, const operating_point& op) {
    return torque_Nm * op.omega_mech();
}

}  // namespace ecb
