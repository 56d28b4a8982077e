#include "ecb/search.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string_view>
#include <thread>

namespace ecb {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

// --- FNV-1a over the canonical text of the inputs ---------------------------

constexpr std::uint64_t fnv_offset_basis = 14695981039346656037ULL;
constexpr std::uint64_t fnv_prime = 1099511628211ULL;

std::uint64_t fnv1a(std::uint64_t h, std::string_view text) {
    for (unsigned char ch : text) {
        h ^= ch;
        h *= fnv_prime;
    }
    return h;
}

std::uint64_t fnv1a_num(std::uint64_t h, double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g|", value);
    return fnv1a(h, buf);
}

std::uint64_t fnv1a_int(std::uint64_t h, long long value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%lld|", value);
    return fnv1a(h, buf);
}

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

}  // namespace

// --- grid --------------------------------------------------------------------

void sweep_range::validate() const {
    require(std::isfinite(min_m) && std::isfinite(max_m) && min_m <= max_m,
            "sweep_range: min must be <= max");
    require(std::isfinite(step_m) && step_m > 0.0, "sweep_range: step must be > 0");
}

std::vector<double> sweep_range::points() const {
    validate();
    const double span = max_m - min_m;
    const double ratio = span / step_m;
    const long long rounded = std::llround(ratio);
    const bool integral = near(ratio, static_cast<double>(rounded),
                               1e-9 * std::max(1.0, std::abs(ratio)));
    const long long steps = integral ? rounded : static_cast<long long>(std::floor(ratio + 1e-12));

    std::vector<double> pts;
    pts.reserve(static_cast<std::size_t>(steps) + 1);
    for (long long i = 0; i <= steps; ++i) {
        pts.push_back(min_m + static_cast<double>(i) * step_m);
    }
    if (integral) pts.back() = max_m;  // hit the endpoint exactly
    return pts;
}

void sweep_grid::validate() const {
    b_range.validate();
    wm_range.validate();
    require(!speeds_rpm.empty(), "sweep_grid: speeds_rpm must be non-empty");
    for (double s : speeds_rpm) {
        require(std::isfinite(s), "sweep_grid: speeds must be finite");
    }
}

// --- fingerprints -------------------------------------------------------------

std::uint64_t calibration_fingerprint(const torque_model& model) {
    std::uint64_t h = fnv_offset_basis;
    h = fnv1a(h, "geometry|");
    h = fnv1a_num(h, model.geometry.r1);
    h = fnv1a_num(h, model.geometry.r2);
    h = fnv1a_num(h, model.geometry.r3);
    h = fnv1a_num(h, model.geometry.magnet_thickness);
    h = fnv1a_num(h, model.geometry.air_gap);
    h = fnv1a_num(h, model.geometry.plate_thickness);
    h = fnv1a_num(h, model.geometry.back_iron_thickness);
    h = fnv1a(h, "magnets|");
    h = fnv1a_int(h, model.magnets.pole_pairs);
    h = fnv1a_num(h, model.magnets.pole_arc_ratio);
    h = fnv1a_num(h, model.magnets.remanence_T);
    h = fnv1a(h, "materials|");
    h = fnv1a_num(h, model.materials.mu0_Hm);
    h = fnv1a_num(h, model.materials.sigma_Sm);
    h = fnv1a(h, "truncation|");
    h = fnv1a_int(h, model.trunc.n_max);
    h = fnv1a_int(h, model.trunc.k_max);
    h = fnv1a_num(h, model.trunc.band_tolerance);
    return h;
}

std::uint64_t sweep_fingerprint(const torque_model& model, speed_convention convention,
                                const sweep_grid& grid) {
    std::uint64_t h = calibration_fingerprint(model);
    h = fnv1a(h, "lambda|");
    h = fnv1a_num(h, model.lambda_scale);
    h = fnv1a(h, convention == speed_convention::radians_per_second ? "conv=rad_s|"
                                                                    : "conv=rpm|");
    h = fnv1a(h, "grid|");
    h = fnv1a_num(h, grid.b_range.min_m);
    h = fnv1a_num(h, grid.b_range.max_m);
    h = fnv1a_num(h, grid.b_range.step_m);
    h = fnv1a_num(h, grid.wm_range.min_m);
    h = fnv1a_num(h, grid.wm_range.max_m);
    h = fnv1a_num(h, grid.wm_range.step_m);
    h = fnv1a(h, "speeds|");
    for (double s : grid.speeds_rpm) h = fnv1a_num(h, s);
    return h;
}

// --- sweep ---------------------------------------------------------------------

sweep_result run_sweep(const torque_model& model_template, const sweep_grid& grid,
                       speed_convention convention, int threads) {
    model_template.validate();
    grid.validate();

    const std::vector<double> bs = grid.b_range.points();
    const std::vector<double> ws = grid.wm_range.points();
    const std::vector<double>& speeds = grid.speeds_rpm;

    // Every derived geometry must be valid before any evaluation starts.
    for (double w : ws) {
        brake_geometry g = model_template.geometry;
        g.r1 = g.r2 - w;
        g.validate();
    }
    for (double b : bs) {
        brake_geometry g = model_template.geometry;
        g.magnet_thickness = b;
        g.validate();
    }

    sweep_result result;
    result.grid = grid;
    result.convention = convention;
    result.model_fingerprint = sweep_fingerprint(model_template, convention, grid);

    const std::size_t n_cells = bs.size() * ws.size();
    const std::size_t n_speeds = speeds.size();
    result.entries.resize(n_cells * n_speeds);

    unsigned workers = threads > 0 ? static_cast<unsigned>(threads)
                                   : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n_cells));

    auto evaluate_cells = [&](unsigned first) {
        for (std::size_t cell = first; cell < n_cells; cell += workers) {
            const std::size_t ib = cell / ws.size();
            const std::size_t iw = cell % ws.size();
            torque_model m = model_template;
            m.geometry.magnet_thickness = bs[ib];
            m.geometry.r1 = m.geometry.r2 - ws[iw];
            for (std::size_t is = 0; is < n_speeds; ++is) {
                sweep_entry& entry = result.entries[cell * n_speeds + is];
                entry.b_m = bs[ib];
                entry.w_m_m = ws[iw];
                entry.speed_rpm = speeds[is];
                try {
                    entry.torque_Nm = torque(m, {speeds[is], convention});
                } catch (const error& e) {
                    entry.torque_Nm = std::numeric_limits<double>::quiet_NaN();
                    entry.ok = false;
                    entry.status = e.name();
                } catch (const std::exception&) {
                    entry.torque_Nm = std::numeric_limits<double>::quiet_NaN();
                    entry.ok = false;
                    entry.status = "INVALID_ARGUMENT";
                }
            }
        }
    };

    if (workers <= 1) {
        evaluate_cells(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned t = 0; t < workers; ++t) pool.emplace_back(evaluate_cells, t);
        for (std::thread& t : pool) t.join();
    }
    return result;
}

// --- ranking -------------------------------------------------------------------

std::vector<design_solution> rank_solutions(const sweep_result& result, double target_Nm,
                                            bool feasible_only) {
    require(!result.entries.empty(), "rank_solutions: sweep result is empty");
    require(std::isfinite(target_Nm) && target_Nm >= 0.0,
            "rank_solutions: target torque must be >= 0");
    const std::size_t n_speeds = result.grid.speeds_rpm.size();
    require(result.entries.size() % n_speeds == 0,
            "rank_solutions: entry count does not match the grid");

    std::vector<design_solution> cells;
    cells.reserve(result.entries.size() / n_speeds);
    for (std::size_t base = 0; base < result.entries.size(); base += n_speeds) {
        design_solution sol;
        sol.b_m = result.entries[base].b_m;
        sol.w_m_m = result.entries[base].w_m_m;
        bool usable = true;
        double sum = 0.0;
        double min_t = std::numeric_limits<double>::infinity();
        for (std::size_t is = 0; is < n_speeds; ++is) {
            const sweep_entry& e = result.entries[base + is];
            if (!e.ok) {
                usable = false;
                break;
            }
            sol.torque_by_speed.emplace_back(e.speed_rpm, e.torque_Nm);
            sum += e.torque_Nm;
            min_t = std::min(min_t, e.torque_Nm);
        }
        if (!usable) continue;  // no aggregate for cells with failed evaluations
        sol.avg_torque_Nm = sum / static_cast<double>(n_speeds);
        sol.min_torque_Nm = min_t;
        sol.objective = std::abs(sol.avg_torque_Nm - target_Nm);
        sol.feasible = sol.min_torque_Nm >= target_Nm;
        cells.push_back(std::move(sol));
    }

    if (feasible_only) {
        std::erase_if(cells, [](const design_solution& s) { return !s.feasible; });
        if (cells.empty()) {
            std::ostringstream msg;
            msg << "no sweep cell keeps torque >= " << target_Nm
                << " N*m over the whole speed set; widen the grid, raise lambda via "
                   "calibration, or lower the target";
            throw error(errc::empty_feasible_set, msg.str());
        }
    }

    std::sort(cells.begin(), cells.end(),
              [](const design_solution& x, const design_solution& y) {
                  if (x.objective != y.objective) return x.objective < y.objective;
                  if (x.b_m != y.b_m) return x.b_m < y.b_m;
                  return x.w_m_m < y.w_m_m;
              });
    return cells;
}

// --- calibration -----------------------------------------------------------------

const std::vector<reference_design>& reference_designs() {
    static const std::vector<reference_design> designs = {
        {"solution-1",
         0.030,
         0.110,
         {{1000.0, 250.179},
          {2000.0, 252.359},
          {4000.0, 253.229},
          {6000.0, 253.229},
          {8000.0, 253.802}}},
        {"solution-2",
         0.040,
         0.110,
         {{1000.0, 307.630},
          {2000.0, 315.286},
          {4000.0, 315.28},
          {6000.0, 316.177},
          {8000.0, 316.710}}},
    };
    return designs;
}

namespace {

struct convention_fit {
    double lambda = 1.0;
    std::vector<calibration_residual> residuals;
    double max_abs = 0.0;
};

convention_fit fit_convention(const torque_model& model_template,
                              const calibration_reference& reference,
                              speed_convention convention) {
    torque_model base = model_template;
    base.geometry = reference.geometry;
    base.lambda_scale = 1.0;
    const double t_unit = torque(base, {reference.speed_rpm, convention});
    if (t_unit == 0.0) {
        throw error(errc::zero_reference,
                    "uncalibrated torque is zero at the calibration reference point");
    }

    convention_fit fit;
    fit.lambda = reference.torque_Nm / t_unit;

    const double ref_w = reference.geometry.r2 - reference.geometry.r1;
    for (const reference_design& d : reference_designs()) {
        torque_model m = model_template;
        m.geometry = reference.geometry;
        m.geometry.magnet_thickness = d.b_m;
        m.geometry.r1 = m.geometry.r2 - d.w_m_m;
        m.lambda_scale = 1.0;
        const bool ref_design = near(d.b_m, reference.geometry.magnet_thickness, 1e-12) &&
                                near(d.w_m_m, ref_w, 1e-12);
        for (const auto& [rpm, t_table] : d.torque_by_speed) {
            calibration_residual row;
            row.speed_rpm = rpm;
            row.solution_id = d.id;
            const bool is_reference_row = ref_design && near(rpm, reference.speed_rpm, 1e-9) &&
                                          near(t_table, reference.torque_Nm, 1e-9);
            if (is_reference_row) {
                row.relative_error = 0.0;  // exact by construction of lambda
            } else {
                const double t_model = fit.lambda * torque(m, {rpm, convention});
                row.relative_error = (t_model - t_table) / t_table;
            }
            fit.max_abs = std::max(fit.max_abs, std::abs(row.relative_error));
            fit.residuals.push_back(std::move(row));
        }
    }
    return fit;
}

}  // namespace

calibration_result calibrate_lambda(const torque_model& model_template,
                                    const calibration_reference& reference) {
    model_template.validate();
    reference.geometry.validate();
    require(std::isfinite(reference.speed_rpm), "calibration reference speed must be finite");
    require(std::isfinite(reference.torque_Nm) && reference.torque_Nm > 0.0,
            "calibration reference torque must be > 0");

    const convention_fit rad = fit_convention(model_template, reference,
                                              speed_convention::radians_per_second);
    const convention_fit rpm = fit_convention(model_template, reference,
                                              speed_convention::rpm);

    // Smaller maximum |relative error| wins; ties keep radians per second.
    const bool rpm_wins = rpm.max_abs < rad.max_abs;
    const convention_fit& chosen = rpm_wins ? rpm : rad;
    const convention_fit& other = rpm_wins ? rad : rpm;

    calibration_result result;
    result.lambda_star = chosen.lambda;
    result.reference_point = reference;
    result.residuals = chosen.residuals;
    result.convention_used = rpm_wins ? speed_convention::rpm
                                      : speed_convention::radians_per_second;
    result.max_abs_residual = chosen.max_abs;
    result.lambda_star_other = other.lambda;
    result.max_abs_residual_other = other.max_abs;
    result.residuals_other = other.residuals;
    return result;
}

// --- requirement check -------------------------------------------------------------

requirement_report check_requirement(const design_solution& solution,
                                     const requirement_spec& req) {
    req.validate();
    require(!solution.torque_by_speed.empty(), "check_requirement: solution has no samples");
    bool has_low = false, has_high = false;
    for (const auto& [rpm, torque_Nm] : solution.torque_by_speed) {
        (void)torque_Nm;
        if (near(rpm, req.speed_range_rpm.first, 1e-9)) has_low = true;
        if (near(rpm, req.speed_range_rpm.second, 1e-9)) has_high = true;
    }
    require(has_low && has_high,
            "check_requirement: solution must cover both speed-range endpoints");

    requirement_report report;
    report.per_wheel_torque_Nm = req.per_wheel_torque_Nm;
    report.pass = true;
    for (const auto& [rpm, torque_Nm] : solution.torque_by_speed) {
        speed_margin m;
        m.speed_rpm = rpm;
        m.torque_Nm = torque_Nm;
        m.margin_Nm = torque_Nm - req.per_wheel_torque_Nm;
        m.pass = torque_Nm >= req.per_wheel_torque_Nm;
        report.pass = report.pass && m.pass;
        report.margins.push_back(m);
    }
    return report;
}

}  // namespace ecb
