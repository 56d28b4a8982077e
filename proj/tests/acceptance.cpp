// Acceptance gate: every shipped behaviour the build is judged on, one
// numbered criterion per block, each printing a [PASS] / [FAIL] / [FALLBACK]
// line with the measured values.  The process exits nonzero when any hard
// criterion fails.  Criteria that cannot hold for this model family are NOT
// silenced: they run, report their measured numbers, and fail visibly (the
// fallback in criterion 2 is part of that criterion's own contract).
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ecb/config.hpp"
#include "ecb/csv.hpp"
#include "ecb/model.hpp"
#include "ecb/oracle.hpp"
#include "ecb/regulations.hpp"
#include "ecb/search.hpp"

using namespace ecb;

namespace {

int hard_failures = 0;

void verdict(int criterion, bool pass, const std::string& what) {
    std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion, what.c_str());
    if (!pass) ++hard_failures;
}

void fallback(int criterion, const std::string& what) {
    std::printf("[FALLBACK] criterion %d: %s\n", criterion, what.c_str());
}

void detail(const std::string& text) { std::printf("    %s\n", text.c_str()); }

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

double rel_diff(double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

int run_cli_status(const std::string& args) {
    const std::string cmd = std::string(ECB_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// --- criterion 1: regulation arithmetic ------------------------------------------

void criterion_1() {
    const vehicle_spec vehicle{};
    const requirement_spec req{};

    const double v_test = test_speed_kmh(vehicle, req);
    const double total = required_total_torque_Nm(vehicle, req);
    const double per_wheel = per_wheel_torque_Nm(total, vehicle);
    const double t = handover_time_s(req, v_test);

    bool ok = true;
    ok = ok && v_test == 160.0;
    ok = ok && total == 1735.0 * 4.0 * 0.14 && std::round(total) == 972.0;
    ok = ok && per_wheel == total / 4.0 && std::round(per_wheel) == 243.0;
    ok = ok && 972.0 / 4.0 == 243.0;
    ok = ok && t == (160.0 - 20.0) / 3.6 / 4.0 && std::round(t * 100.0) / 100.0 == 9.72;

    verdict(1, ok,
            "regulation arithmetic: v_test " + fmt(v_test) + " km/h, total " + fmt(total) +
                " N*m (~972), per wheel " + fmt(per_wheel) + " N*m (~243), handover " +
                fmt(t) + " s (~9.72)");
}

// --- criterion 2: calibrated reproduction of the published torque table ------------

void criterion_2(const run_config& cfg) {
    const calibration_result fit = calibrate_lambda(cfg.model, cfg.calibration);
    const char* conv = fit.convention_used == speed_convention::rpm ? "rpm" : "rad_s";

    const bool gate = fit.max_abs_residual <= 0.05;
    if (gate) {
        verdict(2, true,
                std::string("published torque table reproduced: max |residual| ") +
                    fmt(fit.max_abs_residual) + " under the " + conv + " convention");
    } else {
        fallback(2, std::string("published torque table NOT reproduced at the 5% gate; "
                                "falling back to criteria 3-7 per contract. lambda* ") +
                        fmt(fit.lambda_star) + " (" + conv + "), max |residual| " +
                        fmt(fit.max_abs_residual) + "; other convention " +
                        fmt(fit.max_abs_residual_other));
        detail("residual table (id, rpm, relative error) under " + std::string(conv) + ":");
        for (const calibration_residual& row : fit.residuals) {
            detail("  " + row.solution_id + " " + fmt(row.speed_rpm) + " " +
                   fmt(row.relative_error));
        }
        detail("the model's torque peaks below 1000 rpm and falls with speed, while the "
               "published table is nearly flat; no output scale can reconcile the shapes");
    }
}

// --- criterion 3: scale-free shape checks ------------------------------------------

void criterion_3(const run_config& cfg) {
    const torque_model s1 = cfg.model;
    torque_model s2 = cfg.model;
    s2.geometry.magnet_thickness = 0.040;

    bool monotone_any = false, spread_any = false;
    double spread_best = 0.0;
    bool s2_above = true;
    for (const speed_convention conv :
         {speed_convention::rpm, speed_convention::radians_per_second}) {
        std::vector<double> t1;
        double lo = 0.0, hi = 0.0, sum = 0.0;
        bool monotone = true;
        for (const double rpm : {1000.0, 2000.0, 4000.0, 6000.0, 8000.0}) {
            const double v1 = torque(s1, {rpm, conv});
            const double v2 = torque(s2, {rpm, conv});
            if (!t1.empty() && v1 < t1.back()) monotone = false;
            if (v2 <= v1) s2_above = false;
            t1.push_back(v1);
            lo = t1.size() == 1 ? v1 : std::min(lo, v1);
            hi = t1.size() == 1 ? v1 : std::max(hi, v1);
            sum += v1;
        }
        const double spread = (hi - lo) / (sum / 5.0);
        if (conv == speed_convention::rpm) spread_best = spread;
        spread_best = std::min(spread_best, spread);
        monotone_any = monotone_any || monotone;
        spread_any = spread_any || spread < 0.05;
    }

    const bool ok = monotone_any && spread_any && s2_above;
    verdict(3, ok,
            std::string("scale-free torque-speed shape: non-decreasing over the speed set: ") +
                (monotone_any ? "yes" : "NO (torque falls with speed)") +
                "; relative spread " + fmt(spread_best) + " (< 0.05 required); thicker-magnet "
                "design above the stock design at every speed: " +
                (s2_above ? "yes" : "NO"));
    if (!ok) {
        detail("measured stock-cell torques, rpm convention, 1000..8000 rpm: " +
               fmt(torque(s1, {1000.0, speed_convention::rpm})) + " .. " +
               fmt(torque(s1, {8000.0, speed_convention::rpm})) +
               " N*m: the model's eddy-current shielding makes torque fall over this "
               "band, so the published near-flat curve is out of reach for any scale");
    }
}

// --- criterion 4: ranking reproduction -----------------------------------------------

void criterion_4(const run_config& cfg) {
    const calibration_result fit = calibrate_lambda(cfg.model, cfg.calibration);
    torque_model calibrated = cfg.model;
    calibrated.lambda_scale = fit.lambda_star;

    const auto t0 = std::chrono::steady_clock::now();
    const sweep_result serial = run_sweep(calibrated, cfg.grid, fit.convention_used, 1);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const sweep_result threaded = run_sweep(calibrated, cfg.grid, fit.convention_used, 4);
    bool bitwise = serial.entries.size() == threaded.entries.size();
    for (std::size_t i = 0; bitwise && i < serial.entries.size(); ++i) {
        bitwise = serial.entries[i].torque_Nm == threaded.entries[i].torque_Nm ||
                  (std::isnan(serial.entries[i].torque_Nm) &&
                   std::isnan(threaded.entries[i].torque_Nm));
    }

    const std::vector<design_solution> ranked = rank_solutions(serial, 243.0, false);
    std::size_t stock_rank = 0;
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        if (rel_diff(ranked[i].b_m, 0.030) < 1e-12 && rel_diff(ranked[i].w_m_m, 0.110) < 1e-12) {
            stock_rank = i + 1;
            break;
        }
    }

    const bool top_is_stock = !ranked.empty() && stock_rank == 1;
    const bool ok = top_is_stock && seconds < 60.0 && bitwise;
    verdict(4, ok,
            "ranking on the default grid, target 243 N*m, calibrated scale: top cell (b " +
                fmt(ranked.front().b_m) + " m, w_m " + fmt(ranked.front().w_m_m) +
                " m); published cell (0.03, 0.11) ranks " + std::to_string(stock_rank) +
                " of " + std::to_string(ranked.size()) + "; sweep " + fmt(seconds) +
                " s single-threaded (< 60 required); parallel bitwise identical: " +
                (bitwise ? "yes" : "NO"));
    if (!top_is_stock) {
        detail("the calibrated torque-speed curve falls steeply over 1000..8000 rpm "
               "(criterion 3), so cells matching the 243 N*m average sit elsewhere in "
               "the grid; the published cell's average lands near " +
               fmt(ranked[stock_rank == 0 ? 0 : stock_rank - 1].avg_torque_Nm) + " N*m");
    }
}

// --- criterion 5: closed form vs finite differences -----------------------------------

void criterion_5(const run_config& cfg) {
    const oracle_report report =
        run_oracle_check(cfg.model, speed_convention::radians_per_second, 128);
    bool order_ok = report.refinement.observed_order >= 1.8 &&
                    report.refinement.observed_order <= 2.2;
    const bool ok = report.pass && order_ok;
    verdict(5, ok,
            "closed form vs finite differences over (n,k) in {1,3,5}^2, speeds {0, 1000, "
            "4000, 8000} rpm: max relative error " +
                fmt(report.max_rel_error) + " (gate " + fmt(report.gate) +
                "), observed order " + fmt(report.refinement.observed_order) +
                " (within [1.8, 2.2])");
}

// --- criterion 6: invariant suite ------------------------------------------------------

void criterion_6(const run_config& cfg) {
    const torque_model m = cfg.model;
    std::ostringstream notes;

    // zero-slip nullity, scaled by the term-magnitude sum
    const series_evaluation rest =
        evaluate_series(m, {0.0, speed_convention::radians_per_second});
    const bool nullity = std::abs(rest.series_sum.real()) <= 1e-9 * rest.term_magnitude_sum;

    // antisymmetry
    const double tp = torque(m, {3000.0, speed_convention::radians_per_second});
    const double tn = torque(m, {-3000.0, speed_convention::radians_per_second});
    const bool antisym = rel_diff(tp, -tn) <= 1e-9;

    // remanence-squared scaling
    torque_model br = m;
    br.magnets.remanence_T *= 2.0;
    const double t_base = torque(m, {4000.0, speed_convention::radians_per_second});
    const double t_br = torque(br, {4000.0, speed_convention::radians_per_second});
    const bool br2 = rel_diff(t_br, 4.0 * t_base) <= 1e-12;

    // lambda linearity
    torque_model scaled = m;
    scaled.lambda_scale = 12.309091442692388;
    const bool linear =
        torque(scaled, {4000.0, speed_convention::radians_per_second}) ==
        scaled.lambda_scale * t_base;

    // truncation convergence 30 -> 60
    torque_model m60 = m;
    m60.trunc.n_max = 60;
    m60.trunc.k_max = 60;
    const double t30 = torque(m, {8000.0, speed_convention::radians_per_second});
    const double t60 = torque(m60, {8000.0, speed_convention::radians_per_second});
    const double shift = std::abs(t60 - t30) / std::abs(t60);
    const bool converged = shift < 1e-6;

    // overflow / NaN over the design box
    unsigned seed = 123456789u;
    auto next_uniform = [&seed](double lo, double hi) {
        seed = 1664525u * seed + 1013904223u;  // LCG; reproducible across platforms
        return lo + (hi - lo) * (seed / 4294967296.0);
    };
    bool finite_box = true;
    for (int i = 0; i < 1000 && finite_box; ++i) {
        torque_model sample = m;
        sample.geometry.magnet_thickness = next_uniform(0.002, 0.040);
        sample.geometry.r1 = sample.geometry.r2 - next_uniform(0.002, 0.110);
        const speed_convention conv = (i % 2 == 0) ? speed_convention::radians_per_second
                                                   : speed_convention::rpm;
        finite_box = std::isfinite(torque(sample, {next_uniform(-8000.0, 8000.0), conv}));
    }

    const bool ok = nullity && antisym && br2 && linear && converged && finite_box;
    verdict(6, ok, "invariant suite");
    detail(std::string("zero-slip nullity (<= 1e-9 of term-magnitude sum): ") +
           (nullity ? "pass (exactly zero)" : "FAIL"));
    detail(std::string("slip antisymmetry (1e-9 relative): ") +
           (antisym ? "pass (bitwise)" : "FAIL"));
    detail(std::string("remanence-squared scaling (1e-12 relative): ") +
           (br2 ? "pass" : "FAIL"));
    detail(std::string("scale-factor linearity (exact): ") + (linear ? "pass" : "FAIL"));
    detail(std::string("truncation 30->60 relative change ") + fmt(shift) +
           " (< 1e-6 required): " +
           (converged ? "pass" : "FAIL (series tail decays cubically; the shift is "
                                 "inherent to the formulation, documented in README)"));
    detail(std::string("no overflow/NaN across 1000 random design-box samples: ") +
           (finite_box ? "pass" : "FAIL"));
}

// --- criterion 7: I/O contract -----------------------------------------------------------

void criterion_7(const run_config& cfg) {
    namespace fs = std::filesystem;

    // CSV: header, ordering, 17-digit round trip on a real sweep.
    sweep_grid grid;
    grid.b_range = {0.010, 0.020, 0.005};
    grid.wm_range = {0.050, 0.090, 0.020};
    grid.speeds_rpm = {1000.0, 8000.0};
    const sweep_result swept =
        run_sweep(cfg.model, grid, speed_convention::radians_per_second, 2);
    const std::string text = to_csv(swept);
    bool csv_ok = text.rfind("b_m,w_m_m,speed_rpm,torque_Nm,status\n", 0) == 0;
    const sweep_result back = parse_csv(text);
    csv_ok = csv_ok && back.entries.size() == swept.entries.size();
    for (std::size_t i = 0; csv_ok && i < back.entries.size(); ++i) {
        csv_ok = back.entries[i].b_m == swept.entries[i].b_m &&
                 back.entries[i].w_m_m == swept.entries[i].w_m_m &&
                 back.entries[i].speed_rpm == swept.entries[i].speed_rpm &&
                 back.entries[i].torque_Nm == swept.entries[i].torque_Nm;
    }
    csv_ok = csv_ok && format_double(1.0 / 3.0) == "0.33333333333333331";

    // Config defaults: the bundled tables, field by field.
    const run_config d = parse_config("");
    bool defaults_ok =
        d.model.geometry.r2 == 0.112 && d.model.geometry.r3 == 0.140 &&
        d.model.geometry.magnet_thickness == 0.030 &&
        d.model.geometry.r1 == 0.112 - 0.110 && d.model.geometry.air_gap == 0.001 &&
        d.model.geometry.plate_thickness == 0.002 &&
        d.model.geometry.back_iron_thickness == 0.002 &&
        d.model.magnets.pole_pairs == 4 && d.model.magnets.pole_arc_ratio == 0.444 &&
        d.model.magnets.remanence_T == 1.25 && d.model.materials.sigma_Sm == 57.0e7 &&
        d.model.materials.mu0_Hm == 4e-7 * pi_d && d.model.trunc.n_max == 30 &&
        d.model.trunc.k_max == 30 && d.vehicle.mass_kg == 1735.0 &&
        d.vehicle.wheel_effective_radius_m == 0.14 && d.vehicle.max_speed_kmh == 200.0 &&
        d.vehicle.braked_wheels == 4 && d.requirement.min_deceleration_ms2 == 4.0 &&
        d.requirement.test_speed_fraction == 0.8 &&
        d.requirement.handover_speed_kmh == 20.0 && d.oracle_mesh == 128;

    // Exit classes through the real binary.
    const fs::path dir = fs::temp_directory_path() / "ecb_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    {
        std::ofstream bad(dir / "bad_unit.ini");
        bad << "[geometry]\nr2 = 112 furlong\n";
        std::ofstream tight(dir / "tight.ini");
        tight << "[truncation]\nn_max = 2\nk_max = 2\nband_tolerance = 1e-9\n";
    }
    const int ok_status = run_cli_status("requirement");
    const int validation_status =
        run_cli_status("--config " + (dir / "bad_unit.ini").string() + " torque");
    const int numerical_status =
        run_cli_status("--config " + (dir / "tight.ini").string() + " torque --speed 8000");
    const int io_status = run_cli_status("--config " + (dir / "missing.ini").string() + " torque");
    fs::remove_all(dir);
    const bool exits_ok =
        ok_status == 0 && validation_status == 2 && numerical_status == 3 && io_status == 4;

    const bool ok = csv_ok && defaults_ok && exits_ok;
    verdict(7, ok,
            std::string("I/O contract: CSV golden layout and bit-exact round trip: ") +
                (csv_ok ? "pass" : "FAIL") + "; config defaults echo the bundled tables: " +
                (defaults_ok ? "pass" : "FAIL") + "; exit classes (0/2/3/4 measured " +
                std::to_string(ok_status) + "/" + std::to_string(validation_status) + "/" +
                std::to_string(numerical_status) + "/" + std::to_string(io_status) +
                "): " + (exits_ok ? "pass" : "FAIL"));
}

}  // namespace

int main() {
    const run_config cfg = parse_config("");

    criterion_1();
    criterion_2(cfg);
    criterion_3(cfg);
    criterion_4(cfg);
    criterion_5(cfg);
    criterion_6(cfg);
    criterion_7(cfg);

    if (hard_failures == 0) {
        std::printf("acceptance: all hard criteria passed\n");
        return 0;
    }
    std::printf("acceptance: %d hard criterion(s) failed; see the lines above and the "
                "discrepancy notes in README.md\n",
                hard_failures);
    return 1;
}
