// Command-line front end: torque evaluation, (b, w_m) sweeps, ranking,
// lambda calibration, layer-solver self-checks, and the regulation torque
// arithmetic.  All physics lives in the library; this file is argument
// handling, unit-tagged text output, and the exit-status contract
// (0 success, 2 validation, 3 numerical, 4 I/O).
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "ecb/config.hpp"
#include "ecb/csv.hpp"
#include "ecb/model.hpp"
#include "ecb/oracle.hpp"
#include "ecb/regulations.hpp"
#include "ecb/search.hpp"
#include "ecb/sidecar.hpp"

namespace {

struct global_options {
    std::string config_path;
    std::string out_path;
    bool verbose = false;
    std::string convention_flag;  // empty, "rad_s", or "rpm"
    double lambda_flag = 0.0;
    bool lambda_given = false;
};

std::string hex16(std::uint64_t v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
    return buf;
}

// Directory the sidecar lives in: beside --out when given, else the working
// directory.
std::string sidecar_directory(const global_options& opts) {
    if (opts.out_path.empty()) return ".";
    const std::filesystem::path parent = std::filesystem::path(opts.out_path).parent_path();
    return parent.empty() ? std::string(".") : parent.string();
}

// Primary output: the file when --out is given (with a short note on stdout),
// stdout otherwise.
void deliver(const std::string& text, const global_options& opts, const char* what) {
    if (opts.out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(opts.out_path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw ecb::error(ecb::errc::io_error, "cannot write '" + opts.out_path + "'");
    }
    out << text;
    out.flush();
    if (!out) {
        throw ecb::error(ecb::errc::io_error, "failed writing '" + opts.out_path + "'");
    }
    std::cout << "wrote " << what << " to " << opts.out_path << "\n";
}

const char* convention_name(ecb::speed_convention c) {
    return c == ecb::speed_convention::rpm ? "rpm" : "rad_s";
}

// Config plus the resolved lambda / speed convention for model-evaluating
// commands.  Resolution order: explicit flags, then a fingerprint-matching
// calibration sidecar, then the defaults (lambda 1, rad_s).
struct resolved_run {
    ecb::run_config cfg;
    ecb::speed_convention convention = ecb::speed_convention::radians_per_second;
    std::string lambda_origin = "default (1)";
    std::string convention_origin = "default (rad_s)";
};

ecb::run_config load(const global_options& opts) {
    ecb::run_config cfg = opts.config_path.empty() ? ecb::parse_config("")
                                                   : ecb::load_config(opts.config_path);
    if (opts.verbose) {
        std::cerr << ecb::format_provenance(cfg);
    }
    return cfg;
}

resolved_run resolve(const global_options& opts) {
    resolved_run run;
    run.cfg = load(opts);

    std::optional<ecb::calibration_record> record;
    if (!opts.lambda_given || opts.convention_flag.empty()) {
        record = ecb::try_load_calibration(sidecar_directory(opts),
                                           ecb::calibration_fingerprint(run.cfg.model));
    }

    if (opts.lambda_given) {
        run.cfg.model.lambda_scale = opts.lambda_flag;
        run.lambda_origin = "flag";
    } else if (record) {
        run.cfg.model.lambda_scale = record->lambda_star;
        run.lambda_origin =
            "sidecar " + ecb::sidecar_file_name(record->fingerprint);
    }

    if (!opts.convention_flag.empty()) {
        run.convention = opts.convention_flag == "rpm"
                             ? ecb::speed_convention::rpm
                             : ecb::speed_convention::radians_per_second;
        run.convention_origin = "flag";
    } else if (record) {
        run.convention = record->convention;
        run.convention_origin =
            "sidecar " + ecb::sidecar_file_name(record->fingerprint);
    }

    if (opts.verbose) {
        std::cerr << "lambda = " << ecb::format_double(run.cfg.model.lambda_scale) << " ["
                  << run.lambda_origin << "]\n";
        std::cerr << "speed_convention = " << convention_name(run.convention) << " ["
                  << run.convention_origin << "]\n";
    }
    return run;
}

// --- subcommands ----------------------------------------------------------------

int cmd_torque(const global_options& opts, double speed_rpm) {
    resolved_run run = resolve(opts);
    const ecb::operating_point op{speed_rpm, run.convention};
    const double torque_Nm = ecb::torque(run.cfg.model, op);

    std::ostringstream os;
    os << "speed_rpm = " << ecb::format_double(speed_rpm) << "\n";
    os << "speed_convention = " << convention_name(run.convention) << "\n";
    os << "lambda = " << ecb::format_double(run.cfg.model.lambda_scale) << "\n";
    os << "torque_Nm = " << ecb::format_double(torque_Nm) << "\n";
    os << "dissipated_power_W = "
       << ecb::format_double(ecb::dissipated_power(torque_Nm, op)) << "\n";
    deliver(os.str(), opts, "torque record");
    return 0;
}

int cmd_sweep(const global_options& opts, int threads) {
    resolved_run run = resolve(opts);
    const ecb::sweep_result result =
        ecb::run_sweep(run.cfg.model, run.cfg.grid, run.convention, threads);
    if (opts.verbose || !opts.out_path.empty()) {
        std::cerr << "model_fingerprint = " << hex16(result.model_fingerprint) << "\n";
    }
    std::ostringstream what;
    what << result.entries.size() << " sweep rows";
    deliver(ecb::to_csv(result), opts, what.str().c_str());
    return 0;
}

int cmd_rank(const global_options& opts, double target_flag, bool target_given,
             bool feasible_only, int top) {
    resolved_run run = resolve(opts);
    const double target =
        target_given ? target_flag : run.cfg.requirement.per_wheel_torque_Nm;

    const ecb::sweep_result sweep =
        ecb::run_sweep(run.cfg.model, run.cfg.grid, run.convention, 0);
    const std::vector<ecb::design_solution> ranked =
        ecb::rank_solutions(sweep, target, feasible_only);

    std::ostringstream os;
    os << "target_Nm = " << ecb::format_double(target) << "\n";
    os << "cells_ranked = " << ranked.size() << "\n";
    os << "rank  b_m      w_m_m   ";
    for (double s : run.cfg.grid.speeds_rpm) {
        char head[32];
        std::snprintf(head, sizeof head, " T@%-7.6g", s);
        os << head;
    }
    os << "  avg_Nm     min_Nm     |avg-target|  feasible\n";
    const std::size_t shown = std::min<std::size_t>(top, ranked.size());
    for (std::size_t i = 0; i < shown; ++i) {
        const ecb::design_solution& sol = ranked[i];
        char line[96];
        std::snprintf(line, sizeof line, "%-5zu %-8.6g %-7.6g ", i + 1, sol.b_m, sol.w_m_m);
        os << line;
        for (const auto& [rpm, torque_Nm] : sol.torque_by_speed) {
            (void)rpm;
            char cell[32];
            std::snprintf(cell, sizeof cell, " %-9.6g", torque_Nm);
            os << cell;
        }
        char tail[64];
        std::snprintf(tail, sizeof tail, "  %-10.6g %-10.6g %-13.6g %s\n", sol.avg_torque_Nm,
                      sol.min_torque_Nm, sol.objective, sol.feasible ? "yes" : "no");
        os << tail;
    }
    deliver(os.str(), opts, "ranking table");
    return 0;
}

int cmd_calibrate(const global_options& opts) {
    ecb::run_config cfg = load(opts);
    const ecb::calibration_result result =
        ecb::calibrate_lambda(cfg.model, cfg.calibration);

    ecb::calibration_record record;
    record.fingerprint = ecb::calibration_fingerprint(cfg.model);
    record.lambda_star = result.lambda_star;
    record.convention = result.convention_used;
    record.reference_b_m = result.reference_point.geometry.magnet_thickness;
    record.reference_w_m_m =
        result.reference_point.geometry.r2 - result.reference_point.geometry.r1;
    record.reference_speed_rpm = result.reference_point.speed_rpm;
    record.reference_torque_Nm = result.reference_point.torque_Nm;
    record.max_abs_residual = result.max_abs_residual;
    const std::string sidecar_path =
        ecb::write_calibration_record(sidecar_directory(opts), record);

    std::ostringstream os;
    os << "lambda_star = " << ecb::format_double(result.lambda_star) << "\n";
    os << "convention_used = " << convention_name(result.convention_used) << "\n";
    os << "max_abs_residual = " << ecb::format_double(result.max_abs_residual) << "\n";
    os << "lambda_star_other_convention = "
       << ecb::format_double(result.lambda_star_other) << "\n";
    os << "max_abs_residual_other_convention = "
       << ecb::format_double(result.max_abs_residual_other) << "\n";
    os << "reference = b " << ecb::format_double(record.reference_b_m) << " m, w_m "
       << ecb::format_double(record.reference_w_m_m) << " m, "
       << ecb::format_double(record.reference_speed_rpm) << " rpm, "
       << ecb::format_double(record.reference_torque_Nm) << " N*m\n";
    os << "residuals (id, speed_rpm, relative_error):\n";
    for (const ecb::calibration_residual& r : result.residuals) {
        os << "  " << r.solution_id << " " << ecb::format_double(r.speed_rpm) << " "
           << ecb::format_double(r.relative_error) << "\n";
    }
    os << "sidecar = " << sidecar_path << "\n";
    deliver(os.str(), opts, "calibration report");
    return 0;
}

int cmd_oracle_check(const global_options& opts) {
    resolved_run run = resolve(opts);
    const ecb::oracle_report report =
        ecb::run_oracle_check(run.cfg.model, run.convention, run.cfg.oracle_mesh);
    deliver(ecb::format_oracle_report(report), opts, "oracle report");
    return report.pass ? 0 : 3;
}

int cmd_requirement(const global_options& opts) {
    ecb::run_config cfg = load(opts);
    const double v_test = ecb::test_speed_kmh(cfg.vehicle, cfg.requirement);
    const double total = ecb::required_total_torque_Nm(cfg.vehicle, cfg.requirement);
    const double per_wheel = ecb::per_wheel_torque_Nm(total, cfg.vehicle);

    std::ostringstream os;
    if (!cfg.vehicle.within_lightweight_class()) {
        os << "warning: mass " << ecb::format_double(cfg.vehicle.mass_kg)
           << " kg exceeds the 3500 kg lightweight class; these sizing rules may not apply\n";
    }
    os << "test_speed_kmh = " << ecb::format_double(v_test) << "\n";
    os << "total_torque_Nm = " << ecb::format_double(total) << " (display: "
       << ecb::format_double(std::round(total)) << ")\n";
    os << "per_wheel_torque_Nm = " << ecb::format_double(per_wheel) << " (display: "
       << ecb::format_double(std::round(per_wheel)) << ")\n";
    if (cfg.requirement.min_deceleration_ms2 > 0.0) {
        os << "handover_time_s = "
           << ecb::format_double(ecb::handover_time_s(cfg.requirement, v_test)) << "\n";
    } else {
        os << "handover_time_s = undefined (zero deceleration)\n";
    }
    deliver(os.str(), opts, "requirement report");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"axial-flux eddy-current brake design tool"};
    app.require_subcommand(1);

    global_options opts;
    app.add_option("--config", opts.config_path, "configuration file (defaults apply when omitted)");
    app.add_option("--out", opts.out_path, "write the primary output to this file");
    app.add_flag("--verbose", opts.verbose, "echo effective parameters and their provenance");
    app.add_option("--speed-convention", opts.convention_flag,
                   "speed figure entering the field equations")
        ->check(CLI::IsMember({"rad_s", "rpm"}));
    CLI::Option* lambda_opt =
        app.add_option("--lambda", opts.lambda_flag, "output scale factor (overrides sidecar)")
            ->check(CLI::PositiveNumber);

    double speed_rpm = 1000.0;
    CLI::App* torque_cmd = app.add_subcommand("torque", "evaluate torque at one speed");
    torque_cmd->fallthrough();
    torque_cmd->add_option("--speed", speed_rpm, "slip speed in rpm (may be negative)");

    int threads = 0;
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "evaluate the (b, w_m, speed) grid as CSV");
    sweep_cmd->fallthrough();
    sweep_cmd->add_option("--threads", threads, "worker threads (0 = hardware)");

    double target = 0.0;
    bool feasible_only = false;
    int top = 10;
    CLI::App* rank_cmd = app.add_subcommand("rank", "rank sweep cells against a torque target");
    rank_cmd->fallthrough();
    CLI::Option* target_opt =
        rank_cmd->add_option("--target", target, "per-wheel torque target in N*m");
    rank_cmd->add_flag("--feasible-only", feasible_only,
                       "keep only cells whose minimum torque meets the target");
    rank_cmd->add_option("--top", top, "rows to print")->check(CLI::PositiveNumber);

    CLI::App* calibrate_cmd =
        app.add_subcommand("calibrate", "fit lambda to the reference point and store a sidecar");
    calibrate_cmd->fallthrough();
    CLI::App* oracle_cmd = app.add_subcommand(
        "oracle-check", "compare the closed-form layer response against finite differences");
    oracle_cmd->fallthrough();
    CLI::App* requirement_cmd =
        app.add_subcommand("requirement", "regulation torque arithmetic for the vehicle");
    requirement_cmd->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints the message
        return 2;     // command-line problems are validation errors
    }
    opts.lambda_given = lambda_opt->count() > 0;

    try {
        if (torque_cmd->parsed()) return cmd_torque(opts, speed_rpm);
        if (sweep_cmd->parsed()) return cmd_sweep(opts, threads);
        if (rank_cmd->parsed()) {
            return cmd_rank(opts, target, target_opt->count() > 0, feasible_only, top);
        }
        if (calibrate_cmd->parsed()) return cmd_calibrate(opts);
        if (oracle_cmd->parsed()) return cmd_oracle_check(opts);
        if (requirement_cmd->parsed()) return cmd_requirement(opts);
    } catch (const ecb::error& e) {
        std::cerr << e.what() << "\n";
        return e.exit_class();
    } catch (const std::invalid_argument& e) {
        std::cerr << "INVALID_ARGUMENT: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "ERROR: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
