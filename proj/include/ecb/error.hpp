#pragma once
#include <stdexcept>
#include <string>

namespace ecb {

// Domain error identifiers.  Every throwing path in the library uses one of
// these so the CLI can map failures onto its exit-status contract:
// validation problems exit 2, numerical problems exit 3, I/O problems exit 4.
enum class errc {
    parse_error,             // malformed config text (carries line/column)
    unit_error,              // missing or wrong unit suffix on a config value
    range_error,             // value outside its allowed interval
    invalid_speeds,          // regulation speeds ordered wrongly
    degenerate_denominator,  // layer-response denominator collapsed
    non_converged,           // series truncation failed the band check
    singular_system,         // discrete operator not solvable
    no_convergence,          // mesh-refinement error estimate too large
    zero_reference,          // calibration reference torque is zero
    empty_feasible_set,      // no sweep cell meets the requirement
    io_error,                // file missing / unreadable / unwritable
};

constexpr const char* errc_name(errc code) {
    switch (code) {
        case errc::parse_error: return "PARSE_ERROR";
        case errc::unit_error: return "UNIT_ERROR";
        case errc::range_error: return "RANGE_ERROR";
        case errc::invalid_speeds: return "INVALID_SPEEDS";
        case errc::degenerate_denominator: return "DEGENERATE_DENOMINATOR";
        case errc::non_converged: return "NON_CONVERGED";
        case errc::singular_system: return "SINGULAR_SYSTEM";
        case errc::no_convergence: return "NO_CONVERGENCE";
        case errc::zero_reference: return "ZERO_REFERENCE";
        case errc::empty_feasible_set: return "EMPTY_FEASIBLE_SET";
        case errc::io_error: return "IO_ERROR";
    }
    return "UNKNOWN";
}

// Exit class per error kind: 2 = validation, 3 = numerical, 4 = I/O.
constexpr int errc_exit_class(errc code) {
    switch (code) {
        case errc::parse_error:
        case errc::unit_error:
        case errc::range_error:
        case errc::invalid_speeds:
            return 2;
        case errc::degenerate_denominator:
        case errc::non_converged:
        case errc::singular_system:
        case errc::no_convergence:
        case errc::zero_reference:
        case errc::empty_feasible_set:
            return 3;
        case errc::io_error:
            return 4;
    }
    return 3;
}

class error : public std::runtime_error {
public:
    error(errc code, std::string message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + std::move(message)),
          code_(code) {}

    errc code() const noexcept { return code_; }
    const char* name() const noexcept { return errc_name(code_); }
    int exit_class() const noexcept { return errc_exit_class(code_); }

private:
    errc code_;
};

}  // namespace ecb
