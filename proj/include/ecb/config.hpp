#pragma once
#include <string>
#include <vector>

#include "ecb/model.hpp"
#include "ecb/regulations.hpp"
#include "ecb/search.hpp"

namespace ecb {

// ---------------------------------------------------------------------------
// Strict configuration loading.
//
// The file format is sectioned key-value text with unit-suffixed values:
//
//   [geometry]
//   b = "30 mm"
//   w_m = "110 mm"
//
//   [materials]
//   conductivity = "57e7 S/m"
//
// Rules: every key belongs to a known section, unknown keys and sections are
// rejected (PARSE_ERROR with line and column), values carry the unit their
// field requires (UNIT_ERROR naming the field otherwise), and loaded values
// must sit inside their validated intervals (RANGE_ERROR citing the bound).
// User units (mm, T, S/m, kg, km/h, rpm...) convert to strict SI exactly
// once, here; everything downstream is SI.
//
// Absent keys fall back to the built-in defaults (the bundled brake: 140 mm
// disc, 112 mm ring outer radius, 30 mm magnets, 110 mm ring width, 4 pole
// pairs, 0.444 arc ratio, 1 mm gap, 2 mm plate and back irons, 57e7 S/m,
// 1.25 T).  The effective value of every field, with its origin, is recorded
// for the verbose echo.
// ---------------------------------------------------------------------------

struct provenance_entry {
    std::string field;   // e.g. "geometry.r2"
    std::string display; // value with canonical SI unit, e.g. "0.112 m"
    std::string origin;  // "user", "derived (...)", or "default (...)"
};

struct run_config {
    torque_model model;                 // lambda_scale 1 unless set later (flag/sidecar)
    sweep_grid grid;
    vehicle_spec vehicle;
    requirement_spec requirement;
    calibration_reference calibration;  // reference point for cmd_calibrate
    int oracle_mesh = 128;              // mesh points per layer for the solver check
    std::vector<provenance_entry> provenance;  // schema order, for the verbose echo
};

// Parses configuration text (contents of a config file; empty text gives all
// defaults).  Throws PARSE_ERROR / UNIT_ERROR / RANGE_ERROR.
run_config parse_config(const std::string& text);

// Reads and parses a config file.  Throws IO_ERROR when the file cannot be
// read, otherwise as parse_config.
run_config load_config(const std::string& path);

// The verbose echo: one "field = value [origin]" line per schema field.
std::string format_provenance(const run_config& config);

}  // namespace ecb
