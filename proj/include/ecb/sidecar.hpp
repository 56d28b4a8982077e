#pragma once
#include <cstdint>
#include <optional>
#include <string>

#include "ecb/model.hpp"
#include "ecb/search.hpp"

namespace ecb {

// ---------------------------------------------------------------------------
// Calibration persistence.  cmd_calibrate writes the fitted scale factor to a
// small text record next to the output (or the working directory), named by
// the calibration fingerprint of the physical model inputs:
//
//   calibration-<16 hex digits>.txt
//
// Later runs recompute the fingerprint from their own config; when a record
// with that exact name exists and its embedded fingerprint agrees, the stored
// lambda and speed convention are applied automatically (explicit --lambda or
// --speed-convention flags win over the record).  A record written for a
// different model can therefore never leak into a run: the address is the
// content hash.
// ---------------------------------------------------------------------------

struct calibration_record {
    std::uint64_t fingerprint = 0;
    double lambda_star = 1.0;
    speed_convention convention = speed_convention::radians_per_second;
    double reference_b_m = 0.0;
    double reference_w_m_m = 0.0;
    double reference_speed_rpm = 0.0;
    double reference_torque_Nm = 0.0;
    double max_abs_residual = 0.0;
};

// "calibration-<16 hex>.txt"
std::string sidecar_file_name(std::uint64_t fingerprint);

// Serializes / parses the record as key = value text.  parse throws
// PARSE_ERROR on malformed content.
std::string format_calibration_record(const calibration_record& record);
calibration_record parse_calibration_record(const std::string& text);

// Writes the record into `directory` under its content-addressed name and
// returns the full path.  Throws IO_ERROR on failure.
std::string write_calibration_record(const std::string& directory,
                                     const calibration_record& record);

// Loads the record for `fingerprint` from `directory` if present and
// consistent; returns nothing when the file is absent or names a different
// fingerprint than it carries.
std::optional<calibration_record> try_load_calibration(const std::string& directory,
                                                       std::uint64_t fingerprint);

}  // namespace ecb
