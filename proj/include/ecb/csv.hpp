#pragma once
#include <string>

#include "ecb/search.hpp"

namespace ecb {

// ---------------------------------------------------------------------------
// Bit-exact sweep export.  Fixed header, LF line endings, UTF-8, and all
// floating-point fields printed with 17 significant digits so that parsing
// the text back reproduces every double exactly.  Failed cells keep their
// coordinates, carry an empty torque cell, and name the error in the status
// column.
// ---------------------------------------------------------------------------

inline constexpr const char* sweep_csv_header = "b_m,w_m_m,speed_rpm,torque_Nm,status";

// A double as "%.17g" text (round-trips through strtod bit-exactly).
std::string format_double(double value);

// The full CSV document for a sweep: header line plus one row per entry in
// sweep order.
std::string to_csv(const sweep_result& result);

// Parses a sweep CSV document produced by to_csv.  Only the entries are
// recoverable from the text; grid, convention, and fingerprint fields of the
// returned result are left at their defaults.  Throws PARSE_ERROR on an
// unexpected header or malformed row.
sweep_result parse_csv(const std::string& text);

}  // namespace ecb
