#include "ecb/csv.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <sstream>

namespace ecb {

namespace {

[[noreturn]] void row_fail(std::size_t line, const std::string& what) {
    std::ostringstream os;
    os << "csv line " << line << ": " << what;
    throw error(errc::parse_error, os.str());
}

// One comma-separated field; commas never appear inside sweep fields.
std::vector<std::string> split_fields(const std::string& row) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = row.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(row.substr(start));
            return fields;
        }
        fields.push_back(row.substr(start, comma - start));
        start = comma + 1;
    }
}

double parse_double_field(std::size_t line, const std::string& field, const std::string& text) {
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size() || text.empty()) {
        row_fail(line, "malformed " + field + " value '" + text + "'");
    }
    return v;
}

}  // namespace

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

std::string to_csv(const sweep_result& result) {
    std::string out;
    out.reserve(64 * (result.entries.size() + 1));
    out += sweep_csv_header;
    out += '\n';
    for (const sweep_entry& e : result.entries) {
        out += format_double(e.b_m);
        out += ',';
        out += format_double(e.w_m_m);
        out += ',';
        out += format_double(e.speed_rpm);
        out += ',';
        if (e.ok) out += format_double(e.torque_Nm);
        out += ',';
        out += e.status;
        out += '\n';
    }
    return out;
}

sweep_result parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string row;
    std::size_t line = 0;

    sweep_result result;
    if (!std::getline(in, row)) row_fail(1, "empty document");
    ++line;
    if (!row.empty() && row.back() == '\r') row.pop_back();
    if (row != sweep_csv_header) {
        row_fail(line, "unexpected header '" + row + "'");
    }
    while (std::getline(in, row)) {
        ++line;
        if (!row.empty() && row.back() == '\r') row.pop_back();
        if (row.empty()) continue;
        const std::vector<std::string> fields = split_fields(row);
        if (fields.size() != 5) {
            row_fail(line, "expected 5 fields, got " + std::to_string(fields.size()));
        }
        sweep_entry e;
        e.b_m = parse_double_field(line, "b_m", fields[0]);
        e.w_m_m = parse_double_field(line, "w_m_m", fields[1]);
        e.speed_rpm = parse_double_field(line, "speed_rpm", fields[2]);
        e.status = fields[4];
        e.ok = fields[4] == "ok";
        if (e.ok) {
            e.torque_Nm = parse_double_field(line, "torque_Nm", fields[3]);
        } else {
            if (!fields[3].empty()) {
                row_fail(line, "failed row must leave the torque cell empty");
            }
            e.torque_Nm = std::numeric_limits<double>::quiet_NaN();
        }
        result.entries.push_back(std::move(e));
    }
    return result;
}

}  // namespace ecb
