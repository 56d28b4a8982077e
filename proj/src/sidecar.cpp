#include "ecb/sidecar.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "ecb/csv.hpp"

namespace ecb {

namespace {

[[noreturn]] void record_fail(const std::string& what) {
    throw error(errc::parse_error, "calibration record: " + what);
}

double record_number(const std::map<std::string, std::string>& kv, const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) record_fail("missing key '" + key + "'");
    char* end = nullptr;
    const double v = std::strtod(it->second.c_str(), &end);
    if (end != it->second.c_str() + it->second.size() || it->second.empty()) {
        record_fail("malformed number for '" + key + "'");
    }
    return v;
}

}  // namespace

std::string sidecar_file_name(std::uint64_t fingerprint) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "calibration-%016" PRIx64 ".txt", fingerprint);
    return buf;
}

std::string format_calibration_record(const calibration_record& record) {
    char fp[32];
    std::snprintf(fp, sizeof fp, "%016" PRIx64, record.fingerprint);
    std::ostringstream os;
    os << "# calibration record; consumed automatically when the model fingerprint matches\n";
    os << "fingerprint = " << fp << "\n";
    os << "lambda_star = " << format_double(record.lambda_star) << "\n";
    os << "convention = "
       << (record.convention == speed_convention::rpm ? "rpm" : "rad_s") << "\n";
    os << "reference_b_m = " << format_double(record.reference_b_m) << "\n";
    os << "reference_w_m_m = " << format_double(record.reference_w_m_m) << "\n";
    os << "reference_speed_rpm = " << format_double(record.reference_speed_rpm) << "\n";
    os << "reference_torque_Nm = " << format_double(record.reference_torque_Nm) << "\n";
    os << "max_abs_residual = " << format_double(record.max_abs_residual) << "\n";
    return os.str();
}

calibration_record parse_calibration_record(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) record_fail("expected 'key = value', got '" + line + "'");
        auto strip = [](std::string s) {
            const std::size_t a = s.find_first_not_of(" \t");
            const std::size_t b = s.find_last_not_of(" \t");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        kv[strip(line.substr(0, eq))] = strip(line.substr(eq + 1));
    }

    calibration_record rec;
    auto fp_it = kv.find("fingerprint");
    if (fp_it == kv.end()) record_fail("missing key 'fingerprint'");
    char* end = nullptr;
    rec.fingerprint = std::strtoull(fp_it->second.c_str(), &end, 16);
    if (end != fp_it->second.c_str() + fp_it->second.size() || fp_it->second.empty()) {
        record_fail("malformed fingerprint");
    }
    rec.lambda_star = record_number(kv, "lambda_star");
    auto conv_it = kv.find("convention");
    if (conv_it == kv.end()) record_fail("missing key 'convention'");
    if (conv_it->second == "rpm") {
        rec.convention = speed_convention::rpm;
    } else if (conv_it->second == "rad_s") {
        rec.convention = speed_convention::radians_per_second;
    } else {
        record_fail("convention must be rad_s or rpm, got '" + conv_it->second + "'");
    }
    rec.reference_b_m = record_number(kv, "reference_b_m");
    rec.reference_w_m_m = record_number(kv, "reference_w_m_m");
    rec.reference_speed_rpm = record_number(kv, "reference_speed_rpm");
    rec.reference_torque_Nm = record_number(kv, "reference_torque_Nm");
    rec.max_abs_residual = record_number(kv, "max_abs_residual");
    if (!(rec.lambda_star > 0.0)) record_fail("lambda_star must be > 0");
    return rec;
}

std::string write_calibration_record(const std::string& directory,
                                     const calibration_record& record) {
    const std::string path =
        (directory.empty() ? std::string(".") : directory) + "/" +
        sidecar_file_name(record.fingerprint);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw error(errc::io_error, "cannot write calibration record '" + path + "'");
    out << format_calibration_record(record);
    out.flush();
    if (!out) throw error(errc::io_error, "failed writing calibration record '" + path + "'");
    return path;
}

std::optional<calibration_record> try_load_calibration(const std::string& directory,
                                                       std::uint64_t fingerprint) {
    const std::string path =
        (directory.empty() ? std::string(".") : directory) + "/" +
        sidecar_file_name(fingerprint);
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buffer;
    buffer << in.rdbuf();
    try {
        calibration_record rec = parse_calibration_record(buffer.str());
        if (rec.fingerprint != fingerprint) return std::nullopt;  // stale or renamed
        return rec;
    } catch (const error&) {
        return std::nullopt;  // corrupt record: ignore rather than poison the run
    }
}

}  // namespace ecb
