#include "ecb/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string_view>

namespace ecb {

namespace {

// --- schema -------------------------------------------------------------------

const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s = {
        {"geometry",
         {"r2", "r3", "b", "w_m", "air_gap", "plate_thickness", "back_iron_thickness"}},
        {"magnets", {"pole_pairs", "pole_arc_ratio", "remanence"}},
        {"materials", {"conductivity", "mu0"}},
        {"truncation", {"n_max", "k_max", "band_tolerance"}},
        {"grid", {"b_min", "b_max", "b_step", "wm_min", "wm_max", "wm_step", "speeds_rpm"}},
        {"vehicle", {"mass", "wheel_radius", "max_speed", "braked_wheels"}},
        {"requirement",
         {"min_deceleration", "test_speed_fraction", "handover_speed", "per_wheel_torque",
          "speed_min", "speed_max"}},
        {"calibration", {"b", "w_m", "speed", "torque"}},
        {"oracle", {"mesh"}},
    };
    return s;
}

// --- low-level parsing ----------------------------------------------------------

struct raw_value {
    std::string text;
    int line = 0;
    int col = 0;  // 1-based column of the value
};

[[noreturn]] void parse_fail(int line, int col, const std::string& what) {
    std::ostringstream os;
    os << "line " << line << ", column " << col << ": " << what;
    throw error(errc::parse_error, os.str());
}

bool is_key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

std::size_t skip_spaces(const std::string& s, std::size_t i) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    return i;
}

bool at_comment(const std::string& s, std::size_t i) {
    return i < s.size() && (s[i] == '#' || s[i] == ';');
}

// Parses the sectioned key-value text into "section.key" -> raw value.
std::map<std::string, raw_value> scan(const std::string& text) {
    std::map<std::string, raw_value> values;
    std::istringstream in(text);
    std::string line_text;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line_text)) {
        ++line_no;
        if (!line_text.empty() && line_text.back() == '\r') line_text.pop_back();
        std::size_t i = skip_spaces(line_text, 0);
        if (i >= line_text.size() || at_comment(line_text, i)) continue;

        if (line_text[i] == '[') {
            const std::size_t open = i;
            const std::size_t close = line_text.find(']', i + 1);
            if (close == std::string::npos) {
                parse_fail(line_no, static_cast<int>(open) + 1, "unterminated section header");
            }
            section = line_text.substr(i + 1, close - i - 1);
            if (section.empty() || !std::all_of(section.begin(), section.end(), is_key_char)) {
                parse_fail(line_no, static_cast<int>(open) + 1,
                           "malformed section name '[" + section + "]'");
            }
            if (schema().find(section) == schema().end()) {
                parse_fail(line_no, static_cast<int>(open) + 1,
                           "unknown section '[" + section + "]'");
            }
            std::size_t rest = skip_spaces(line_text, close + 1);
            if (rest < line_text.size() && !at_comment(line_text, rest)) {
                parse_fail(line_no, static_cast<int>(rest) + 1,
                           "unexpected text after section header");
            }
            continue;
        }

        // key = value
        const std::size_t key_start = i;
        while (i < line_text.size() && is_key_char(line_text[i])) ++i;
        const std::string key = line_text.substr(key_start, i - key_start);
        if (key.empty()) {
            parse_fail(line_no, static_cast<int>(key_start) + 1, "expected a key name");
        }
        if (section.empty()) {
            parse_fail(line_no, static_cast<int>(key_start) + 1,
                       "key '" + key + "' appears before any [section]");
        }
        const auto& keys = schema().at(section);
        if (keys.find(key) == keys.end()) {
            parse_fail(line_no, static_cast<int>(key_start) + 1,
                       "unknown key '" + key + "' in section [" + section + "]");
        }
        i = skip_spaces(line_text, i);
        if (i >= line_text.size() || line_text[i] != '=') {
            parse_fail(line_no, static_cast<int>(i) + 1,
                       "expected '=' after key '" + key + "'");
        }
        i = skip_spaces(line_text, i + 1);

        raw_value value;
        value.line = line_no;
        value.col = static_cast<int>(i) + 1;
        if (i < line_text.size() && line_text[i] == '"') {
            const std::size_t close = line_text.find('"', i + 1);
            if (close == std::string::npos) {
                parse_fail(line_no, static_cast<int>(i) + 1, "unterminated quoted value");
            }
            value.text = line_text.substr(i + 1, close - i - 1);
            std::size_t rest = skip_spaces(line_text, close + 1);
            if (rest < line_text.size() && !at_comment(line_text, rest)) {
                parse_fail(line_no, static_cast<int>(rest) + 1,
                           "unexpected text after quoted value");
            }
        } else {
            std::size_t end = i;
            while (end < line_text.size() && !at_comment(line_text, end)) ++end;
            while (end > i && (line_text[end - 1] == ' ' || line_text[end - 1] == '\t')) --end;
            value.text = line_text.substr(i, end - i);
            if (value.text.empty()) {
                parse_fail(line_no, static_cast<int>(i) + 1,
                           "missing value for key '" + key + "'");
            }
        }

        const std::string full = section + "." + key;
        if (!values.emplace(full, value).second) {
            parse_fail(line_no, static_cast<int>(key_start) + 1,
                       "key '" + full + "' redefined");
        }
    }
    return values;
}

// --- units ------------------------------------------------------------------------

struct unit_option {
    const char* name;
    double factor;  // multiplies the parsed number to reach the canonical unit
};

struct unit_table {
    const char* canonical;  // display unit
    std::vector<unit_option> options;

    std::string allowed() const {
        std::string out;
        for (const unit_option& u : options) {
            if (!out.empty()) out += ", ";
            out += u.name;
        }
        return out;
    }
};

const unit_table& length_units() {
    static const unit_table t{"m", {{"mm", 1e-3}, {"cm", 1e-2}, {"m", 1.0}}};
    return t;
}
const unit_table& flux_units() {
    static const unit_table t{"T", {{"T", 1.0}}};
    return t;
}
const unit_table& conductivity_units() {
    static const unit_table t{"S/m", {{"S/m", 1.0}, {"MS/m", 1e6}}};
    return t;
}
const unit_table& mass_units() {
    static const unit_table t{"kg", {{"kg", 1.0}}};
    return t;
}
const unit_table& road_speed_units() {
    static const unit_table t{"km/h", {{"km/h", 1.0}, {"m/s", 3.6}}};
    return t;
}
const unit_table& acceleration_units() {
    static const unit_table t{"m/s^2", {{"m/s^2", 1.0}, {"m/s2", 1.0}}};
    return t;
}
const unit_table& rotation_units() {
    static const unit_table t{"rpm", {{"rpm", 1.0}}};
    return t;
}
const unit_table& permeability_units() {
    static const unit_table t{"H/m", {{"H/m", 1.0}}};
    return t;
}
const unit_table& torque_units() {
    static const unit_table t{"N*m", {{"N*m", 1.0}, {"Nm", 1.0}, {"N.m", 1.0}}};
    return t;
}

std::string trim(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// --- typed field access --------------------------------------------------------------

class field_reader {
public:
    field_reader(std::map<std::string, raw_value> values, std::vector<provenance_entry>& prov)
        : values_(std::move(values)), provenance_(prov) {}

    // number + required unit from a table
    double quantity(const std::string& field, const unit_table& units, double default_value,
                    const char* default_origin) {
        const raw_value* raw = find(field);
        if (raw == nullptr) {
            note(field, format_value(default_value) + " " + units.canonical, default_origin);
            return default_value;
        }
        double number = 0.0;
        std::string unit = split_number(field, *raw, number);
        if (unit.empty()) {
            throw error(errc::unit_error, field + " (line " + std::to_string(raw->line) +
                                              "): missing unit, expected one of: " +
                                              units.allowed());
        }
        for (const unit_option& u : units.options) {
            if (unit == u.name) {
                const double value = number * u.factor;
                note(field, format_value(value) + " " + units.canonical, "user");
                return value;
            }
        }
        throw error(errc::unit_error, field + " (line " + std::to_string(raw->line) +
                                          "): unit '" + unit + "' not accepted, expected one of: " +
                                          units.allowed());
    }

    // bare number, unit forbidden
    double number(const std::string& field, double default_value, const char* default_origin) {
        const raw_value* raw = find(field);
        if (raw == nullptr) {
            note(field, format_value(default_value), default_origin);
            return default_value;
        }
        double value = 0.0;
        std::string unit = split_number(field, *raw, value);
        if (!unit.empty()) {
            throw error(errc::unit_error, field + " (line " + std::to_string(raw->line) +
                                              "): takes a plain number, got unit '" + unit + "'");
        }
        note(field, format_value(value), "user");
        return value;
    }

    long integer(const std::string& field, long default_value, const char* default_origin) {
        const raw_value* raw = find(field);
        if (raw == nullptr) {
            note(field, std::to_string(default_value), default_origin);
            return default_value;
        }
        double value = 0.0;
        std::string unit = split_number(field, *raw, value);
        if (!unit.empty()) {
            throw error(errc::unit_error, field + " (line " + std::to_string(raw->line) +
                                              "): takes a plain integer, got unit '" + unit +
                                              "'");
        }
        if (value != static_cast<double>(static_cast<long>(value))) {
            parse_fail(raw->line, raw->col, "expected an integer for '" + field + "'");
        }
        note(field, std::to_string(static_cast<long>(value)), "user");
        return static_cast<long>(value);
    }

    // list of bare numbers separated by commas and/or whitespace
    std::vector<double> number_list(const std::string& field, std::vector<double> defaults,
                                    const char* default_origin) {
        const raw_value* raw = find(field);
        if (raw == nullptr) {
            note(field, format_list(defaults), default_origin);
            return defaults;
        }
        std::vector<double> out;
        std::string token;
        std::istringstream in(normalize_separators(raw->text));
        while (in >> token) {
            char* end = nullptr;
            const double v = std::strtod(token.c_str(), &end);
            if (end != token.c_str() + token.size()) {
                parse_fail(raw->line, raw->col,
                           "expected a number list for '" + field + "', got '" + token + "'");
            }
            out.push_back(v);
        }
        if (out.empty()) {
            parse_fail(raw->line, raw->col, "empty list for '" + field + "'");
        }
        note(field, format_list(out), "user");
        return out;
    }

    void note(const std::string& field, std::string display, std::string origin) {
        provenance_.push_back({field, std::move(display), std::move(origin)});
    }

private:
    const raw_value* find(const std::string& field) const {
        auto it = values_.find(field);
        return it == values_.end() ? nullptr : &it->second;
    }

    static std::string normalize_separators(std::string s) {
        std::replace(s.begin(), s.end(), ',', ' ');
        return s;
    }

    static std::string format_list(const std::vector<double>& vs) {
        std::string out;
        for (double v : vs) {
            if (!out.empty()) out += ' ';
            out += format_value(v);
        }
        return out;
    }

    // Splits "NUMBER [UNIT]" and returns the unit text (possibly empty).
    static std::string split_number(const std::string& field, const raw_value& raw,
                                    double& number) {
        char* end = nullptr;
        number = std::strtod(raw.text.c_str(), &end);
        if (end == raw.text.c_str()) {
            parse_fail(raw.line, raw.col, "expected a number for '" + field + "'");
        }
        return trim(std::string_view(end));
    }

    std::map<std::string, raw_value> values_;
    std::vector<provenance_entry>& provenance_;
};

// --- range checks -------------------------------------------------------------------

[[noreturn]] void range_fail(const std::string& detail) {
    throw error(errc::range_error, detail);
}

void check_interval(const std::string& field, double value, double lo, double hi,
                    const char* unit) {
    if (!(value >= lo && value <= hi)) {
        std::ostringstream os;
        os << field << " = " << format_value(value) << " " << unit << " outside ["
           << format_value(lo) << ", " << format_value(hi) << "] " << unit;
        range_fail(os.str());
    }
}

void check_positive(const std::string& field, double value, const char* unit) {
    if (!(value > 0.0)) {
        std::ostringstream os;
        os << field << " = " << format_value(value) << " " << unit
           << " outside (0, inf) " << unit;
        range_fail(os.str());
    }
}

void check_non_negative(const std::string& field, double value, const char* unit) {
    if (!(value >= 0.0)) {
        std::ostringstream os;
        os << field << " = " << format_value(value) << " " << unit
           << " outside [0, inf) " << unit;
        range_fail(os.str());
    }
}

// The validated design box for magnet thickness and ring width.
constexpr double b_box_lo = 0.002, b_box_hi = 0.040;
constexpr double wm_box_lo = 0.002, wm_box_hi = 0.110;

constexpr const char* construction = "default (construction constraint)";
constexpr const char* material = "default (material property)";
constexpr const char* requirement_data = "default (requirement data)";
constexpr const char* numerical = "default (numerical setting)";
constexpr const char* reference_data = "default (reference data)";

}  // namespace

run_config parse_config(const std::string& text) {
    run_config cfg;
    field_reader read(scan(text), cfg.provenance);

    // geometry -------------------------------------------------------------
    const double r2 = read.quantity("geometry.r2", length_units(), 0.112, construction);
    const double r3 = read.quantity("geometry.r3", length_units(), 0.140, construction);
    const double b = read.quantity("geometry.b", length_units(), 0.030, construction);
    const double w_m = read.quantity("geometry.w_m", length_units(), 0.110, construction);
    const double air_gap =
        read.quantity("geometry.air_gap", length_units(), 0.001, construction);
    const double plate =
        read.quantity("geometry.plate_thickness", length_units(), 0.002, construction);
    const double back_iron =
        read.quantity("geometry.back_iron_thickness", length_units(), 0.002, construction);

    check_positive("geometry.r2", r2, "m");
    check_positive("geometry.r3", r3, "m");
    check_interval("geometry.b", b, b_box_lo, b_box_hi, "m");
    check_interval("geometry.w_m", w_m, wm_box_lo, wm_box_hi, "m");
    check_positive("geometry.air_gap", air_gap, "m");
    check_positive("geometry.plate_thickness", plate, "m");
    check_positive("geometry.back_iron_thickness", back_iron, "m");
    if (!(w_m < r2)) {
        range_fail("geometry.w_m = " + format_value(w_m) + " m must be smaller than r2 = " +
                   format_value(r2) + " m");
    }
    if (!(r2 <= r3)) {
        range_fail("geometry.r2 = " + format_value(r2) + " m must not exceed r3 = " +
                   format_value(r3) + " m");
    }
    const double r1 = r2 - w_m;
    read.note("geometry.r1", format_value(r1) + " m", "derived (r2 - w_m)");

    // magnets ----------------------------------------------------------------
    const long pole_pairs = read.integer("magnets.pole_pairs", 4, construction);
    const double arc = read.number("magnets.pole_arc_ratio", 0.444, construction);
    const double remanence =
        read.quantity("magnets.remanence", flux_units(), 1.25, material);
    if (pole_pairs < 1) range_fail("magnets.pole_pairs = " + std::to_string(pole_pairs) +
                                   " outside [1, inf)");
    if (!(arc > 0.0 && arc < 1.0)) {
        range_fail("magnets.pole_arc_ratio = " + format_value(arc) + " outside (0, 1)");
    }
    check_positive("magnets.remanence", remanence, "T");

    // materials ---------------------------------------------------------------
    const double sigma =
        read.quantity("materials.conductivity", conductivity_units(), 57.0e7, material);
    const double mu0 =
        read.quantity("materials.mu0", permeability_units(), 4e-7 * pi_d, material);
    check_non_negative("materials.conductivity", sigma, "S/m");
    check_positive("materials.mu0", mu0, "H/m");

    // truncation -----------------------------------------------------------------
    const long n_max = read.integer("truncation.n_max", 30, numerical);
    const long k_max = read.integer("truncation.k_max", 30, numerical);
    const double band_tol = read.number("truncation.band_tolerance", 5e-2, numerical);
    if (n_max < 1) range_fail("truncation.n_max = " + std::to_string(n_max) + " outside [1, inf)");
    if (k_max < 1) range_fail("truncation.k_max = " + std::to_string(k_max) + " outside [1, inf)");
    if (!(band_tol > 0.0 && band_tol <= 1.0)) {
        range_fail("truncation.band_tolerance = " + format_value(band_tol) + " outside (0, 1]");
    }

    // grid ---------------------------------------------------------------------------
    const double b_min = read.quantity("grid.b_min", length_units(), 0.002, construction);
    const double b_max = read.quantity("grid.b_max", length_units(), 0.040, construction);
    const double b_step = read.quantity("grid.b_step", length_units(), 0.001, construction);
    const double wm_min = read.quantity("grid.wm_min", length_units(), 0.002, construction);
    const double wm_max = read.quantity("grid.wm_max", length_units(), 0.110, construction);
    const double wm_step = read.quantity("grid.wm_step", length_units(), 0.002, construction);
    std::vector<double> speeds = read.number_list(
        "grid.speeds_rpm", {1000.0, 2000.0, 4000.0, 6000.0, 8000.0}, construction);
    check_interval("grid.b_min", b_min, b_box_lo, b_box_hi, "m");
    check_interval("grid.b_max", b_max, b_box_lo, b_box_hi, "m");
    check_positive("grid.b_step", b_step, "m");
    check_interval("grid.wm_min", wm_min, wm_box_lo, wm_box_hi, "m");
    check_interval("grid.wm_max", wm_max, wm_box_lo, wm_box_hi, "m");
    check_positive("grid.wm_step", wm_step, "m");
    if (!(b_min <= b_max)) {
        range_fail("grid.b_min = " + format_value(b_min) + " m exceeds grid.b_max = " +
                   format_value(b_max) + " m");
    }
    if (!(wm_min <= wm_max)) {
        range_fail("grid.wm_min = " + format_value(wm_min) + " m exceeds grid.wm_max = " +
                   format_value(wm_max) + " m");
    }
    for (double s : speeds) check_positive("grid.speeds_rpm", s, "rpm");

    // vehicle -------------------------------------------------------------------------
    const double mass = read.quantity("vehicle.mass", mass_units(), 1735.0, requirement_data);
    const double wheel_radius =
        read.quantity("vehicle.wheel_radius", length_units(), 0.14, requirement_data);
    const double max_speed =
        read.quantity("vehicle.max_speed", road_speed_units(), 200.0, requirement_data);
    const long braked_wheels = read.integer("vehicle.braked_wheels", 4, requirement_data);
    check_positive("vehicle.mass", mass, "kg");
    check_positive("vehicle.wheel_radius", wheel_radius, "m");
    check_positive("vehicle.max_speed", max_speed, "km/h");
    if (braked_wheels < 1) {
        range_fail("vehicle.braked_wheels = " + std::to_string(braked_wheels) +
                   " outside [1, inf)");
    }

    // requirement ------------------------------------------------------------------------
    const double decel = read.quantity("requirement.min_deceleration", acceleration_units(),
                                       4.0, requirement_data);
    const double fraction =
        read.number("requirement.test_speed_fraction", 0.8, requirement_data);
    const double handover = read.quantity("requirement.handover_speed", road_speed_units(),
                                          20.0, requirement_data);
    check_non_negative("requirement.min_deceleration", decel, "m/s^2");
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        range_fail("requirement.test_speed_fraction = " + format_value(fraction) +
                   " outside (0, 1]");
    }
    check_non_negative("requirement.handover_speed", handover, "km/h");

    const double per_wheel_default =
        mass * decel * wheel_radius / static_cast<double>(braked_wheels);
    // Read with a placeholder default, then fix the provenance display if the
    // key was absent (the default derives from the vehicle block).
    const std::size_t prov_mark = cfg.provenance.size();
    const double per_wheel = read.quantity("requirement.per_wheel_torque", torque_units(),
                                           per_wheel_default, requirement_data);
    if (cfg.provenance.size() == prov_mark + 1 &&
        cfg.provenance.back().origin == requirement_data) {
        cfg.provenance.back().origin = "derived (m a r / wheels)";
    }
    check_non_negative("requirement.per_wheel_torque", per_wheel, "N*m");

    const double speed_min =
        read.quantity("requirement.speed_min", rotation_units(), 1000.0, requirement_data);
    const double speed_max =
        read.quantity("requirement.speed_max", rotation_units(), 8000.0, requirement_data);
    check_positive("requirement.speed_min", speed_min, "rpm");
    if (!(speed_min < speed_max)) {
        range_fail("requirement.speed_min = " + format_value(speed_min) +
                   " rpm must be below requirement.speed_max = " + format_value(speed_max) +
                   " rpm");
    }

    // calibration ---------------------------------------------------------------------------
    const double cal_b = read.quantity("calibration.b", length_units(), 0.030, reference_data);
    const double cal_wm =
        read.quantity("calibration.w_m", length_units(), 0.110, reference_data);
    const double cal_speed =
        read.quantity("calibration.speed", rotation_units(), 8000.0, reference_data);
    const double cal_torque =
        read.quantity("calibration.torque", torque_units(), 253.802, reference_data);
    check_interval("calibration.b", cal_b, b_box_lo, b_box_hi, "m");
    check_interval("calibration.w_m", cal_wm, wm_box_lo, wm_box_hi, "m");
    if (!(cal_wm < r2)) {
        range_fail("calibration.w_m = " + format_value(cal_wm) +
                   " m must be smaller than r2 = " + format_value(r2) + " m");
    }
    check_positive("calibration.speed", cal_speed, "rpm");
    check_positive("calibration.torque", cal_torque, "N*m");

    // oracle ----------------------------------------------------------------------------------
    const long mesh = read.integer("oracle.mesh", 128, numerical);
    if (mesh < 8 || mesh % 2 != 0) {
        range_fail("oracle.mesh = " + std::to_string(mesh) +
                   " outside {even integers >= 8}");
    }

    // assembly ---------------------------------------------------------------------------------
    cfg.model.geometry = {r1, r2, r3, b, air_gap, plate, back_iron};
    cfg.model.magnets = {static_cast<int>(pole_pairs), arc, remanence};
    cfg.model.materials.mu0_Hm = mu0;
    cfg.model.materials.sigma_Sm = sigma;
    cfg.model.trunc = {static_cast<int>(n_max), static_cast<int>(k_max), band_tol};
    cfg.model.lambda_scale = 1.0;

    cfg.grid.b_range = {b_min, b_max, b_step};
    cfg.grid.wm_range = {wm_min, wm_max, wm_step};
    cfg.grid.speeds_rpm = std::move(speeds);

    cfg.vehicle = {mass, wheel_radius, max_speed, static_cast<int>(braked_wheels)};
    cfg.requirement = {decel, fraction, handover, per_wheel, {speed_min, speed_max}};

    cfg.calibration.geometry = cfg.model.geometry;
    cfg.calibration.geometry.magnet_thickness = cal_b;
    cfg.calibration.geometry.r1 = r2 - cal_wm;
    cfg.calibration.speed_rpm = cal_speed;
    cfg.calibration.torque_Nm = cal_torque;

    cfg.oracle_mesh = static_cast<int>(mesh);

    // Belt and braces: the assembled objects must satisfy their own
    // invariants; surface any residual violation as a range problem.
    try {
        cfg.model.validate();
        cfg.grid.validate();
        cfg.vehicle.validate();
        cfg.requirement.validate();
        cfg.calibration.geometry.validate();
    } catch (const std::invalid_argument& e) {
        range_fail(e.what());
    }
    return cfg;
}

run_config load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw error(errc::io_error, "cannot read config file '" + path + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) {
        throw error(errc::io_error, "failed while reading config file '" + path + "'");
    }
    return parse_config(buffer.str());
}

std::string format_provenance(const run_config& config) {
    std::ostringstream os;
    for (const provenance_entry& p : config.provenance) {
        os << p.field << " = " << p.display << " [" << p.origin << "]\n";
    }
    return os.str();
}

}  // namespace ecb
