#include "ecb/regulations.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ecb {

namespace {
void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}
}  // namespace

void vehicle_spec::validate() const {
    require(std::isfinite(mass_kg) && mass_kg > 0.0, "vehicle_spec: mass must be > 0");
    require(std::isfinite(wheel_effective_radius_m) && wheel_effective_radius_m > 0.0,
            "vehicle_spec: wheel effective radius must be > 0");
    require(std::isfinite(max_speed_kmh) && max_speed_kmh > 0.0,
            "vehicle_spec: max speed must be > 0");
    require(braked_wheels >= 1, "vehicle_spec: braked_wheels must be >= 1");
}

void requirement_spec::validate() const {
    // Zero deceleration is allowed at the type level (it yields zero torque
    // targets); operations that divide by it reject it themselves.
    require(std::isfinite(min_deceleration_ms2) && min_deceleration_ms2 >= 0.0,
            "requirement_spec: min deceleration must be >= 0");
    require(std::isfinite(test_speed_fraction) && test_speed_fraction > 0.0 &&
                test_speed_fraction <= 1.0,
            "requirement_spec: test speed fraction must be in (0, 1]");
    require(std::isfinite(handover_speed_kmh) && handover_speed_kmh >= 0.0,
            "requirement_spec: handover speed must be >= 0");
    require(std::isfinite(per_wheel_torque_Nm) && per_wheel_torque_Nm >= 0.0,
            "requirement_spec: per-wheel torque must be >= 0");
    require(speed_range_rpm.first > 0.0 && speed_range_rpm.second > speed_range_rpm.first,
            "requirement_spec: speed range must be ordered and positive");
}

double kmh_to_ms(double kmh) { return kmh / 3.6; }

double test_speed_kmh(const vehicle_spec& vehicle, const requirement_spec& req) {
    vehicle.validate();
    req.validate();
    return req.test_speed_fraction * vehicle.max_speed_kmh;
}

double required_total_torque_Nm(const vehicle_spec& vehicle, const requirement_spec& req) {
    vehicle.validate();
    req.validate();
    return vehicle.mass_kg * req.min_deceleration_ms2 * vehicle.wheel_effective_radius_m;
}

double per_wheel_torque_Nm(double total_Nm, const vehicle_spec& vehicle) {
    vehicle.validate();
    require(std::isfinite(total_Nm) && total_Nm >= 0.0,
            "per_wheel_torque: total torque must be >= 0");
    return total_Nm / vehicle.braked_wheels;
}

double handover_time_s(const requirement_spec& req, double test_kmh) {
    req.validate();
    require(req.min_deceleration_ms2 > 0.0,
            "handover_time: undefined for zero deceleration");
    if (!(test_kmh > req.handover_speed_kmh)) {
        std::ostringstream msg;
        msg << "test speed " << test_kmh << " km/h must exceed handover speed "
            << req.handover_speed_kmh << " km/h";
        throw error(errc::invalid_speeds, msg.str());
    }
    return kmh_to_ms(test_kmh - req.handover_speed_kmh) / req.min_deceleration_ms2;
}

}  // namespace ecb
