#pragma once
#include <utility>

#include "ecb/error.hpp"

namespace ecb {

// ---------------------------------------------------------------------------
// Type-approval braking arithmetic for a secondary (endurance) brake on a
// passenger car.  The sizing rule chain:
//
//   test speed      v_test = f * v_max
//   required force  F = m * a_min          (flat road, rigid-body)
//   total torque    T = F * r_wheel
//   per wheel       T / braked_wheels
//   handover time   t = (v_test - v_handover) / a_min   (constant deceleration
//                   down to the speed where the friction brake takes over)
//
// Speeds are stored in km/h (the unit regulations quote); conversions to SI
// happen inside the operations.
// ---------------------------------------------------------------------------

struct vehicle_spec {
    double mass_kg = 1735.0;
    double wheel_effective_radius_m = 0.14;
    double max_speed_kmh = 200.0;
    int braked_wheels = 4;

    // Laden mass at or under 3.5 t; heavier vehicles fall under a different
    // approval regime, which check_requirement reports as a warning rather
    // than an error.
    bool within_lightweight_class() const { return mass_kg <= 3500.0; }

    void validate() const;
};

struct requirement_spec {
    double min_deceleration_ms2 = 4.0;  // sustained deceleration the brake must hold (>= 0)
    double test_speed_fraction = 0.8;   // of the vehicle's top speed
    double handover_speed_kmh = 20.0;   // below this the friction brake takes over
    double per_wheel_torque_Nm = 0.0;   // filled in by required torque chain
    std::pair<double, double> speed_range_rpm = {1000.0, 8000.0};

    void validate() const;
};

// km/h -> m/s.
double kmh_to_ms(double kmh);

// Test speed f * v_max in km/h.
double test_speed_kmh(const vehicle_spec& vehicle, const requirement_spec& req);

// Total braking torque m * a_min * r_wheel in newton-meters, exact product
// (display layers may round; e.g. 1735 * 4.0 * 0.14 = 971.6, often quoted as
// 972).
double required_total_torque_Nm(const vehicle_spec& vehicle, const requirement_spec& req);

// Split of a total torque across the braked wheels.  total must be >= 0.
double per_wheel_torque_Nm(double total_Nm, const vehicle_spec& vehicle);

// Time to decelerate from test_kmh to the handover speed at the minimum
// deceleration, seconds.  Throws INVALID_SPEEDS when the test speed does not
// exceed the handover speed; requires a strictly positive deceleration.
double handover_time_s(const requirement_spec& req, double test_kmh);

}  // namespace ecb
