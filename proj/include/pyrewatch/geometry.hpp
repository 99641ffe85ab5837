#pragma once

// Planar geometry of a circular fire front: fire disk, sensor detection
// ring, the ring of UAV positions whose coverage touches it, and the area of
// the coverage disk that overlaps the detection ring.

#include "pyrewatch/scenario.hpp"

namespace pyrewatch::geometry {

struct FireGeometry {
    int k = 0;
    double r_fire_m = 0.0;    // R_f = v T k
    double r_sense_m = 0.0;   // R_s = R_f + d_s
    double r_u_inner_m = 0.0; // max(0, R_f - R_hov)
    double r_u_outer_m = 0.0; // R_s + R_hov
    double ring_area_km2 = 0.0;
};

FireGeometry make_fire_geometry(double fire_step_m, double detect_radius_m, double coverage_radius_m, int k);

FireGeometry fire_geometry_at(const Scenario& scenario, int k);

/// Area (m^2) of the overlap of two disks of radii r1, r2 whose centers are
/// `center_dist` apart.
double circle_intersection_area(double r1, double r2, double center_dist);

/// Area (m^2) of the part of a coverage disk of radius `r_hov_m`, centered
/// `center_dist_m` from the ignition point, that lies in the detection ring.
double a_in(const FireGeometry& geom, double r_hov_m, double center_dist_m);

/// floor(lambda_s * A_in), clamped to the collectable count N.
int sensors_in_intersection(const Scenario& scenario, const FireGeometry& geom, double center_dist_m);

} // namespace pyrewatch::geometry
