#include "pyrewatch/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace pyrewatch::geometry {

FireGeometry make_fire_geometry(double fire_step_m, double detect_radius_m, double coverage_radius_m, int k)
{
    FireGeometry g;
    g.k = k;
    g.r_fire_m = fire_step_m * k;
    g.r_sense_m = g.r_fire_m + detect_radius_m;
    g.r_u_inner_m = std::max(0.0, g.r_fire_m - coverage_radius_m);
    g.r_u_outer_m = g.r_sense_m + coverage_radius_m;
    g.ring_area_km2 =
        std::numbers::pi * (g.r_u_outer_m * g.r_u_outer_m - g.r_u_inner_m * g.r_u_inner_m) / 1.0e6;
    return g;
}

FireGeometry fire_geometry_at(const Scenario& scenario, int k)
{
    const auto& p = scenario.params();
    return make_fire_geometry(scenario.fire_step_m(), p.sensor_detect_radius_m, p.uav_coverage_radius_m, k);
}

double circle_intersection_area(double r1, double r2, double d)
{
    if (r1 <= 0.0 || r2 <= 0.0) return 0.0;
    if (d >= r1 + r2) return 0.0;
    if (d <= std::abs(r1 - r2)) {
        const double r = std::min(r1, r2);
        return std::numbers::pi * r * r;
    }
    const double c1 = std::clamp((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1), -1.0, 1.0);
    const double c2 = std::clamp((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2), -1.0, 1.0);
    // Heron-style product, each factor nonnegative in this branch.
    const double kite = std::max(0.0, (-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2));
    const double area = r1 * r1 * std::acos(c1) + r2 * r2 * std::acos(c2) - 0.5 * std::sqrt(kite);
    return std::clamp(area, 0.0, std::numbers::pi * std::min(r1, r2) * std::min(r1, r2));
}

double a_in(const FireGeometry& geom, double r_hov_m, double center_dist_m)
{
    const double outer = circle_intersection_area(geom.r_sense_m, r_hov_m, center_dist_m);
    const double inner = circle_intersection_area(geom.r_fire_m, r_hov_m, center_dist_m);
    return std::max(0.0, outer - inner);
}

int sensors_in_intersection(const Scenario& scenario, const FireGeometry& geom, double center_dist_m)
{
    const auto& p = scenario.params();
    const double area_km2 = a_in(geom, p.uav_coverage_radius_m, center_dist_m) / 1.0e6;
    const long long n = stable_floor(p.sensor_density_per_km2 * area_km2);
    return static_cast<int>(std::clamp<long long>(n, 0, scenario.collected_per_step()));
}

} // namespace pyrewatch::geometry
