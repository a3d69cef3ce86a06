#pragma once

#include <optional>
#include <vector>

#include <json.hpp>

#include "corona/geometry.hpp"
#include "corona/measure.hpp"

namespace corona {

struct PlaneFit {
    AffinePlane plane;
    double beta_sq = 0.0;
    double mass = 0.0;
};

/// L2-best affine k-plane for mu restricted to the ball.
/// Throws ZeroMassError when the ball carries no mass.
PlaneFit best_plane(const PointMeasure& mu, const Ball& ball, int k);

/// Same fit over an explicit atom list; `radius` sets the normalization.
PlaneFit best_plane_of(const PointMeasure& mu, const std::vector<std::size_t>& atoms, double radius, int k);

/// Truncated beta squared: 0 when mu(ball) <= eps_bar r^k.
double beta_truncated(const PointMeasure& mu, const Ball& ball, int k, double eps_bar);

/// Sum of beta_truncated(x, 2^a) for a in [alpha_min, alpha_max].
double dini_sum(const PointMeasure& mu, VecView x, int k, double eps_bar, int alpha_min, int alpha_max);

struct BetaEntry {
    int alpha = 0;
    double r = 0.0;
    double beta_sq = 0.0;
    double mass = 0.0;
    std::optional<AffinePlane> plane;
};

struct BetaProfile {
    Vec center;
    int k = 1;
    double eps_bar = 0.0;
    std::vector<BetaEntry> entries;  // alpha strictly decreasing
};

BetaProfile beta_profile(const PointMeasure& mu, VecView x, int k, double eps_bar, int alpha_min, int alpha_max);

nlohmann::json to_json(const AffinePlane& p);
nlohmann::json to_json(const BetaProfile& p);

/// Per-atom dyadic sums over alpha in [alpha_lo(i), alpha_max]; alpha_lo(i) is the
/// smallest alpha with 2^alpha > r_i (covering radius of atom i), floored at alpha_floor.
std::vector<double> atom_dini_sums(const PointMeasure& mu, const std::vector<double>& radii, int k,
                                   double eps_bar, int alpha_floor, int alpha_max, int jobs = 1);

/// Largest alpha with 2^alpha < spacing / 2; below it every ball holds at most one atom.
int alpha_floor_for(const PointMeasure& mu);

/// Brute-force minimization over a grid of plane orientations at angular step
/// pi * grid_resolution. Desk scale only: n <= 3 and at most 200 atoms in the ball.
double beta_oracle(const PointMeasure& mu, const Ball& ball, int k, double grid_resolution);

/// Upper bound on beta_oracle minus the exact minimum for the same ball.
double beta_oracle_error_bound(const PointMeasure& mu, const Ball& ball, int k, double grid_resolution);

}  // namespace corona
