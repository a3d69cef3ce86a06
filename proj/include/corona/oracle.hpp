#pragma once

#include <chrono>
#include <cstddef>
#include <vector>

#include "corona/core.hpp"

namespace corona {

/// Caps for the brute-force verifiers. Exceeding any cap throws BudgetExceeded.
struct OracleBudget {
    std::size_t max_atoms = 200000;
    std::size_t max_grid_cells = 20000000;
    std::size_t max_plane_grid = 4000000;
    double wall_clock_seconds = 300.0;
};

/// Tracks one oracle call against its budget.
class OracleClock {
public:
    explicit OracleClock(const OracleBudget& b, const char* what);
    void check_atoms(std::size_t count) const;
    void check_cells(double count) const;
    void check_time() const;

private:
    OracleBudget budget_;
    const char* what_;
    std::chrono::steady_clock::time_point start_;
};

/// max_{a in A} min_{b in B} |a - b|.
double hausdorff_directed(const std::vector<Vec>& A, const std::vector<Vec>& B, const OracleBudget& budget = {});

/// Larger of the two directed distances.
double hausdorff_distance_sampled(const std::vector<Vec>& A, const std::vector<Vec>& B,
                                  const OracleBudget& budget = {});

struct GreedyCover {
    std::vector<Vec> centers;
    std::vector<double> radii;  // largest distance from a center to a point it covers, at most delta / 2
    double mass = 0.0;          // sum omega_k r_i^k
};

/// Greedy cover in input order by balls of diameter at most delta.
/// An upper bound on H^k_delta of the sampled set up to covering slack.
GreedyCover hausdorff_measure_greedy(const std::vector<Vec>& S, int k, double delta, const OracleBudget& budget = {});

/// Volume of {cells of side `step` centered inside `domain` within open distance r of S},
/// by scanning every atom for every cell.
double grid_minkowski(const std::vector<Vec>& S, double r, const Ball& domain, double step,
                      const OracleBudget& budget = {});

/// H^k of the intersection of two k-balls in R^k with center distance d.
/// Closed form for k = 1 (intervals) and k = 2 (lens).
double flat_ball_intersection(int k, double d, double r1, double r2);

/// H^k((B_r(x)) ∩ L ∩ B_R(0)) for L = span(e_1..e_k) in R^n.
double flat_ball_measure(int k, VecView x, double r, double support_radius);

/// Length of a polyline.
double polyline_length(const std::vector<Vec>& vertices);

}  // namespace corona
