#pragma once

#include <optional>
#include <vector>

#include <json.hpp>

#include "corona/geometry.hpp"
#include "corona/measure.hpp"

namespace corona {

enum class BallKind { Good, Bad, Stop };
enum class StopReason { None, LowMass, HitsOriginalBall };

const char* to_string(BallKind k);
const char* to_string(StopReason r);

struct ClassifyParams {
    int k = 1;
    double rho = 1.0 / 32.0;
    double m = 0.0;  // sub-ball mass threshold, usually m0 * M
    double M = 1.0;  // stop threshold
};

struct GoodWitness {
    std::vector<Vec> points;   // y_i
    std::vector<double> masses;  // mu B_{rho r}(y_i)
    std::vector<Vec> centers;  // Y_i
};

struct BallClass {
    BallKind kind = BallKind::Stop;
    Ball ball;
    double mass = 0.0;
    ClassifyParams params;

    GoodWitness good;

    std::optional<AffinePlane> bad_plane;  // dimension k - 1
    double bad_residual = 0.0;             // mu(B_r \ B_{2 rho r}(W))
    double bad_bound = 0.0;                // 2^n rho^{k-n} m r^k

    StopReason stop = StopReason::None;
    std::optional<std::size_t> original;  // index into the covering pair
};

nlohmann::json to_json(const BallClass& c);

/// Stop test, then the constructive good/bad dichotomy.
BallClass classify_ball(const PointMeasure& mu, const Ball& ball, const CoveringPair& covering,
                        const ClassifyParams& params);

/// Dichotomy only (no stop test).
BallClass dichotomy(const PointMeasure& mu, const Ball& ball, const ClassifyParams& params);

/// Independent re-check of the witness invariants.
bool witness_holds(const PointMeasure& mu, const BallClass& c);

/// Points of W ∩ ball on the lattice base + spacing * Z^{dim W}. When the full
/// lattice exceeds `budget`, only points within `near_radius` of `near` are kept
/// and `truncated` is set.
std::vector<Vec> plane_lattice(const AffinePlane& w, const Ball& ball, double spacing, std::size_t budget,
                               const std::vector<Vec>& near, double near_radius, bool* truncated = nullptr);

/// Greedy net: accepts candidates in order when no accepted point lies within
/// distance < separation. `blocked` points count as already accepted.
std::vector<Vec> greedy_net(const std::vector<Vec>& candidates, double separation, std::size_t n,
                            const PointSet* blocked = nullptr);

/// Maximal 2 rho r / 5 net of B_{5 rho r}(W) ∩ ball over atoms plus a lattice on W.
std::vector<Vec> bad_ball_net(const PointMeasure& mu, const AffinePlane& w, const Ball& ball, double rho,
                              std::size_t lattice_budget = 200000);

struct TiltingResult {
    double measured = 0.0;  // (d_H / R)^2
    double grassmann_sq = 0.0;
    double bound = 0.0;
    double beta_inner = 0.0;
    double beta_outer = 0.0;
    bool pass = false;
};

/// outer = B_{8R}(o), inner = B_{rho R}(x) with x in B_{7R}(o) and inner Good.
TiltingResult tilting_check(const PointMeasure& mu, const Ball& inner, const BallClass& inner_class,
                            const Ball& outer, int k, double m, double eps_bar, double c_tilt);

}  // namespace corona
