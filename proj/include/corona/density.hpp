#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "corona/chain.hpp"
#include "corona/manifold.hpp"

namespace corona {

/// Per-atom density proxies: min and max of mu(B_s(x)) / s^k over s = s_lo 2^j <= s_hi.
/// Atoms that are centers of C_+ use the single radius s = r_x / 50.
struct DensityEstimate {
    int k = 1;
    double s_lo = 0.0;
    double s_hi = 0.0;
    std::vector<double> lower;
    std::vector<double> upper;

    /// Mass fraction of atoms with upper >= a and lower <= b.
    double gated_fraction(const PointMeasure& mu, double a, double b) const;
};

/// s in [2h, 8h] with h the smallest interatomic spacing.
std::pair<double, double> default_density_window(const PointMeasure& mu);

DensityEstimate density_proxies(const PointMeasure& mu, int k, double s_lo, double s_hi,
                                const CoveringPair* covering = nullptr, int jobs = 1);

/// Largest radius first, ties by index: keeps a ball when it misses every ball kept so far.
std::vector<std::size_t> vitali_select(const std::vector<Vec>& centers, const std::vector<double>& radii);

struct DensityInequality {
    double t = 0.0;
    std::size_t balls = 0;
    double hk_estimate = 0.0;  // sum omega_k (5 s_i)^k over the disjoint selection
    double mass = 0.0;         // mu(A_2)
    double lhs = 0.0;          // t hk_estimate / (5^k omega_k)
    bool holds = false;        // lhs <= mass
};

/// Vitali cover of A_1 (atoms whose upper proxy reaches t) by the scales attaining it.
DensityInequality density_to_inequality(const PointMeasure& mu, const DensityEstimate& est, double t);

struct UniformCovering {
    CoveringPair cover;
    std::vector<std::size_t> kept;  // indices into the input covering
    std::vector<int> band;          // alpha of each kept C_+ center, -1 for C_0
    std::size_t violations_a = 0;
    std::size_t violations_b = 0;
    bool holds() const { return violations_a == 0 && violations_b == 0; }
};

/// K_0 = W_0, K_alpha = W_alpha \ B_{r_x}(W_0 ∪ ... ∪ W_{alpha-1}); U_0 = C_0 \ B_{r_x}(C_+).
/// Both properties are scanned exhaustively on the result.
UniformCovering uniform_covering(const CoveringPair& covering);

struct DisjointPacking {
    int k = 1;
    std::vector<Vec> centers;          // centers of mass Y
    std::vector<double> radii;         // r_y
    std::vector<std::size_t> sources;  // covering index y
    bool disjoint = false;

    double weight(std::size_t i) const { return std::pow(radii[i], k); }
    double total() const;
    double mass(const Ball& b) const;
    PointMeasure as_measure() const;
};

/// nu = sum r_y^k delta_Y with Y the center of mass of B_{r_y}(y).
DisjointPacking intermediary_packing(const PointMeasure& mu, const CoveringPair& covering,
                                     const std::vector<std::size_t>& subset, int k, double a);

struct IntermediaryReport {
    std::vector<BoundCheck> checks;
    std::size_t samples = 0;
    double worst_domination = 0.0;  // mu_{C'}(B_r(x)) / nu(B_{2r}(x))
    double worst_mass = 0.0;        // a nu(B_r(X)) / mu(B_{4r}(X))
    double worst_beta = 0.0;        // a beta_nu^2(X, r) / (4^{k+2} beta_mu^2(X, 4r))
    bool all_pass() const;
};

/// Scans every center at radii r_x 2^j up to 2.
IntermediaryReport intermediary_checks(const PointMeasure& mu, const CoveringPair& covering,
                                       const std::vector<std::size_t>& subset, const DisjointPacking& nu, double a);

struct DiscreteReifenbergParams {
    int k = 1;
    double M = 1.0;
    double eps_bar = 0.0;
    double a = 0.0;  // lower weight bound; 0 disables (L)
    double b = std::numeric_limits<double>::infinity();  // upper weight bound; inf disables (U)
    bool run_chain = true;
    int jobs = 1;
};

struct DiscreteReifenbergReport {
    std::size_t balls = 0;
    double sum_rk = 0.0;
    double total_mass = 0.0;
    double hypothesis_mass = 0.0;  // smallest admissible Gamma
    std::size_t hypothesis_violations = 0;
    double max_dini = 0.0;
    bool lower_applies = false;
    bool upper_applies = false;
    double bound_lower = 0.0;
    double bound_upper = 0.0;
    double chain_plus_packing = 0.0;
    double chain_leaf_packing = 0.0;
    std::size_t chain_trees = 0;
    std::vector<BoundCheck> checks;
    bool all_pass() const;
};

/// mu = sum weights_i r_i^k delta_{x_i} over disjoint balls in B_1.
DiscreteReifenbergReport discrete_reifenberg(const std::vector<Vec>& centers, const std::vector<double>& radii,
                                             const std::vector<double>& weights, const DiscreteReifenbergParams& params,
                                             const Constants& consts);

struct AhlforsSample {
    Vec x;
    double r = 0.0;
    double mass = 0.0;
    double ratio = 0.0;           // mu(B_r(x)) / r^k
    double hypothesis_mass = 0.0; // sampled mu{z in B_r(x) : dyadic sum over (r_z, 2r] > M}
};

struct UpperAhlforsParams {
    int k = 1;
    double M = 1.0;
    double b = std::numeric_limits<double>::infinity();
    double eps_bar = 0.0;
    std::size_t sample_count = 100;
    std::uint64_t seed = 1;
    int j_min = 1;  // r = 2^{-j}
    int j_max = 3;
    std::size_t hypothesis_budget = 128;  // atoms whose dyadic profile is evaluated; 0 skips
    int jobs = 1;
};

struct UpperAhlforsReport {
    std::vector<AhlforsSample> samples;
    double C = 0.0;
    double hypothesis_worst = 0.0;  // max sampled hypothesis mass / (M r^k)
    bool hypothesis_sampled = false;
    std::vector<BoundCheck> checks;
    bool all_pass() const;
};

/// Random centers among the covering centers, radii 2^{-j} >= r_x.
UpperAhlforsReport upper_ahlfors_check(const PointMeasure& mu, const CoveringPair& covering,
                                       const UpperAhlforsParams& params, const Constants& consts);
/// Same, on explicit (x, r) pairs.
UpperAhlforsReport upper_ahlfors_at(const PointMeasure& mu, const CoveringPair& covering,
                                    const std::vector<std::pair<Vec, double>>& probes, const UpperAhlforsParams& params,
                                    const Constants& consts);

enum class MassPart { High = 0, Low = 1, Zero = 2 };
const char* to_string(MassPart p);

struct ThreeWayParams {
    int k = 1;
    double M = 1.0;
    double epsilon = 0.1;
    double high = 0.0;  // lower proxy threshold for the high residue; 0: 1 / epsilon
    double s_lo = 0.0;  // 0: default window
    double s_hi = 0.0;
    ChainParams chain;  // k and M are overwritten
    int jobs = 1;
};

struct ThreeWay {
    std::vector<MassPart> label;
    double mass_h = 0.0;
    double mass_l = 0.0;
    double mass_0 = 0.0;
    std::vector<Vec> k_h;  // C'_0 plus the high-density residue atoms
    DecompositionResult chain;
    DensityEstimate density;
    std::vector<BoundCheck> checks;
    bool all_pass() const;
};

ThreeWay decompose_three_way(const PointMeasure& mu, const ThreeWayParams& params, const Constants& consts);

struct RectCoverParams {
    int k = 1;
    double epsilon = 0.01;  // stop once the residual falls below epsilon times the initial mass
    int max_iters = 8;
    double a = 0.25;        // lower density gate
    double b = std::numeric_limits<double>::infinity();
    double gate_fraction = 0.9;
    double tau = 0.05;      // Dini threshold
    double chi = 0.0;       // 0: omega_k a / (8 10^k)
    double s_max = 0.5;
    double s_min = 0.0;     // 0: 16 times the spacing
    double tree_rho = 1.0 / 32.0;
    double tree_M = 0.05;
    double s_lo = 0.0;      // density window, 0: default
    double s_hi = 0.0;
    std::size_t vertex_budget = 50000;
    int jobs = 1;
};

struct CoverPiece {
    int iteration = 0;
    Ball ball;
    double tol = 0.0;  // twice the last good scale
    Mesh mesh;
    std::vector<Vec> positions;
    std::size_t covered_atoms = 0;
    double covered_mass = 0.0;
};

struct RectCover {
    bool gate_passed = false;
    double gate_fraction = 0.0;
    std::string message;
    double excluded_mass = 0.0;          // atoms outside the density bounds, never covered
    std::vector<double> residual_trace;  // entry 0: mass of the atoms inside the density bounds
    std::vector<CoverPiece> pieces;
    std::vector<int> covered_at;  // iteration per atom, -1 when never covered, -2 when excluded
    bool halving_holds() const;
};

/// Point to segment/triangle distance over the mesh at the given vertex positions.
double distance_to_mesh(VecView x, const Mesh& mesh, const std::vector<Vec>& positions);

RectCover rectifiable_cover(const PointMeasure& mu, const RectCoverParams& params, const Constants& consts);

nlohmann::json to_json(const DensityEstimate& d);
nlohmann::json to_json(const UniformCovering& u);
nlohmann::json to_json(const DisjointPacking& p);
nlohmann::json to_json(const IntermediaryReport& r);
nlohmann::json to_json(const DiscreteReifenbergReport& r);
nlohmann::json to_json(const UpperAhlforsReport& r);
nlohmann::json to_json(const ThreeWay& t);
nlohmann::json to_json(const RectCover& c);

}  // namespace corona
