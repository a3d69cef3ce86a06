#pragma once

#include <limits>
#include <optional>
#include <vector>

#include <json.hpp>

#include "corona/classify.hpp"
#include "corona/constants.hpp"
#include "corona/measure.hpp"
#include "corona/tree.hpp"

namespace corona {

struct ChainParams {
    int k = 1;
    double rho = 0.0;      // 0: largest dyadic value with 2 c1 rho 50^k <= 1/2
    bool enforce_rho = true;
    double M = 1.0;
    double m = 0.0;        // 0: m0(n, rho) M
    double eps_bar = 0.0;
    double delta = -1.0;   // <0: measured once on the covering centers
    double gamma = std::numeric_limits<double>::infinity();  // mass budget for Dini-hypothesis violations
    int max_stages = 64;
    int max_scale = 64;    // global scale cap
    double r_min = -1.0;   // <0: min interatomic spacing / 10
    std::optional<Ball> root;  // default B_1(0)
    bool main_mode = false;    // excise {z : dyadic sum > M} first
    std::size_t delta_sample_budget = 512;
    std::size_t lattice_budget = 200000;
    int jobs = 1;
};

struct ChainLeaf {
    Vec center;
    double radius = 0.0;
    int scale = 0;  // global index: radius = R rho^scale
    BallClass cls;
};

struct ChainStage {
    BallKind kind = BallKind::Good;  // kind shared by all leaves of the stage
    std::vector<ChainLeaf> leaves;
    double packing = 0.0;  // sum r_f^k / R^k
};

struct DecompositionResult {
    bool stop_root = false;
    BallClass root_class;
    Ball root;
    ChainParams params;  // resolved: rho, m, delta, r_min filled in
    PointMeasure measure;  // mu, or mu' in main mode
    std::vector<std::size_t> exceptional_atoms;
    double exceptional_mass = 0.0;
    double hypothesis_bound = 0.0;           // delta0^2 M
    double hypothesis_violation_mass = 0.0;  // mass of sampled atoms above it
    std::size_t hypothesis_violations = 0;
    bool hypothesis_sampled = false;

    std::vector<ChainStage> stages;
    std::vector<TreeRecord> trees;
    std::vector<int> tree_scale;  // global scale of each tree root
    std::vector<int> tree_stage;
    bool stage_capped = false;

    std::vector<std::vector<Vec>> q_slices;  // q_slices[i]: centers of all good and bad R rho^i balls
    std::vector<std::size_t> c_plus;         // covering indices
    std::vector<Vec> c_zero;                 // Q at the final scale
    int final_scale = 0;
    double r_final = 0.0;

    double r(int i) const { return root.radius * std::pow(params.rho, i); }
    double total_leaf_packing() const;
};

/// Alternating good/bad tree construction from the root ball down.
DecompositionResult chain_trees(const PointMeasure& mu, const CoveringPair& covering, const ChainParams& params,
                                const Constants& consts);

/// mu(B_R \ (B_{f r_y}(C'_+) ∪ B_{r_i}(Q_i))) with f = enlarge.
double chain_residual(const DecompositionResult& res, const CoveringPair& covering, int scale, double enlarge);

/// Volume of the union of r-balls around the points, counted on a grid of the given step.
double union_volume(const std::vector<Vec>& points, const std::vector<double>& radii, double step);

struct CoreReport {
    std::vector<BoundCheck> checks;
    std::vector<std::pair<double, double>> minkowski_profile;  // (r, r^{k-n} |B_r(C')| / R^{k})
    std::vector<double> stage_packing;
    std::vector<double> q_packing;  // #Q_i r_i^k / R^k
    double c_key = 0.0;
    double noncollapse_worst = 0.0;  // max M r^k / (c_key mu B_r(x))
    std::size_t noncollapse_samples = 0;
    double residual = 0.0;
    double residual_rx = 0.0;
    bool all_pass() const;
};

/// Evaluates the packing, residual, noncollapse and Hausdorff-content conclusions.
CoreReport core_estimate_report(const DecompositionResult& res, const CoveringPair& covering, const Constants& consts);

nlohmann::json to_json(const DecompositionResult& r, bool include_trees = false);
nlohmann::json to_json(const CoreReport& r);

}  // namespace corona
