#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "corona/classify.hpp"
#include "corona/constants.hpp"
#include "corona/geometry.hpp"
#include "corona/measure.hpp"

namespace corona {

enum class TreeKind { Good, Bad };
const char* to_string(TreeKind k);

struct TreeParams {
    int k = 1;
    double rho = 1.0 / 32.0;
    double M = 1.0;
    double m = 0.0;        // 0 selects m0(n, rho) * M
    double eps_bar = 0.0;  // truncation used for best planes of good balls
    double delta = -1.0;   // Dini bound; <0 asks the builder to measure it
    bool enforce_delta = true;
    bool enforce_rho = true;  // bad trees: c1(n) rho <= 1/2
    int max_depth = 64;    // scales below the root
    double r_min = -1.0;   // <0: min interatomic spacing / 10
    std::size_t lattice_budget = 200000;
    std::size_t delta_sample_budget = 4000;
    int jobs = 1;
};

struct TreeBall {
    Vec center;
    int scale = 0;
    double radius = 0.0;
    BallClass cls;
    std::optional<AffinePlane> plane;  // L_{ig} = V(g, 8 r_i) for good balls, W_{ib} for bad balls
    Vec com;                           // X_{ig} for good balls
};

struct TreeScale {
    int index = 0;
    double radius = 0.0;
    std::vector<std::size_t> good, bad, stop;  // indices into TreeRecord::balls
    std::size_t candidates = 0;
    std::size_t lattice_candidates = 0;
    bool lattice_truncated = false;
    double excess_mass = 0.0;  // mu(E_i)
    std::vector<std::size_t> excess_atoms;
};

struct TreeRecord {
    TreeKind kind = TreeKind::Good;
    Ball root;
    TreeParams params;
    double r_min = 0.0;
    double delta = 0.0;  // value used for the hypothesis and the bounds
    bool delta_measured = false;
    bool delta_sampled = false;
    std::vector<TreeBall> balls;
    std::vector<TreeScale> scales;
    std::vector<std::size_t> c_plus;  // covering indices hit by heavy stop balls
    std::vector<Vec> c_zero;          // final-scale centers of the continuing type
    double r_final = 0.0;             // radius of the last scale built

    double r(int i) const { return root.radius * std::pow(params.rho, i); }
    /// Leaves handed to the next chain stage: bad balls of a good tree, good balls of a bad tree.
    std::vector<std::size_t> leaves() const;
    /// Balls of the continuing type at scale i (good for good trees, bad for bad trees).
    const std::vector<std::size_t>& active(int i) const;
    const std::vector<std::size_t>& switching(int i) const;
};

/// Largest per-atom dyadic beta sum over r_y < 2^alpha <= 16 R for atoms in B_{2R}(root),
/// on a deterministic stride subsample when the atom count exceeds the budget.
double measure_delta(const PointMeasure& mu, const CoveringPair& covering, const Ball& root, int k, double eps_bar,
                     std::size_t budget, bool* sampled = nullptr);

/// Good tree rooted at `root`. root_class, when given, must be Good and is reused.
TreeRecord build_good_tree(const PointMeasure& mu, const Ball& root, const CoveringPair& covering,
                           const TreeParams& params, const Constants& consts,
                           const std::optional<BallClass>& root_class = std::nullopt);

/// Bad tree rooted at `root`; W comes from the root's classification witness.
TreeRecord build_bad_tree(const PointMeasure& mu, const Ball& root, const CoveringPair& covering,
                          const TreeParams& params, const Constants& consts,
                          const std::optional<BallClass>& root_class = std::nullopt);

struct BoundCheck {
    std::string name;
    double claimed_bound = 0.0;
    double measured = 0.0;
    bool pass = false;
};

nlohmann::json to_json(const BoundCheck& b);
/// measured <= bound * (1 + rel_tol) + abs_tol.
BoundCheck check_le(std::string name, double measured, double bound, double rel_tol = 1e-9, double abs_tol = 0.0);

struct TreeAudit {
    std::vector<BoundCheck> checks;
    bool all_pass() const;
};

/// Packing, excess, residual and structural audits shared by both tree kinds.
TreeAudit audit_tree(const TreeRecord& t, const PointMeasure& mu, const CoveringPair& covering, const Constants& consts);

/// Per-scale packing: #active_i r_i^k + sum_{l<=i} #(switching_l ∪ S_l) r_l^k, normalized by R^k.
std::vector<double> packing_profile(const TreeRecord& t);
/// Per-scale sum over all balls of scale i of r_i^k / R^k (bad-tree single-scale packing).
std::vector<double> scale_packing(const TreeRecord& t);
/// Mass of the root ball outside the continuing balls of scale i, the switching balls of scales <= i
/// and B_{4 r_x}(x) for x in C_+(T) with r_x >= r_i.
double residual_mass(const TreeRecord& t, const PointMeasure& mu, const CoveringPair& covering, int scale);

nlohmann::json to_json(const TreeRecord& t);

}  // namespace corona
