#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "corona/constants.hpp"
#include "corona/tree.hpp"

namespace corona {

/// Smooth step: 0 for t <= 0, 1 for t >= 1, C-infinity in between.
double smooth_step(double t);

/// Radial bump: 1 on B_{11r/4}(g), 0 outside B_{3r}(g).
double bump(VecView x, VecView g, double r);

/// phi_g(x) = psi_g / ((1 - lambda) + sum psi) with lambda = 1 - prod (1 - psi_g).
/// Throws PreconditionError when two centers are closer than 2r/5.
std::vector<double> partition_of_unity(const std::vector<Vec>& centers, double r, VecView x);

/// Good-ball data of one scale, indexed for repeated sigma evaluations.
class SigmaScale {
public:
    SigmaScale() = default;
    SigmaScale(const TreeRecord& t, int i);
    Vec apply(VecView x) const;
    double radius() const { return r_; }
    std::size_t size() const { return planes_.size(); }
    const PointSet& centers() const { return centers_; }
    const AffinePlane& plane(std::size_t j) const { return planes_[j]; }

private:
    double r_ = 0.0;
    PointSet centers_;
    std::vector<AffinePlane> planes_;
    std::vector<Vec> coms_;
};

/// sigma_i(x) = x - sum_g phi_{ig}(x) p_{ig}^perp(x - X_{ig}).
Vec sigma_map(const TreeRecord& tree, int i, VecView x);

struct Mesh {
    std::size_t n = 0;
    int k = 0;
    std::vector<Vec> vertices;
    std::vector<std::array<std::size_t, 2>> edges;
    std::vector<std::array<std::size_t, 3>> triangles;  // k = 2 only
};

/// Regular grid on plane ∩ ball with the given edge length: axis edges, plus one
/// diagonal per square (and the two triangles) when k = 2.
Mesh plane_mesh(const AffinePlane& plane, const Ball& ball, double edge);

struct ManifoldResult {
    Mesh t0;
    std::vector<std::vector<Vec>> stages;  // stages[i] = vertex positions on T_i
    double edge = 0.0;
    bool coarsened = false;  // edge enlarged to respect the vertex budget
    double distortion = 1.0;
    double distortion_bound = 1.0;
    std::vector<double> step_displacement;  // max |sigma_i(x) - x| / r_i over T_{i-1}
    std::vector<double> c0_displacement;    // max |x_last - x_j| / r_j
    double graph_norm = 0.0;                // max C^1_{r_i} norm over good balls
    std::size_t graph_balls = 0;
    std::size_t graph_unsampled = 0;
    std::size_t graph_failures = 0;
    double hole_motion = 0.0;     // max displacement inside earlier holes
    double inclusion_ratio = 0.0; // max dist(g, T_i ∩ B_R) / r_i over good centers
    std::vector<BoundCheck> checks;
    bool all_pass() const;
    const std::vector<Vec>& final_vertices() const { return stages.back(); }
};

/// Composes sigma_1, ..., sigma_last over a mesh of T_0 = L_0 ∩ B_{3R}.
ManifoldResult manifold_limit(const TreeRecord& tree, const Constants& consts, std::size_t vertex_budget = 200000,
                              int jobs = 1);

/// CSV pair: vertices (id,x1..xn) and edges (a,b).
void write_mesh_csv(std::ostream& vertices, std::ostream& edges, const Mesh& mesh, const std::vector<Vec>& positions);
void write_mesh_files(const std::string& prefix, const Mesh& mesh, const std::vector<Vec>& positions);

nlohmann::json to_json(const ManifoldResult& m);

}  // namespace corona
