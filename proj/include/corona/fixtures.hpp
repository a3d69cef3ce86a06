#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "corona/measure.hpp"

namespace corona {

/// Seeded generator with a fixed output sequence on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed);
    std::uint64_t next();
    double uniform();  // [0, 1)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal();
    std::size_t index(std::size_t count);
    /// Uniform point in B_r(0) of R^n.
    Vec in_ball(std::size_t n, double r);
    /// Uniform unit vector in R^n.
    Vec on_sphere(std::size_t n);

private:
    std::uint64_t s_[4];
};

struct KochCurve {
    std::vector<Vec> vertices;       // planar chain from (0,0) to (1,0)
    std::vector<double> segment_lengths;
    double length = 0.0;
};

/// Step i replaces the middle third of every segment l by a tent of height kappa[i] |l|,
/// always on the left of the direction of travel.
KochCurve koch(const std::vector<double>& kappa, int depth);

/// Curve length summed segment by segment without storing the curve (depth <= 16).
double koch_length_streamed(const std::vector<double>& kappa, int depth);

/// prod_{i<depth} (2 + sqrt(1 + 36 kappa_i^2)) / 3.
double koch_length_formula(const std::vector<double>& kappa, int depth);

/// Vertex measure: each vertex carries half the length of its adjacent segments.
PointMeasure koch_measure(const KochCurve& c);

/// h Z^n ∩ B_radius(0), each atom of weight h^n.
PointMeasure lebesgue(std::size_t n, double spacing, double radius = 1.0);

/// h Z^d ∩ B_radius(0) placed in the span of the first d axes of R^n, weight h^d.
/// d = 0 gives one unit atom at the origin.
PointMeasure flat(std::size_t n, std::size_t d, double spacing, double radius = 1.0);

/// k-spheres of radius rho^{n/k} around the points of rho Z^n ∩ B_2, sampled with
/// `per_sphere` equal-area atoms and clipped to B_clip.
PointMeasure packed_spheres(std::size_t n, int k, double rho, std::size_t per_sphere = 32, double clip = 1.0);

/// Lattice Lebesgue of the given spacing on B_1 plus atoms of the given weights at a
/// golden-ratio sequence on the first k axes (inside B_{0.95}).
PointMeasure plane_plus_diracs(std::size_t n, int k, const std::vector<double>& weights, double spacing);

/// Nested segments on the first axis of R^n. Level j covers g_j <= |x_1| <= rho^{2j} with
/// gap g_j = 2 rho^{2j+1} (none on the last level), sampled by `per_level` atoms. Level 0 has
/// line density `density`, deeper levels density / rho.
PointMeasure nested_segments(std::size_t n, double rho, int levels, std::size_t per_level, double density);

/// Positions used by plane_plus_diracs.
std::vector<Vec> dirac_positions(std::size_t n, int k, std::size_t count);

enum class GraphFunction { Flat, Sine, Parabola, Abs };

GraphFunction graph_function_from(const std::string& s);
const char* to_string(GraphFunction f);

/// f: R^k -> R with amplitude a: 0, a sin(2 pi x_1), a |x|^2, a |x|.
double graph_value(GraphFunction f, double a, VecView x);

/// Samples (x, f(x)) over h Z^k in R^{k+1} with area-element weights h^k sqrt(1 + |grad f|^2),
/// kept inside B_radius(0).
PointMeasure graph_sample(int k, GraphFunction f, double amplitude, double spacing, double radius = 1.0);

/// Graph sample plus `noise_count` uniform atoms in B_1 of total mass noise_mass.
PointMeasure graph_with_noise(int k, GraphFunction f, double amplitude, double spacing, std::size_t noise_count,
                              double noise_mass, std::uint64_t seed);

struct FixtureSpec {
    std::string kind;  // koch, lebesgue, flat, packed_spheres, plane_plus_diracs, nested, graph, graph_noise
    std::size_t n = 2;
    int k = 1;
    std::vector<double> kappa;
    int depth = 0;
    double spacing = 1.0 / 64.0;
    double radius = 1.0;
    double rho = 0.25;
    std::size_t per_sphere = 32;
    std::size_t per_level = 256;
    double density = 2.0;
    std::vector<double> dirac_weights;
    std::string function = "flat";
    double amplitude = 0.0;
    std::size_t noise_count = 0;
    double noise_mass = 0.0;
    std::uint64_t seed = 1;
};

FixtureSpec fixture_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FixtureSpec& s);
PointMeasure generate(const FixtureSpec& s);

}  // namespace corona
