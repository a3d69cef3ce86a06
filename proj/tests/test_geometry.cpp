#include <doctest.h>

#include <cmath>
#include <numbers>

#include "corona/geometry.hpp"
#include "generators.hpp"

using namespace corona;

namespace {

AffinePlane line(Vec base, Vec dir) { return AffinePlane::from_directions(std::move(base), {std::move(dir)}); }

// Max-min distance between dense samples of the two unit disks of lines through 0.
double sampled_line_distance(double angle_a, double angle_b) {
    const int count = 4001;
    double worst = 0.0;
    for (int pass = 0; pass < 2; ++pass) {
        const double ta = pass == 0 ? angle_a : angle_b;
        const double tb = pass == 0 ? angle_b : angle_a;
        for (int i = 0; i < count; ++i) {
            const double s = -1.0 + 2.0 * i / (count - 1);
            double best = INFINITY;
            for (int j = 0; j < count; ++j) {
                const double t = -1.0 + 2.0 * j / (count - 1);
                best = std::min(best, std::hypot(s * std::cos(ta) - t * std::cos(tb), s * std::sin(ta) - t * std::sin(tb)));
            }
            worst = std::max(worst, best);
        }
    }
    return worst;
}

}  // namespace

TEST_SUITE("geometry") {
    TEST_CASE("projection onto axis and affine planes") {
        const AffinePlane x_axis = line({0.0, 0.0}, {1.0, 0.0});
        CHECK(project(x_axis, Vec{3.0, 4.0}) == Vec{3.0, 0.0});
        CHECK(project(x_axis, Vec{2.5, 0.0}) == Vec{2.5, 0.0});
        const AffinePlane shifted = line({0.0, 1.0}, {1.0, 0.0});
        const Vec p = project(shifted, Vec{2.0, 5.0});
        CHECK(p[0] == doctest::Approx(2.0));
        CHECK(p[1] == doctest::Approx(1.0));
    }

    TEST_CASE("plane distance") {
        const AffinePlane x_axis = line({0.0, 0.0}, {1.0, 0.0});
        CHECK(plane_distance(Vec{0.0, 1.0}, x_axis) == doctest::Approx(1.0));
        CHECK(plane_distance(Vec{7.0, 0.0}, x_axis) == 0.0);
        const AffinePlane xy = AffinePlane::from_directions({0.0, 0.0, 0.0}, {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}});
        CHECK(plane_distance(Vec{1.0, 1.0, 1.0}, xy) == doctest::Approx(1.0));
    }

    TEST_CASE("projection is idempotent and the normal part is orthogonal") {
        Rng rng(11);
        for (int c = 0; c < 200; ++c) {
            const std::size_t n = 2 + c % 3;
            const int k = 1 + static_cast<int>(rng.index(n - 1));
            std::vector<Vec> dirs;
            for (int j = 0; j < k; ++j) dirs.push_back(rng.on_sphere(n));
            const AffinePlane pl = AffinePlane::from_directions(rng.in_ball(n, 1.0), dirs);
            const Vec x = rng.in_ball(n, 3.0);
            const Vec p = project(pl, x);
            const Vec pp = project(pl, p);
            CHECK(dist(p, pp) < 1e-12);
            const Vec nrm = pl.normal_part(x);
            for (const Vec& e : pl.frame()) CHECK(std::abs(dot(nrm, e)) < 1e-12);
            CHECK(plane_distance(x, pl) == doctest::Approx(dist(x, p)).epsilon(1e-12));
        }
    }

    TEST_CASE("dependent directions are rejected") {
        CHECK_THROWS_AS(AffinePlane::from_directions({0.0, 0.0}, {{1.0, 0.0}, {2.0, 0.0}}), RankDeficient);
    }

    TEST_CASE("grassmann distance against the disk sampling oracle") {
        const AffinePlane a = line({0.0, 0.0}, {1.0, 0.0});
        CHECK(grassmann_distance(a, a) == doctest::Approx(0.0).epsilon(1e-12));
        const double pi = std::numbers::pi;
        const double orth = sampled_line_distance(0.0, pi / 2.0);
        const double thirty = sampled_line_distance(0.0, pi / 6.0);
        CHECK(grassmann_distance(a, line({0.0, 0.0}, {0.0, 1.0})) == doctest::Approx(orth).epsilon(1e-3));
        CHECK(grassmann_distance(a, line({0.0, 0.0}, {std::cos(pi / 6.0), std::sin(pi / 6.0)})) ==
              doctest::Approx(thirty).epsilon(1e-3));
        CHECK(orth == doctest::Approx(1.0).epsilon(1e-3));
        CHECK(thirty == doctest::Approx(0.5).epsilon(1e-3));
    }

    TEST_CASE("grassmann distance ignores the base point") {
        const AffinePlane a = line({0.0, 0.0}, {1.0, 1.0});
        const AffinePlane b = line({5.0, -2.0}, {1.0, 1.0});
        CHECK(grassmann_distance(a, b) == doctest::Approx(0.0).epsilon(1e-12));
    }

    TEST_CASE("general position") {
        CHECK(general_position({{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}, 0.5));
        CHECK_FALSE(general_position({{0.0, 0.0}, {1.0, 0.0}, {2.0, 0.0}}, 1e-6));
        CHECK_FALSE(general_position({{0.0, 0.0}, {1.0, 0.0}, {1.0, 0.05}}, 0.1));
        CHECK(general_position({{0.0, 0.0}, {1.0, 0.0}, {1.0, 0.05}}, 0.04));
    }

    TEST_CASE("graph norm") {
        const AffinePlane x_axis = line({0.0, 0.0}, {1.0, 0.0});
        const Ball unit{{0.0, 0.0}, 1.0};
        std::vector<Vec> flat_samples, slope_samples;
        for (int i = -500; i <= 500; ++i) {
            const double x = 0.999 * i / 500.0;
            flat_samples.push_back({x, 0.0});
            slope_samples.push_back({x, 0.1 * x});
        }
        const GraphNorm z = verify_graphical(flat_samples, x_axis, unit);
        CHECK(z.graphical);
        CHECK(z.c1() == 0.0);
        const GraphNorm g = verify_graphical(slope_samples, x_axis, unit);
        CHECK(g.graphical);
        CHECK(g.c1() == doctest::Approx(0.2).epsilon(0.1));
        const GraphNorm v = verify_graphical({{0.0, 0.0}, {0.0, 1.0}}, x_axis, Ball{{0.0, 0.0}, 2.0});
        CHECK_FALSE(v.graphical);
        CHECK_THROWS(verify_graphical({}, x_axis, unit));
    }

    TEST_CASE("slice hausdorff of parallel lines is their offset") {
        const AffinePlane a = line({0.0, 0.0}, {1.0, 0.0});
        const AffinePlane b = line({0.0, 0.1}, {1.0, 0.0});
        CHECK(slice_hausdorff(a, b, Ball{{0.0, 0.0}, 1.0}) == doctest::Approx(0.1).epsilon(0.05));
        const AffinePlane far = line({0.0, 5.0}, {1.0, 0.0});
        CHECK(std::isinf(slice_hausdorff(a, far, Ball{{0.0, 0.0}, 1.0})));
    }
}
