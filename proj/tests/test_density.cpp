#include <doctest.h>

#include <cmath>

#include "corona/density.hpp"
#include "corona/fixtures.hpp"
#include "generators.hpp"

using namespace corona;

namespace {

CoveringPair on_line(const std::vector<double>& xs, const std::vector<double>& rs) {
    std::vector<double> coords;
    for (double x : xs) {
        coords.push_back(x);
        coords.push_back(0.0);
    }
    return CoveringPair(2, coords, rs);
}

}  // namespace

TEST_SUITE("density") {
    TEST_CASE("uniform covering keeps equal radii") {
        const CoveringPair c = on_line({0.0, 0.3, 0.6, -0.4}, {0.1, 0.1, 0.1, 0.1});
        const UniformCovering u = uniform_covering(c);
        CHECK(u.kept.size() == 4);
        CHECK(u.holds());
    }

    TEST_CASE("uniform covering of a nested chain keeps band heads") {
        std::vector<double> xs, rs;
        for (int i = 0; i < 10; ++i) {
            xs.push_back(0.001 * i);
            rs.push_back(std::ldexp(1.0, -i) * 0.75);
        }
        const UniformCovering u = uniform_covering(on_line(xs, rs));
        CHECK(u.kept == std::vector<std::size_t>{0});
        CHECK(u.violations_a == 0);
        CHECK(u.holds());
    }

    TEST_CASE("uniform covering without original balls") {
        const CoveringPair c = on_line({0.0, 0.2, 0.4}, {0.0, 0.0, 0.0});
        const UniformCovering u = uniform_covering(c);
        CHECK(u.kept.size() == 3);
        CHECK(u.cover.plus().empty());
    }

    TEST_CASE("dropped balls may reach outside the kept balls") {
        const UniformCovering u = uniform_covering(on_line({0.0, 0.9}, {1.0, 0.5}));
        CHECK(u.kept == std::vector<std::size_t>{0});
        CHECK(u.holds());
        const Vec p{1.3, 0.0};
        CHECK(in_ball(p, Ball{{0.9, 0.0}, 0.5}));
        CHECK_FALSE(in_ball(p, Ball{{0.0, 0.0}, 1.0}));
        CHECK(in_ball(p, Ball{{0.0, 0.0}, 5.0}));
    }

    TEST_CASE("vitali selection is disjoint and maximal") {
        Rng rng(61);
        for (int c = 0; c < 50; ++c) {
            const std::vector<Vec> centers = testgen::random_points(rng, 2, 60, 1.0);
            std::vector<double> radii;
            for (std::size_t i = 0; i < centers.size(); ++i) radii.push_back(rng.uniform(0.01, 0.2));
            const std::vector<std::size_t> sel = vitali_select(centers, radii);
            for (std::size_t a = 0; a < sel.size(); ++a)
                for (std::size_t b = a + 1; b < sel.size(); ++b)
                    CHECK(dist(centers[sel[a]], centers[sel[b]]) >= radii[sel[a]] + radii[sel[b]]);
            for (std::size_t i = 0; i < centers.size(); ++i) {
                bool hit = false;
                for (std::size_t s : sel) hit = hit || dist(centers[i], centers[s]) < radii[i] + radii[s] || s == i;
                CHECK(hit);
            }
        }
    }

    TEST_CASE("density proxies on a line") {
        const PointMeasure mu = flat(2, 1, 1.0 / 512.0);
        const DensityEstimate d = density_proxies(mu, 1, 1.0 / 64.0, 1.0 / 8.0);
        for (std::size_t i = 0; i < mu.size(); ++i) {
            if (std::abs(mu.point(i)[0]) > 0.8) continue;
            CHECK(d.lower[i] == doctest::Approx(2.0).epsilon(0.05));
            CHECK(d.upper[i] == doctest::Approx(2.0).epsilon(0.05));
        }
        const DensityInequality di = density_to_inequality(mu, d, 1.0);
        CHECK(di.holds);
    }

    TEST_CASE("intermediary packing") {
        const PointMeasure mu = flat(2, 1, 1.0 / 256.0);
        const CoveringPair cov = on_line({-0.5, 0.0, 0.5}, {0.1, 0.1, 0.1});
        const DisjointPacking nu = intermediary_packing(mu, cov, {0, 1, 2}, 1, 1.0);
        REQUIRE(nu.centers.size() == 3);
        CHECK(nu.disjoint);
        for (const Vec& y : nu.centers) CHECK(std::abs(y[1]) == 0.0);
        CHECK(nu.total() == doctest::Approx(0.3));
        const IntermediaryReport rep = intermediary_checks(mu, cov, {0, 1, 2}, nu, 1.0);
        CHECK(rep.all_pass());
        CHECK(rep.worst_beta == doctest::Approx(0.0).epsilon(1e-12));

        const DisjointPacking one = intermediary_packing(mu, on_line({0.25}, {0.1}), {0}, 1, 1.0);
        REQUIRE(one.centers.size() == 1);
        CHECK(one.weight(0) == doctest::Approx(0.1));
        const Vec com = center_of_mass(mu, Ball{{0.25, 0.0}, 0.1});
        CHECK(dist(one.centers[0], com) < 1e-12);
    }

    TEST_CASE("discrete reifenberg on segment balls") {
        const Constants c = make_constants(2, 1);
        DiscreteReifenbergParams p;
        p.k = 1;
        p.a = 1.0;
        p.run_chain = false;
        const DiscreteReifenbergReport one = discrete_reifenberg({{0.0, 0.0}}, {0.3}, {1.0}, p, c);
        CHECK(one.sum_rk == doctest::Approx(0.3));
        CHECK(one.all_pass());
        std::vector<Vec> centers;
        std::vector<double> radii, weights;
        for (int j = 0; j < 50; ++j) {
            centers.push_back({-1.0 + (2 * j + 1) / 51.0, 0.0});
            radii.push_back(0.999 / 51.0);
            weights.push_back(1.0);
        }
        const DiscreteReifenbergReport rep = discrete_reifenberg(centers, radii, weights, p, c);
        CHECK(rep.all_pass());
        CHECK(rep.sum_rk == doctest::Approx(50 * 0.999 / 51.0));
    }

    TEST_CASE("upper ahlfors on a line matches omega_1") {
        const Constants c = make_constants(2, 1);
        const PointMeasure mu = flat(2, 1, 1.0 / 512.0);
        UpperAhlforsParams p;
        p.k = 1;
        p.hypothesis_budget = 0;
        const UpperAhlforsReport rep = upper_ahlfors_check(mu, CoveringPair::support_of(mu), p, c);
        CHECK(rep.C == doctest::Approx(omega(1)).epsilon(0.1));
        for (const AhlforsSample& s : rep.samples) CHECK(s.ratio <= omega(1) * 1.01);
    }

    TEST_CASE("three-way split of plane data") {
        const Constants c = make_constants(2, 1);
        ThreeWayParams p;
        p.k = 1;
        const ThreeWay t = decompose_three_way(flat(2, 1, 1.0 / 128.0), p, c);
        CHECK(t.mass_l == 0.0);
        CHECK(t.mass_0 == 0.0);
        CHECK(t.mass_h == doctest::Approx(2.0).epsilon(0.01));
    }

    TEST_CASE("rectifiable cover gates") {
        const Constants c = make_constants(2, 1);
        RectCoverParams p;
        p.k = 1;
        const RectCover lattice = rectifiable_cover(lebesgue(2, 1.0 / 128.0), p, c);
        CHECK_FALSE(lattice.gate_passed);
        CHECK(lattice.pieces.empty());

        const PointMeasure graph = graph_sample(1, GraphFunction::Sine, 0.05, 1.0 / 512.0);
        p.a = 1.0;
        p.max_iters = 1;
        const RectCover rc = rectifiable_cover(graph, p, c);
        REQUIRE(rc.gate_passed);
        REQUIRE(rc.residual_trace.size() >= 2);
        CHECK(rc.residual_trace[1] <= 0.01 * rc.residual_trace[0]);
    }

    TEST_CASE("mesh distance") {
        Mesh m;
        m.n = 2;
        m.k = 1;
        m.vertices = {{0.0, 0.0}, {1.0, 0.0}};
        m.edges = {{0, 1}};
        CHECK(distance_to_mesh(Vec{0.5, 0.3}, m, m.vertices) == doctest::Approx(0.3));
        CHECK(distance_to_mesh(Vec{2.0, 0.0}, m, m.vertices) == doctest::Approx(1.0));
    }
}
