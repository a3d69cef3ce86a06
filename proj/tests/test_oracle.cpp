#include <doctest.h>

#include <cmath>
#include <numbers>

#include "corona/measure.hpp"
#include "corona/oracle.hpp"
#include "generators.hpp"

using namespace corona;

namespace {

std::vector<Vec> unit_segment(int count, double shift = 0.0) {
    std::vector<Vec> out;
    for (int i = 0; i <= count; ++i) out.push_back({double(i) / count, shift});
    return out;
}

}  // namespace

TEST_SUITE("oracle") {
    TEST_CASE("sampled hausdorff distance") {
        const std::vector<Vec> a = unit_segment(200);
        CHECK(hausdorff_distance_sampled(a, a) == 0.0);
        CHECK(hausdorff_distance_sampled({{0.0}}, {{1.0}}) == 1.0);
        CHECK(hausdorff_distance_sampled(a, unit_segment(200, 0.1)) == doctest::Approx(0.1).epsilon(1e-9));
        CHECK(hausdorff_directed({{0.0}}, {{0.0}, {5.0}}) == 0.0);
        CHECK(hausdorff_directed({{0.0}, {5.0}}, {{0.0}}) == 5.0);
    }

    TEST_CASE("greedy hausdorff estimate") {
        const GreedyCover g = hausdorff_measure_greedy(unit_segment(2000), 1, 0.05);
        CHECK(g.mass >= 1.0 * (1.0 - 1e-9));
        CHECK(g.mass <= 3.0);
        for (double r : g.radii) CHECK(r <= 0.025);
        CHECK(hausdorff_measure_greedy({}, 1, 0.05).mass == 0.0);
        double prev = INFINITY;
        for (double delta : {0.1, 0.03, 0.01}) {
            const double m = hausdorff_measure_greedy(unit_segment(4000), 2, delta).mass;
            CHECK(m < prev);
            prev = m;
        }
        CHECK(prev < 0.02);
    }

    TEST_CASE("grid minkowski agrees with the indexed counter") {
        Rng rng(81);
        for (int c = 0; c < 20; ++c) {
            const std::vector<Vec> s = testgen::random_points(rng, 2, 5 + rng.index(40), 1.0);
            const double r = rng.uniform(0.05, 0.3);
            const Ball domain{{0.0, 0.0}, 1.0};
            const double step = r / 4.0;
            CHECK(std::abs(grid_minkowski(s, r, domain, step) - minkowski_volume(s, r, domain, step)) <= 1e-12);
        }
    }

    TEST_CASE("grid minkowski against the tube and disk formulas") {
        const double pi = std::numbers::pi;
        std::vector<Vec> seg;
        for (int i = 0; i <= 400; ++i) seg.push_back({-0.5 + i / 400.0, 0.0});
        CHECK(grid_minkowski(seg, 0.1, Ball{{0.0, 0.0}, 2.0}, 0.1 / 20.0) ==
              doctest::Approx(0.2 + pi * 0.01).epsilon(0.05));
        CHECK(grid_minkowski({{0.0, 0.0}}, 0.5, Ball{{0.0, 0.0}, 1.0}, 0.01) == doctest::Approx(pi / 4.0).epsilon(0.05));
        CHECK_THROWS_AS(grid_minkowski(seg, 0.1, Ball{{0.0, 0.0}, 1.0}, 0.05), PreconditionError);
    }

    TEST_CASE("budgets") {
        OracleBudget tiny;
        tiny.max_grid_cells = 100;
        CHECK_THROWS_AS(grid_minkowski({{0.0, 0.0}}, 0.5, Ball{{0.0, 0.0}, 1.0}, 0.01, tiny), BudgetExceeded);
        tiny.max_atoms = 10;
        CHECK_THROWS_AS(hausdorff_directed(unit_segment(100), unit_segment(100), tiny), BudgetExceeded);
    }

    TEST_CASE("flat ball measures") {
        CHECK(flat_ball_measure(1, Vec{0.0, 0.0}, 0.5, 1.0) == doctest::Approx(1.0));
        CHECK(flat_ball_measure(1, Vec{0.9, 0.0}, 0.5, 1.0) == doctest::Approx(0.6));
        CHECK(flat_ball_measure(1, Vec{0.0, 0.3}, 0.5, 1.0) == doctest::Approx(0.8));
        CHECK(flat_ball_measure(1, Vec{0.0, 0.6}, 0.5, 1.0) == 0.0);
        CHECK(flat_ball_intersection(1, 0.5, 1.0, 1.0) == doctest::Approx(1.5));
        const double pi = std::numbers::pi;
        CHECK(flat_ball_intersection(2, 0.0, 1.0, 1.0) == doctest::Approx(pi));
        CHECK(flat_ball_intersection(2, 1.0, 1.0, 1.0) == doctest::Approx(2.0 * pi / 3.0 - std::sqrt(3.0) / 2.0));
        CHECK(flat_ball_intersection(2, 3.0, 1.0, 1.0) == 0.0);
    }

    TEST_CASE("polyline length") {
        CHECK(polyline_length({{0.0, 0.0}, {3.0, 4.0}, {3.0, 5.0}}) == doctest::Approx(6.0));
        CHECK(polyline_length({}) == 0.0);
    }
}
