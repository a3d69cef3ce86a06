#include <doctest.h>

#include <cmath>
#include <sstream>

#include "corona/beta.hpp"
#include "corona/constants.hpp"
#include "corona/fixtures.hpp"
#include "corona/oracle.hpp"
#include "generators.hpp"

using namespace corona;

TEST_SUITE("examples") {
    TEST_CASE("koch base cases") {
        const KochCurve zero = koch({}, 0);
        CHECK(zero.vertices.size() == 2);
        CHECK(zero.length == 1.0);
        for (int d = 0; d <= 5; ++d) {
            const KochCurve flat_curve = koch(std::vector<double>(5, 0.0), d);
            CHECK(flat_curve.length == doctest::Approx(1.0).epsilon(1e-12));
            for (const Vec& v : flat_curve.vertices) CHECK(v[1] == 0.0);
        }
        CHECK_THROWS(koch(std::vector<double>(17, 0.1), 17));
        CHECK_THROWS(koch({-0.1}, 1));
    }

    TEST_CASE("koch length agrees with the product formula and the polyline") {
        Rng rng(71);
        for (int c = 0; c < 20; ++c) {
            std::vector<double> kappa;
            for (int i = 0; i < 7; ++i) kappa.push_back(rng.uniform(0.0, 0.5));
            const int depth = 1 + static_cast<int>(rng.index(7));
            const KochCurve curve = koch(kappa, depth);
            const double formula = koch_length_formula(kappa, depth);
            CHECK(curve.length == doctest::Approx(formula).epsilon(1e-9));
            CHECK(polyline_length(curve.vertices) == doctest::Approx(formula).epsilon(1e-9));
            CHECK(koch_length_streamed(kappa, depth) == doctest::Approx(formula).epsilon(1e-9));
            CHECK(koch_measure(curve).total_mass() == doctest::Approx(formula).epsilon(1e-9));
        }
    }

    TEST_CASE("koch step ratio for constant height") {
        for (double kappa : {0.1, 0.3, 0.5}) {
            const std::vector<double> ks(4, kappa);
            const double ratio = koch(ks, 4).length / koch(ks, 3).length;
            CHECK(ratio == doctest::Approx((2.0 + std::sqrt(1.0 + 36.0 * kappa * kappa)) / 3.0).epsilon(1e-12));
        }
    }

    TEST_CASE("lattice lebesgue and flat") {
        const PointMeasure mu = lebesgue(2, 1.0 / 64.0);
        CHECK(mu.total_mass() == doctest::Approx(omega(2)).epsilon(0.02));
        CHECK(flat(2, 0, 1.0).size() == 1);
        CHECK(flat(3, 1, 0.25).size() == 7);
        CHECK(flat(3, 1, 0.25).total_mass() == doctest::Approx(1.75));
    }

    TEST_CASE("packed spheres") {
        // rho = 1: unit circles around the integer points of B_2.
        const PointMeasure one = packed_spheres(2, 1, 1.0, 64, 2.0);
        for (std::size_t i = 0; i < one.size(); ++i) {
            const Vec p = to_vec(one.point(i));
            CHECK(norm(p) < 2.0);
            double best = INFINITY;
            for (int a = -1; a <= 1; ++a)
                for (int b = -1; b <= 1; ++b) best = std::min(best, std::abs(std::hypot(p[0] - a, p[1] - b) - 1.0));
            CHECK(best < 1e-12);
        }
        const double c_bound = make_constants(2, 1).c_sphere_pack;
        for (double rho : {0.25, 0.125, 0.0625}) {
            const PointMeasure mu = packed_spheres(2, 1, rho, 32, 2.0);
            CHECK(mu.ball_mass(Ball{{0.0, 0.0}, 1.0}) <= c_bound);
        }
    }

    TEST_CASE("plane plus diracs") {
        const PointMeasure base = lebesgue(2, 1.0 / 32.0);
        const PointMeasure none = plane_plus_diracs(2, 1, {}, 1.0 / 32.0);
        CHECK(none.size() == base.size());
        CHECK(none.total_mass() == doctest::Approx(base.total_mass()).epsilon(1e-12));
        for (const Vec& p : dirac_positions(3, 2, 20)) {
            CHECK(std::abs(p[2]) <= 1e-12);
            CHECK(norm(p) < 0.95);
        }
        const PointMeasure heavy = plane_plus_diracs(2, 1, {5.0, 7.0}, 1.0 / 32.0);
        CHECK(heavy.total_mass() == doctest::Approx(base.total_mass() + 12.0).epsilon(1e-12));
    }

    TEST_CASE("nested segments") {
        const double rho = 1.0 / 32.0;
        const PointMeasure mu = nested_segments(2, rho, 3, 64, 2.0);
        CHECK(mu.size() == 3 * 64);
        for (std::size_t i = 0; i < mu.size(); ++i) {
            const double x = std::abs(mu.point(i)[0]);
            CHECK(mu.point(i)[1] == 0.0);
            CHECK(x <= 1.0);
            const bool level0 = x >= 2.0 * rho;
            const bool level1 = x >= 2.0 * std::pow(rho, 3) && x <= rho * rho;
            const bool level2 = x <= std::pow(rho, 4);
            CHECK((level0 || level1 || level2));
        }
        CHECK(mu.ball_mass(Ball{{0.0, 0.0}, 1.0}) == doctest::Approx(2.0 * (1.0 - 2.0 * rho) * 2.0).epsilon(0.05));
        CHECK_THROWS(nested_segments(2, 0.6, 2, 8, 1.0));
        CHECK_THROWS(nested_segments(2, 0.1, 9, 8, 1.0));
    }

    TEST_CASE("graph samples") {
        const PointMeasure line = graph_sample(1, GraphFunction::Flat, 0.0, 1.0 / 256.0);
        CHECK(line.total_mass() == doctest::Approx(2.0).epsilon(0.01));
        const PointMeasure sine = graph_sample(1, GraphFunction::Sine, 0.1, 1.0 / 256.0);
        CHECK(sine.total_mass() > line.total_mass());
        for (std::size_t i = 0; i < sine.size(); ++i)
            CHECK(sine.point(i)[1] == doctest::Approx(graph_value(GraphFunction::Sine, 0.1, sine.point(i).subspan(0, 1))));
        const PointMeasure noisy = graph_with_noise(1, GraphFunction::Abs, 0.5, 1.0 / 256.0, 20, 0.1, 3);
        const PointMeasure clean = graph_sample(1, GraphFunction::Abs, 0.5, 1.0 / 256.0);
        CHECK(noisy.size() == clean.size() + 20);
        CHECK(noisy.total_mass() == doctest::Approx(clean.total_mass() + 0.1).epsilon(1e-12));
        CHECK(graph_function_from("parabola") == GraphFunction::Parabola);
        CHECK_THROWS(graph_function_from("cubic"));
    }

    TEST_CASE("dini sums grow with curvature") {
        double prev = -1.0;
        for (double a : {0.02, 0.1, 0.5}) {
            const PointMeasure mu = graph_sample(1, GraphFunction::Parabola, a, 1.0 / 256.0);
            const double s = dini_sum(mu, Vec{0.0, 0.0}, 1, 0.0, -5, -1);
            CHECK(s > prev);
            prev = s;
        }
    }

    TEST_CASE("lipschitz corner dini sum grows as the floor drops") {
        const PointMeasure mu = graph_sample(1, GraphFunction::Abs, 0.5, 1.0 / 4096.0);
        const double s4 = dini_sum(mu, Vec{0.0, 0.0}, 1, 0.0, -4, 0);
        const double s8 = dini_sum(mu, Vec{0.0, 0.0}, 1, 0.0, -8, 0);
        CHECK(s8 > 1.8 * s4);
    }

    TEST_CASE("generation is deterministic and specs round trip") {
        FixtureSpec s;
        s.kind = "graph_noise";
        s.function = "sine";
        s.amplitude = 0.05;
        s.spacing = 1.0 / 64.0;
        s.noise_count = 10;
        s.noise_mass = 0.1;
        s.seed = 9;
        const FixtureSpec t = fixture_spec_from_json(to_json(s));
        CHECK(to_json(t) == to_json(s));
        std::stringstream a, b;
        write_measure_csv(a, generate(s));
        write_measure_csv(b, generate(t));
        CHECK(a.str() == b.str());
        FixtureSpec bad;
        bad.kind = "spiral";
        CHECK_THROWS(generate(bad));
    }

    TEST_CASE("rng streams are reproducible") {
        Rng a(5), b(5), c(6);
        for (int i = 0; i < 10; ++i) {
            const std::uint64_t x = a.next();
            CHECK(x == b.next());
            CHECK(x != c.next());
        }
        Rng r(7);
        for (int i = 0; i < 1000; ++i) {
            const double u = r.uniform();
            CHECK(u >= 0.0);
            CHECK(u < 1.0);
            CHECK(norm(r.in_ball(3, 0.5)) < 0.5);
            CHECK(norm(r.on_sphere(3)) == doctest::Approx(1.0));
        }
    }
}
