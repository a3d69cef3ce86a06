#include <doctest.h>

#include <cmath>

#include "corona/classify.hpp"
#include "corona/constants.hpp"
#include "corona/fixtures.hpp"
#include "generators.hpp"

using namespace corona;

namespace {

ClassifyParams params(double rho, double M) {
    ClassifyParams p;
    p.k = 1;
    p.rho = rho;
    p.M = M;
    p.m = m0_of(2, 1, rho) * M;
    return p;
}

}  // namespace

TEST_SUITE("classify") {
    TEST_CASE("dense disk samples are good") {
        const double rho = 1.0 / 32.0;
        const PointMeasure mu = flat(2, 1, rho / 4.0);
        const BallClass c = classify_ball(mu, Ball{{0.0, 0.0}, 1.0}, CoveringPair::support_of(mu), params(rho, 1.0));
        CHECK(c.kind == BallKind::Good);
        CHECK(witness_holds(mu, c));
        CHECK(c.good.centers.size() == 2);
    }

    TEST_CASE("mass on a point is bad with zero residual") {
        const PointMeasure mu = flat(2, 0, 1.0);
        const BallClass c = dichotomy(mu, Ball{{0.0, 0.0}, 1.0}, params(1.0 / 32.0, 0.25));
        CHECK(c.kind == BallKind::Bad);
        REQUIRE(c.bad_plane.has_value());
        CHECK(c.bad_plane->k() == 0);
        CHECK(c.bad_residual == 0.0);
        CHECK(c.bad_residual <= c.bad_bound);
        CHECK_FALSE(witness_holds(mu, c));
    }

    TEST_CASE("low mass stops") {
        MeasureBuilder b(2);
        b.add(Vec{0.0, 0.0}, 0.5);
        const PointMeasure mu = std::move(b).build();
        const BallClass c = classify_ball(mu, Ball{{0.0, 0.0}, 1.0}, CoveringPair::support_of(mu), params(1.0 / 32.0, 1.0));
        CHECK(c.kind == BallKind::Stop);
        CHECK(c.stop == StopReason::LowMass);
    }

    TEST_CASE("original balls stop the classification") {
        const PointMeasure mu = flat(2, 1, 1.0 / 128.0);
        const CoveringPair cov(2, {0.0, 0.0}, {0.5});
        const BallClass c = classify_ball(mu, Ball{{0.0, 0.0}, 0.25}, cov, params(1.0 / 32.0, 1.0));
        CHECK(c.kind == BallKind::Stop);
        CHECK(c.stop == StopReason::HitsOriginalBall);
        CHECK(classify_ball(mu, Ball{{0.0, 0.0}, 1.0}, cov, params(1.0 / 32.0, 1.0)).kind == BallKind::Good);
        CHECK(c.original == std::optional<std::size_t>(0));
    }

    TEST_CASE("parameter ranges") {
        const PointMeasure mu = flat(2, 1, 1.0 / 64.0);
        CHECK_THROWS_AS(dichotomy(mu, Ball{{0.0, 0.0}, 1.0}, params(1.0 / 8.0, 1.0)), PreconditionError);
        ClassifyParams p = params(1.0 / 32.0, 1.0);
        p.k = 2;
        CHECK_THROWS_AS(dichotomy(mu, Ball{{0.0, 0.0}, 1.0}, p), PreconditionError);
    }

    TEST_CASE("witness invariants on random measures") {
        Rng rng(51);
        int goods = 0;
        for (int c = 0; c < 100; ++c) {
            const PointMeasure mu = testgen::random_measure(rng, 2, 200, 1.0, 0.001, 0.01);
            const BallClass cls = dichotomy(mu, Ball{rng.in_ball(2, 0.2), rng.uniform(0.3, 1.0)}, params(1.0 / 20.0, 0.01));
            if (cls.kind == BallKind::Good) {
                ++goods;
                CHECK(witness_holds(mu, cls));
            } else {
                CHECK(cls.bad_residual <= cls.bad_bound * (1.0 + 1e-9));
            }
        }
        CHECK(goods > 0);
    }

    TEST_CASE("bad ball net around a point") {
        const double rho = 1.0 / 20.0;
        const AffinePlane w = AffinePlane::from_frame({0.0, 0.0}, {});
        const PointMeasure empty = flat(2, 0, 1.0);
        const std::vector<Vec> net = bad_ball_net(empty, w, Ball{{0.0, 0.0}, 1.0}, rho);
        REQUIRE(net.size() == 1);
        CHECK(norm(net[0]) == 0.0);
        const double c1 = c1_of(2, 1);
        CHECK(double(net.size()) * rho <= c1 * rho);
    }

    TEST_CASE("bad ball net is separated and covers the strip") {
        Rng rng(52);
        const double rho = 1.0 / 20.0;
        const Ball ball{{0.0, 0.0}, 1.0};
        const double s = rho * ball.radius;
        const AffinePlane w = AffinePlane::from_frame({0.0, 0.0}, {{1.0, 0.0}});
        MeasureBuilder b(2);
        for (int i = 0; i < 400; ++i) b.add(Vec{rng.uniform(-1.0, 1.0), rng.uniform(-6.0 * s, 6.0 * s)}, 1.0);
        const PointMeasure mu = std::move(b).build();
        const std::vector<Vec> net = bad_ball_net(mu, w, ball, rho);
        for (std::size_t i = 0; i < net.size(); ++i)
            for (std::size_t j = i + 1; j < net.size(); ++j) CHECK(dist(net[i], net[j]) >= 0.4 * s);
        for (std::size_t a : mu.ball_indices(ball)) {
            if (plane_distance(mu.point(a), w) >= 5.0 * s) continue;
            double best = INFINITY;
            for (const Vec& y : net) best = std::min(best, dist(y, mu.point(a)));
            CHECK(best < 0.4 * s);
        }
    }

    TEST_CASE("greedy net") {
        const std::vector<Vec> pts{{0.0, 0.0}, {0.1, 0.0}, {0.3, 0.0}, {0.35, 0.0}};
        CHECK(greedy_net(pts, 0.2, 2) == std::vector<Vec>{{0.0, 0.0}, {0.3, 0.0}});
        PointSet blocked(2, {0.0, 0.0});
        CHECK(greedy_net(pts, 0.2, 2, &blocked) == std::vector<Vec>{{0.3, 0.0}});
    }

    TEST_CASE("plane lattice inside the ball") {
        const AffinePlane w = AffinePlane::from_frame({0.0, 0.0}, {{1.0, 0.0}});
        bool truncated = true;
        const std::vector<Vec> pts = plane_lattice(w, Ball{{0.0, 0.0}, 1.0}, 0.25, 1000, {}, 0.0, &truncated);
        CHECK_FALSE(truncated);
        CHECK(pts.size() == 7);
        for (const Vec& p : pts) CHECK(norm(p) < 1.0);
    }

    TEST_CASE("tilting on flat and curved data") {
        const double rho = 1.0 / 32.0;
        const Ball outer{{0.0, 0.0}, 1.0};
        const Ball inner{{0.0, 0.0}, 1.0 / 32.0};
        const double c_tilt = make_constants(2, 1).c_tilt;
        const PointMeasure plane = graph_sample(1, GraphFunction::Flat, 0.0, 1.0 / 4096.0);
        const ClassifyParams p = params(rho, 1.0);
        const BallClass fc = dichotomy(plane, inner, p);
        REQUIRE(fc.kind == BallKind::Good);
        const TiltingResult ft = tilting_check(plane, inner, fc, outer, 1, p.m, 0.0, c_tilt);
        CHECK(ft.measured == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(ft.pass);
        for (double eps : {1e-3, 1e-2}) {
            const PointMeasure mu = graph_sample(1, GraphFunction::Parabola, eps, 1.0 / 4096.0);
            const BallClass c = dichotomy(mu, inner, p);
            REQUIRE(c.kind == BallKind::Good);
            const TiltingResult t = tilting_check(mu, inner, c, outer, 1, p.m, 0.0, c_tilt);
            CHECK(t.pass);
        }
        const BallClass bad = dichotomy(flat(2, 0, 1.0), inner, p);
        CHECK_THROWS_AS(tilting_check(plane, inner, bad, outer, 1, p.m, 0.0, c_tilt), PreconditionError);
    }
}
