// Brute-force beta oracle. Shares nothing with the eigen path on purpose.
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "corona/beta.hpp"

namespace corona {

namespace {

struct Atoms {
    std::vector<std::array<double, 3>> p;
    std::vector<double> w;
    std::size_t n = 0;
    double mass = 0.0;
};

Atoms gather(const PointMeasure& mu, const Ball& ball) {
    if (mu.dim() > 3) throw BudgetExceeded("beta_oracle supports n <= 3 only");
    Atoms a;
    a.n = mu.dim();
    const double r2 = ball.radius * ball.radius;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        double d2 = 0.0;
        std::array<double, 3> q{0, 0, 0};
        for (std::size_t j = 0; j < a.n; ++j) {
            q[j] = mu.point(i)[j];
            d2 += (q[j] - ball.center[j]) * (q[j] - ball.center[j]);
        }
        if (d2 < r2 && mu.weight(i) > 0.0) {
            a.p.push_back(q);
            a.w.push_back(mu.weight(i));
            a.mass += mu.weight(i);
        }
    }
    if (a.p.size() > 200) throw BudgetExceeded("beta_oracle: more than 200 atoms in the ball");
    return a;
}

// Weighted variance of the atoms along unit direction u.
double variance_along(const Atoms& a, const std::array<double, 3>& u) {
    double mean = 0.0;
    for (std::size_t i = 0; i < a.p.size(); ++i)
        mean += a.w[i] * (a.p[i][0] * u[0] + a.p[i][1] * u[1] + a.p[i][2] * u[2]);
    mean /= a.mass;
    double v = 0.0;
    for (std::size_t i = 0; i < a.p.size(); ++i) {
        const double t = a.p[i][0] * u[0] + a.p[i][1] * u[1] + a.p[i][2] * u[2] - mean;
        v += a.w[i] * t * t;
    }
    return v;
}

double total_variance(const Atoms& a) {
    double v = 0.0;
    for (int j = 0; j < 3; ++j) {
        std::array<double, 3> e{0, 0, 0};
        e[j] = 1.0;
        if (static_cast<std::size_t>(j) < a.n) v += variance_along(a, e);
    }
    return v;
}

}  // namespace

double beta_oracle(const PointMeasure& mu, const Ball& ball, int k, double grid_resolution) {
    const Atoms a = gather(mu, ball);
    const std::size_t n = a.n;
    if (k < 0 || static_cast<std::size_t>(k) >= n) throw PreconditionError("beta_oracle: need 0 <= k < n");
    if (!(grid_resolution > 0.0) || grid_resolution > 0.5) throw PreconditionError("beta_oracle: bad grid resolution");
    if (a.p.empty()) throw ZeroMassError("beta_oracle: ball has zero mass");
    const double norm_r = std::pow(ball.radius, k + 2);
    const double pi = std::numbers::pi;

    if (k == 0) return total_variance(a) / norm_r;

    const double h = pi * grid_resolution;
    double best = std::numeric_limits<double>::infinity();
    if (n == 2) {
        // k = 1: scan line directions, residual is the variance along the normal.
        const int steps = static_cast<int>(std::ceil(1.0 / grid_resolution));
        for (int s = 0; s < steps; ++s) {
            const double t = pi * s / steps;
            best = std::min(best, variance_along(a, {-std::sin(t), std::cos(t), 0.0}));
        }
        return best / norm_r;
    }

    // n = 3: scan a hemisphere of unit vectors u.
    const double tot = k == 1 ? total_variance(a) : 0.0;
    const int polar = static_cast<int>(std::ceil(0.5 * pi / h));
    const int az = static_cast<int>(std::ceil(2.0 * pi / h));
    for (int i = 0; i <= polar; ++i) {
        const double phi = 0.5 * pi * i / polar;
        const int count = i == 0 ? 1 : az;
        for (int j = 0; j < count; ++j) {
            const double psi = 2.0 * pi * j / az;
            const std::array<double, 3> u{std::sin(phi) * std::cos(psi), std::sin(phi) * std::sin(psi), std::cos(phi)};
            // k = 2: u is the normal. k = 1: u is the line direction.
            const double v = variance_along(a, u);
            best = std::min(best, k == 2 ? v : tot - v);
        }
    }
    return std::max(best, 0.0) / norm_r;
}

double beta_oracle_error_bound(const PointMeasure& mu, const Ball& ball, int k, double grid_resolution) {
    const Atoms a = gather(mu, ball);
    if (a.p.empty() || k == 0) return 0.0;
    const double h = std::numbers::pi * grid_resolution;
    const double s = std::sin(h);
    return s * s * total_variance(a) / std::pow(ball.radius, k + 2);
}

}  // namespace corona
