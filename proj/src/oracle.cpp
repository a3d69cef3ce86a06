#include "corona/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "corona/parallel.hpp"

namespace corona {

namespace {

double sq_dist(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

void same_dim(const std::vector<Vec>& A, std::size_t n, const char* what) {
    for (const Vec& a : A)
        if (a.size() != n) throw DimensionMismatch(std::string(what) + ": mixed dimensions");
}

}  // namespace

OracleClock::OracleClock(const OracleBudget& b, const char* what)
    : budget_(b), what_(what), start_(std::chrono::steady_clock::now()) {
    if (b.max_atoms == 0 || b.max_grid_cells == 0 || b.max_plane_grid == 0 || !(b.wall_clock_seconds > 0.0))
        throw PreconditionError(std::string(what) + ": oracle budget caps must be positive");
}

void OracleClock::check_atoms(std::size_t count) const {
    if (count > budget_.max_atoms)
        throw BudgetExceeded(std::string(what_) + ": " + std::to_string(count) + " atoms exceed the oracle cap of " +
                             std::to_string(budget_.max_atoms));
}

void OracleClock::check_cells(double count) const {
    if (count > double(budget_.max_grid_cells))
        throw BudgetExceeded(std::string(what_) + ": " + std::to_string(static_cast<long long>(count)) +
                             " grid cells exceed the oracle cap of " + std::to_string(budget_.max_grid_cells));
}

void OracleClock::check_time() const {
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    if (s > budget_.wall_clock_seconds)
        throw BudgetExceeded(std::string(what_) + ": wall-clock cap of " + std::to_string(budget_.wall_clock_seconds) +
                             " s exceeded");
}

double hausdorff_directed(const std::vector<Vec>& A, const std::vector<Vec>& B, const OracleBudget& budget) {
    if (A.empty() || B.empty()) throw PreconditionError("hausdorff distance of an empty set");
    const OracleClock clock(budget, "hausdorff_directed");
    clock.check_atoms(A.size());
    clock.check_atoms(B.size());
    same_dim(A, A.front().size(), "hausdorff_directed");
    same_dim(B, A.front().size(), "hausdorff_directed");
    double worst = 0.0;
    for (std::size_t i = 0; i < A.size(); ++i) {
        double best = INFINITY;
        for (const Vec& b : B) best = std::min(best, sq_dist(A[i], b));
        worst = std::max(worst, best);
        if ((i & 1023) == 1023) clock.check_time();
    }
    return std::sqrt(worst);
}

double hausdorff_distance_sampled(const std::vector<Vec>& A, const std::vector<Vec>& B, const OracleBudget& budget) {
    return std::max(hausdorff_directed(A, B, budget), hausdorff_directed(B, A, budget));
}

GreedyCover hausdorff_measure_greedy(const std::vector<Vec>& S, int k, double delta, const OracleBudget& budget) {
    if (!(delta > 0.0)) throw PreconditionError("hausdorff_measure_greedy: delta must be positive");
    GreedyCover out;
    if (S.empty()) return out;
    const OracleClock clock(budget, "hausdorff_measure_greedy");
    clock.check_atoms(S.size());
    same_dim(S, S.front().size(), "hausdorff_measure_greedy");
    const double cap2 = 0.25 * delta * delta;
    std::vector<double> r2;
    for (std::size_t i = 0; i < S.size(); ++i) {
        bool placed = false;
        for (std::size_t c = 0; c < out.centers.size(); ++c) {
            const double d2 = sq_dist(S[i], out.centers[c]);
            if (d2 <= cap2) {
                r2[c] = std::max(r2[c], d2);
                placed = true;
                break;
            }
        }
        if (!placed) {
            out.centers.push_back(S[i]);
            r2.push_back(0.0);
        }
        if ((i & 255) == 255) clock.check_time();
    }
    const double wk = std::pow(std::numbers::pi, k / 2.0) / std::tgamma(k / 2.0 + 1.0);
    for (double v : r2) {
        out.radii.push_back(std::sqrt(v));
        out.mass += wk * std::pow(std::sqrt(v), k);
    }
    return out;
}

double grid_minkowski(const std::vector<Vec>& S, double r, const Ball& domain, double step,
                      const OracleBudget& budget) {
    if (!(step > 0.0) || step > r / 4.0 * (1.0 + 1e-12))
        throw PreconditionError("grid_minkowski: grid step must be at most r/4");
    if (S.empty()) return 0.0;
    const OracleClock clock(budget, "grid_minkowski");
    const std::size_t n = domain.center.size();
    same_dim(S, n, "grid_minkowski");
    clock.check_atoms(S.size());
    const long m = static_cast<long>(std::ceil(2.0 * domain.radius / step));
    clock.check_cells(std::pow(double(m), double(n)));
    const double r2 = r * r, R2 = domain.radius * domain.radius;
    // Slabs along the first axis are independent.
    std::vector<long> counts(static_cast<std::size_t>(m), 0);
    parallel_for(static_cast<std::size_t>(m), 0, [&](std::size_t slab) {
        std::vector<long> idx(n, 0);
        Vec c(n);
        long count = 0;
        const std::size_t free_dims = n - 1;
        for (;;) {
            c[0] = domain.center[0] - domain.radius + (double(slab) + 0.5) * step;
            for (std::size_t d = 1; d < n; ++d) c[d] = domain.center[d] - domain.radius + (idx[d] + 0.5) * step;
            double in = 0.0;
            for (std::size_t d = 0; d < n; ++d) in += (c[d] - domain.center[d]) * (c[d] - domain.center[d]);
            if (in < R2)
                for (const Vec& s : S)
                    if (sq_dist(c, s) < r2) {
                        ++count;
                        break;
                    }
            if (free_dims == 0) break;
            std::size_t d = 1;
            while (d < n && ++idx[d] == m) idx[d++] = 0;
            if (d == n) break;
        }
        counts[slab] = count;
    });
    clock.check_time();
    long total = 0;
    for (long v : counts) total += v;
    return double(total) * std::pow(step, double(n));
}

double flat_ball_intersection(int k, double d, double r1, double r2) {
    if (r1 <= 0.0 || r2 <= 0.0) return 0.0;
    d = std::abs(d);
    if (k == 1) {
        const double lo = std::max(-r1, d - r2), hi = std::min(r1, d + r2);
        return std::max(0.0, hi - lo);
    }
    if (k == 2) {
        if (d >= r1 + r2) return 0.0;
        const double small = std::min(r1, r2), big = std::max(r1, r2);
        if (d <= big - small) return std::numbers::pi * small * small;
        const double a1 = std::acos(std::clamp((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1), -1.0, 1.0));
        const double a2 = std::acos(std::clamp((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2), -1.0, 1.0));
        const double tri = 0.5 * std::sqrt(std::max(0.0, (-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2)));
        return r1 * r1 * a1 + r2 * r2 * a2 - tri;
    }
    throw PreconditionError("flat_ball_intersection: closed form only for k = 1 or 2");
}

double flat_ball_measure(int k, VecView x, double r, double support_radius) {
    if (k < 1 || static_cast<std::size_t>(k) > x.size()) throw PreconditionError("flat_ball_measure: need 1 <= k <= n");
    double h2 = 0.0, d2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) (i < static_cast<std::size_t>(k) ? d2 : h2) += x[i] * x[i];
    if (h2 >= r * r) return 0.0;
    return flat_ball_intersection(k, std::sqrt(d2), std::sqrt(r * r - h2), support_radius);
}

double polyline_length(const std::vector<Vec>& v) {
    double s = 0.0;
    for (std::size_t i = 1; i < v.size(); ++i) s += std::sqrt(sq_dist(v[i - 1], v[i]));
    return s;
}

}  // namespace corona
