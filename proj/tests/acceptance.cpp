// Acceptance run: one line per criterion.
// Exit status is nonzero when any criterion fails without a documented analysis.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "corona/beta.hpp"
#include "corona/chain.hpp"
#include "corona/density.hpp"
#include "corona/fixtures.hpp"
#include "corona/manifold.hpp"
#include "corona/oracle.hpp"
#include "corona/tree.hpp"

using namespace corona;

namespace {

// Pinned tolerances.
constexpr double kOracleRel = 0.02;
constexpr double kOracleGrid = 1.0 / 720.0;
constexpr double kOracleSeconds = 60.0;
constexpr double kPropertyTol = 1e-9;
constexpr double kLscTol = 1e-6;
constexpr int kPropertyCases = 1000;
constexpr double kSlopeTol = 0.2;
constexpr double kLatticeSeconds = 30.0;
constexpr double kKochConvergent = 1.001;
constexpr double kKochStepTol = 1e-9;
constexpr double kTreeSeconds = 60.0;
constexpr double kFlatDistortionTol = 1e-12;
constexpr double kBadTreeShrink = 1e-3;
constexpr double kChainDecay = 0.6;
constexpr double kSharpSpread = 0.01;
constexpr double kMinkowskiFraction = 0.9;
constexpr double kReifenbergDrift = 0.05;
constexpr double kAhlforsRel = 0.10;
constexpr double kHalving = 0.5;
constexpr int kHalvingIterations = 4;

struct Outcome {
    bool pass = false;
    std::string detail;
};

// Criteria with an analysis in the decisions ledger: a failure is reported but does
// not change the exit status.
const std::vector<int> kDocumented = {12};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

PointMeasure random_measure(Rng& rng, std::size_t n, std::size_t count, double radius) {
    MeasureBuilder b(n);
    for (std::size_t i = 0; i < count; ++i) b.add(rng.in_ball(n, radius), rng.uniform(0.1, 1.0));
    return std::move(b).build();
}

Outcome beta_oracle_equivalence() {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(101);
    double worst_rel = 0.0, worst_excess = 0.0;
    int failures = 0;
    for (int i = 0; i < 50; ++i) {
        const int k = 1 + i % 2;
        const std::size_t count = 5 + rng.index(16);
        const PointMeasure mu = random_measure(rng, 3, count, 0.95);
        const Ball ball{{0.0, 0.0, 0.0}, 1.0};
        const double fit = best_plane(mu, ball, k).beta_sq;
        const double grid = beta_oracle(mu, ball, k, kOracleGrid);
        const double excess = fit - grid;
        const double rel = std::abs(grid - fit) / std::max(grid, 1e-300);
        worst_excess = std::max(worst_excess, excess);
        worst_rel = std::max(worst_rel, rel);
        if (excess > kPropertyTol * std::max(1.0, grid) || rel > kOracleRel) ++failures;
    }
    const double s = seconds_since(t0);
    return {failures == 0 && s < kOracleSeconds,
            fmt("50 measures, worst relative gap %.3g (tol %.2g), worst fit-minus-oracle %.2g, %.1f s (cap %.0f s)",
                worst_rel, kOracleRel, worst_excess, s, kOracleSeconds)};
}

bool le_tol(double lhs, double rhs, double tol) { return lhs <= rhs + tol * std::max(1.0, std::abs(rhs)); }

Outcome beta_properties() {
    Rng rng(202);
    int mono1 = 0, mono2 = 0, scale = 0, lsc = 0;
    for (int c = 0; c < kPropertyCases; ++c) {
        const std::size_t n = 2 + c % 2;
        const int k = 1 + static_cast<int>(rng.index(n - 1));
        const PointMeasure mu = random_measure(rng, n, 30 + rng.index(50), 1.0);
        const double eps_bar = rng.uniform() < 0.5 ? 0.0 : rng.uniform(0.0, 2.0);

        // B_r(y) inside B_R(x).
        {
            const Vec x = rng.in_ball(n, 0.5);
            const double R = rng.uniform(0.2, 1.0);
            const double r = R * rng.uniform(0.05, 0.95);
            Vec y = rng.on_sphere(n);
            const double t = (R - r) * rng.uniform();
            for (std::size_t j = 0; j < n; ++j) y[j] = x[j] + t * y[j];
            if (mu.ball_mass(Ball{x, R}) > eps_bar * std::pow(R, k)) {
                const double lhs = beta_truncated(mu, Ball{y, r}, k, eps_bar);
                const double rhs = std::pow(R / r, k + 2) * beta_truncated(mu, Ball{x, R}, k, eps_bar);
                if (!le_tol(lhs, rhs, kPropertyTol)) ++mono1;
            }
        }
        // |x - y| < r, compare with B_{2r}(y).
        {
            const Vec y = rng.in_ball(n, 0.5);
            const double r = rng.uniform(0.05, 0.5);
            Vec x = rng.on_sphere(n);
            const double t = r * rng.uniform();
            for (std::size_t j = 0; j < n; ++j) x[j] = y[j] + t * x[j];
            if (mu.ball_mass(Ball{y, 2.0 * r}) > std::pow(2.0, k) * eps_bar * std::pow(r, k)) {
                const double lhs = beta_truncated(mu, Ball{x, r}, k, eps_bar);
                const double rhs = std::pow(2.0, k + 2) * beta_truncated(mu, Ball{y, 2.0 * r}, k, eps_bar);
                if (!le_tol(lhs, rhs, kPropertyTol)) ++mono2;
            }
        }
        // Rescaling.
        {
            const Vec x = rng.in_ball(n, 0.5);
            const double r = rng.uniform(0.1, 2.0);
            const Vec y = rng.in_ball(n, 0.5);
            const double s = rng.uniform(0.1, 1.0);
            const PointMeasure nu = rescale(mu, x, r, k);
            Vec z(n);
            for (std::size_t j = 0; j < n; ++j) z[j] = x[j] + r * y[j];
            const double a = beta_truncated(nu, Ball{y, s}, k, eps_bar);
            const double b = beta_truncated(mu, Ball{z, r * s}, k, eps_bar);
            if (std::abs(a - b) > kPropertyTol * std::max(std::abs(b), 1e-3)) ++scale;
        }
        // (x_i, r_i) -> (x, r); half the cases put an atom on the limiting sphere.
        {
            // Dyadic center and radius so that x + r e_j lies exactly on the sphere.
            Vec x = rng.in_ball(n, 0.5);
            for (double& v : x) v = std::ldexp(std::round(std::ldexp(v, 10)), -10);
            const double r = std::ldexp(std::round(std::ldexp(rng.uniform(0.1, 0.8), 10)), -10);
            MeasureBuilder mb(n);
            for (std::size_t i = 0; i < mu.size(); ++i) mb.add(to_vec(mu.point(i)), mu.weight(i));
            if (c % 2 == 0) {
                Vec edge = x;
                edge[rng.index(n)] += r;
                mb.add(edge, 1.0);
            }
            const PointMeasure nu = std::move(mb).build();
            const double limit = beta_truncated(nu, Ball{x, r}, k, 0.0);
            double tail = INFINITY;
            for (int i = 32; i <= 44; ++i) {
                Vec xi = rng.on_sphere(n);
                const double h = std::ldexp(1.0, -i);
                for (std::size_t j = 0; j < n; ++j) xi[j] = x[j] + h * rng.uniform() * xi[j];
                const double ri = r + h * rng.uniform(-1.0, 1.0);
                tail = std::min(tail, beta_truncated(nu, Ball{xi, ri}, k, 0.0));
            }
            if (limit > tail + kLscTol * std::max(1.0, limit)) ++lsc;
        }
    }
    return {mono1 + mono2 + scale + lsc == 0,
            fmt("%d cases each: violations nested %d, doubled %d, rescale %d, lsc %d", kPropertyCases, mono1, mono2,
                scale, lsc)};
}

Outcome lattice_lebesgue() {
    const auto t0 = std::chrono::steady_clock::now();
    const PointMeasure mu = lebesgue(2, std::ldexp(1.0, -7));
    Rng rng(303);
    const double bound = 2.0 * omega(2);
    double worst_ratio = 0.0, worst_slope_gap = 0.0;
    int failures = 0;
    for (int c = 0; c < 8; ++c) {
        const Vec x = rng.in_ball(2, 1.0 / 64.0);
        std::vector<double> lx, ly;
        for (int a = -5; a <= 0; ++a) {
            const double r = std::ldexp(1.0, a);
            const double b = best_plane(mu, Ball{x, r}, 1).beta_sq;
            worst_ratio = std::max(worst_ratio, b / (bound * r));
            if (b > bound * r) ++failures;
            lx.push_back(std::log(r));
            ly.push_back(std::log(b));
        }
        const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / double(lx.size());
        const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / double(ly.size());
        double sxy = 0.0, sxx = 0.0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            sxy += (lx[i] - mx) * (ly[i] - my);
            sxx += (lx[i] - mx) * (lx[i] - mx);
        }
        const double gap = std::abs(sxy / sxx - 1.0);
        worst_slope_gap = std::max(worst_slope_gap, gap);
        if (gap > kSlopeTol) ++failures;
    }
    const double s = seconds_since(t0);
    return {failures == 0 && s < kLatticeSeconds,
            fmt("8 centers, max beta^2/(2 omega_2 r) %.3f, worst |slope - 1| %.3f (tol %.1f), %.1f s", worst_ratio,
                worst_slope_gap, kSlopeTol, s)};
}

Outcome koch_dichotomy() {
    std::vector<double> decaying(12);
    for (int i = 1; i <= 12; ++i) decaying[i - 1] = std::ldexp(1.0, -i);
    const double ratio12 = koch_length_streamed(decaying, 12) / koch_length_streamed(decaying, 11);
    const std::vector<double> constant(10, 0.3);
    const double expected = (2.0 + std::sqrt(1.0 + 36.0 * 0.09)) / 3.0;
    double worst = 0.0;
    double prev = koch_length_streamed(constant, 0);
    for (int d = 1; d <= 10; ++d) {
        const double cur = koch_length_streamed(constant, d);
        worst = std::max(worst, std::abs(cur / prev - expected));
        prev = cur;
    }
    return {ratio12 < kKochConvergent && worst <= kKochStepTol,
            fmt("kappa_i = 2^-i: |g12|/|g11| = %.9f (< %.3f); kappa = 0.3: worst step-ratio error %.2g vs %.9f",
                ratio12, kKochConvergent, worst, expected)};
}

Outcome good_tree() {
    const auto t0 = std::chrono::steady_clock::now();
    const Constants c = make_constants(2, 1);
    TreeParams tp;
    tp.k = 1;
    tp.rho = 1.0 / 32.0;
    tp.M = 1.0;
    const Ball root{{0.0, 0.0}, 1.0};

    const PointMeasure plane = flat(2, 1, 1.0 / 256.0);
    const CoveringPair pc = CoveringPair::support_of(plane);
    const TreeRecord ft = build_good_tree(plane, root, pc, tp, c);
    const auto prof = packing_profile(ft);
    const double pack = *std::max_element(prof.begin(), prof.end());
    double excess = 0.0;
    for (const TreeScale& s : ft.scales) excess += s.excess_mass;
    const ManifoldResult fm = manifold_limit(ft, c);
    const bool flat_ok = pack <= std::pow(50.0, 1) && excess == 0.0 && std::abs(fm.distortion - 1.0) <= kFlatDistortionTol;

    const PointMeasure sine = graph_sample(1, GraphFunction::Sine, 0.05, 1.0 / 256.0);
    const CoveringPair sc = CoveringPair::support_of(sine);
    const TreeRecord st = build_good_tree(sine, root, sc, tp, c);
    const ManifoldResult sm = manifold_limit(st, c);
    const double bound = std::exp(c.c2 * st.delta * st.delta / tp.M);
    bool incl = false;
    for (const BoundCheck& b : sm.checks)
        if (b.name == "good_ball_inclusion") incl = b.pass;
    const double s = seconds_since(t0);
    return {flat_ok && sm.distortion <= bound && incl && s < kTreeSeconds,
            fmt("flat: packing %.3g <= 50, excess %.3g, distortion - 1 = %.2g; sine 0.05: distortion %.4f <= "
                "e^{c2 delta^2/M} = %.4g (c2 %.0f, delta %.4f), inclusions %s, %.1f s",
                pack, excess, fm.distortion - 1.0, sm.distortion, bound, c.c2, st.delta, incl ? "hold" : "fail", s)};
}

Outcome bad_tree() {
    std::string detail;
    bool ok = true;
    for (int k : {1, 2}) {
        const std::size_t n = static_cast<std::size_t>(k) + 1;
        const PointMeasure mu = flat(n, static_cast<std::size_t>(k - 1), 1.0 / 16.0);
        const CoveringPair cov = CoveringPair::support_of(mu);
        const Constants c = make_constants(static_cast<int>(n), k);
        const double M = 0.25;
        std::vector<double> hk;
        double pack = 0.0, residual = 0.0;
        for (int depth = 1; depth <= 3; ++depth) {
            TreeParams tp;
            tp.k = k;
            tp.rho = c.rho0;
            tp.M = M;
            tp.max_depth = depth;
            tp.r_min = 0.0;
            const TreeRecord t = build_bad_tree(mu, Ball{Vec(n, 0.0), 1.0}, cov, tp, c);
            const TreeAudit a = audit_tree(t, mu, cov, c);
            for (const BoundCheck& b : a.checks) {
                if (b.name == "packing") {
                    pack = std::max(pack, b.measured / b.claimed_bound);
                    ok = ok && b.pass;
                }
                if (b.name == "residual") {
                    residual = std::max(residual, b.measured / (3.0 * M));
                    ok = ok && b.pass;
                }
            }
            // Cover of the final centers by balls of diameter 2 r_final.
            const GreedyCover g = hausdorff_measure_greedy(t.c_zero, k, 2.0 * t.r_final);
            hk.push_back(double(g.centers.size()) * omega(k) * std::pow(t.r_final, k));
        }
        ok = ok && hk[1] < hk[0] && hk[2] < hk[1] && hk[2] <= kBadTreeShrink * hk[0];
        detail += fmt("k=%d in R^%zu: packing/(2 c1 rho) %.3g, residual/3M %.3g, H^k %.3g -> %.3g -> %.3g; ", k, n,
                      pack, residual, hk[0], hk[1], hk[2]);
    }
    return {ok, detail};
}

Outcome chain_decay() {
    struct Case {
        double rho;
        int levels;
        std::size_t per_level;
    };
    const Constants c = make_constants(2, 1);
    std::string detail;
    bool ok = true;
    for (const Case& cs : {Case{1.0 / 32.0, 3, 256}, Case{1.0 / 64.0, 4, 200}}) {
        const PointMeasure mu = nested_segments(2, cs.rho, cs.levels, cs.per_level, 2.0);
        const CoveringPair cov = CoveringPair::support_of(mu);
        ChainParams cp;
        cp.k = 1;
        cp.M = 1.0;
        cp.rho = cs.rho;
        cp.enforce_rho = false;
        const DecompositionResult res = chain_trees(mu, cov, cp, c);
        const CoreReport rep = core_estimate_report(res, cov, c);
        double worst = 0.0;
        int pairs = 0;
        for (std::size_t t = 0; t + 2 < res.stages.size(); t += 2) {
            worst = std::max(worst, res.stages[t + 2].packing / res.stages[t].packing);
            ++pairs;
        }
        bool total = false;
        for (const BoundCheck& b : rep.checks)
            if (b.name == "leaf_packing_total") total = b.pass;
        ok = ok && pairs >= 2 && worst <= kChainDecay && total;
        detail += fmt("rho 1/%.0f: %zu stages, worst even-stage ratio %.3g over %d pairs, total %.3f; ", 1.0 / cs.rho,
                      res.stages.size(), worst, pairs, res.total_leaf_packing());
    }
    return {ok, detail};
}

Outcome sharpness() {
    const Constants c = make_constants(2, 1);
    std::vector<double> residuals;
    double worst_hd = 0.0, rf = 0.0;
    bool hd_ok = true;
    for (double lambda : {1.0, 1e3, 1e6}) {
        const PointMeasure mu = plane_plus_diracs(2, 1, std::vector<double>(8, lambda), 1.0 / 64.0);
        const CoveringPair cov = CoveringPair::support_of(mu);
        ChainParams cp;
        cp.k = 1;
        cp.M = 1.0;
        const DecompositionResult res = chain_trees(mu, cov, cp, c);
        const CoreReport rep = core_estimate_report(res, cov, c);
        residuals.push_back(rep.residual_rx);
        // Directed distance from C'_0 to L ∩ B_1 with L the first axis.
        double hd = 0.0;
        for (const Vec& z : res.c_zero) hd = std::max(hd, std::hypot(z[1], std::max(0.0, std::abs(z[0]) - 1.0)));
        worst_hd = std::max(worst_hd, hd);
        rf = res.r_final;
        hd_ok = hd_ok && !res.c_zero.empty() && hd <= 2.0 * res.r_final;
    }
    const auto [lo, hi] = std::minmax_element(residuals.begin(), residuals.end());
    const double spread = (*hi - *lo) / *hi;
    return {spread < kSharpSpread && hd_ok,
            fmt("residuals %.6f / %.6f / %.6f, spread %.2g (< %.2g); d_H(C'_0, L) %.2g <= 2 r_final = %.2g",
                residuals[0], residuals[1], residuals[2], spread, kSharpSpread, worst_hd, 2.0 * rf)};
}

Outcome packed_spheres_case() {
    const Constants c = make_constants(2, 1);
    const Ball unit{{0.0, 0.0}, 1.0};
    std::string detail;
    bool ok = true;
    for (double rho : {0.25, 0.125, 0.0625}) {
        const PointMeasure mu = packed_spheres(2, 1, rho, 32, 2.0);
        const double mass = mu.ball_mass(unit);
        std::vector<Vec> pts;
        for (std::size_t i = 0; i < mu.size(); ++i) pts.push_back(to_vec(mu.point(i)));
        const double vol = grid_minkowski(pts, rho, unit, rho / 4.0);
        ok = ok && mass <= c.c_sphere_pack && vol >= kMinkowskiFraction * omega(2);
        detail += fmt("rho %.4g: mass %.3f, |B_rho(spt)|/|B_1| %.3f; ", rho, mass, vol / omega(2));
    }
    return {ok, detail + fmt("bound %.3f", c.c_sphere_pack)};
}

Outcome discrete_reifenberg_case() {
    const Constants c = make_constants(2, 1);
    std::vector<double> sums;
    bool bounds = true;
    for (std::size_t count : {100, 1000, 10000}) {
        std::vector<Vec> centers;
        std::vector<double> radii, weights;
        const double r = 1.0 / double(count + 1);
        for (std::size_t j = 0; j < count; ++j) {
            centers.push_back({-1.0 + double(2 * j + 1) * r, 0.0});
            radii.push_back(r * (1.0 - 1e-9));
            weights.push_back(1.0);
        }
        DiscreteReifenbergParams p;
        p.k = 1;
        p.M = 1.0;
        p.a = 1.0;
        p.run_chain = false;
        const DiscreteReifenbergReport rep = discrete_reifenberg(centers, radii, weights, p, c);
        sums.push_back(rep.sum_rk);
        bounds = bounds && rep.all_pass();
    }
    const double drift = std::abs(sums.back() - sums.front()) / sums.back();
    return {drift < kReifenbergDrift && bounds,
            fmt("sum r^k = %.5f / %.5f / %.5f at 10^2 / 10^3 / 10^4 balls, drift %.3g (< %.2g), (L) checks %s",
                sums[0], sums[1], sums[2], drift, kReifenbergDrift, bounds ? "pass" : "fail")};
}

Outcome upper_ahlfors_case() {
    const Constants c = make_constants(2, 1);
    Rng rng(1111);
    std::vector<std::pair<Vec, double>> probes;
    double oracle = 0.0;
    for (int i = 0; i < 100; ++i) {
        const Vec x{rng.uniform(-0.9, 0.9), 0.0};
        const double r = std::ldexp(1.0, -1 - static_cast<int>(rng.index(3)));
        probes.emplace_back(x, r);
        oracle = std::max(oracle, flat_ball_measure(1, x, r, 1.0) / r);
    }
    std::vector<double> sup;
    for (double h : {std::ldexp(1.0, -8), std::ldexp(1.0, -10)}) {
        const PointMeasure mu = flat(2, 1, h);
        const CoveringPair cov = CoveringPair::support_of(mu);
        UpperAhlforsParams p;
        p.k = 1;
        p.M = 1.0;
        p.hypothesis_budget = 0;
        sup.push_back(upper_ahlfors_at(mu, cov, probes, p, c).C);
    }
    const double e0 = std::abs(sup[0] - oracle) / oracle, e1 = std::abs(sup[1] - oracle) / oracle;
    const double stab = std::abs(sup[0] - sup[1]) / sup[1];
    return {e0 <= kAhlforsRel && e1 <= kAhlforsRel && stab <= kAhlforsRel,
            fmt("sup mu(B_r)/r^k = %.4f (h 2^-8), %.4f (h 2^-10), oracle %.4f; errors %.3g, %.3g, level gap %.3g "
                "(tol %.2g)",
                sup[0], sup[1], oracle, e0, e1, stab, kAhlforsRel)};
}

Outcome rectifiable_halving() {
    const Constants c = make_constants(2, 1);
    const PointMeasure mu = graph_with_noise(1, GraphFunction::Abs, 1.0, 1.0 / 1024.0, 50, 0.02, 7);
    RectCoverParams p;
    p.k = 1;
    p.epsilon = 1e-6;
    p.max_iters = 8;
    p.a = 1.0;
    p.b = 8.0;
    const RectCover rc = rectifiable_cover(mu, p, c);
    const auto& tr = rc.residual_trace;
    int halvings = 0;
    double worst = 0.0;
    for (std::size_t i = 1; i < tr.size(); ++i) {
        const double ratio = tr[i - 1] > 0.0 ? tr[i] / tr[i - 1] : 0.0;
        worst = std::max(worst, ratio);
        if (ratio <= kHalving && worst <= kHalving) ++halvings;
    }
    std::string trace;
    for (double v : tr) trace += fmt("%.4g ", v);
    return {rc.gate_passed && halvings >= kHalvingIterations,
            fmt("gate %.3f, trace [ %s], %d consecutive halvings (need %d), stop: %s", rc.gate_fraction, trace.c_str(),
                halvings, kHalvingIterations, rc.message.c_str())};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"beta oracle equivalence", beta_oracle_equivalence},
        {"beta property suites", beta_properties},
        {"lattice Lebesgue profile", lattice_lebesgue},
        {"Koch dichotomy", koch_dichotomy},
        {"good tree on flat and sine samples", good_tree},
        {"bad tree on (k-1)-plane samples", bad_tree},
        {"chain leaf packing decay", chain_decay},
        {"plane plus Diracs sharpness", sharpness},
        {"packed spheres", packed_spheres_case},
        {"discrete Reifenberg drift", discrete_reifenberg_case},
        {"upper Ahlfors probes", upper_ahlfors_case},
        {"rectifiable cover halving", rectifiable_halving},
    };
    int failed = 0, documented = 0, passed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const bool doc = std::find(kDocumented.begin(), kDocumented.end(), id) != kDocumented.end();
        const char* tag = o.pass ? "PASS" : doc ? "FAIL [documented]" : "FAIL";
        std::printf("%s %2d %s: %s (%.1f s)\n", tag, id, criteria[i].first.c_str(), o.detail.c_str(), seconds_since(t0));
        std::fflush(stdout);
        if (o.pass)
            ++passed;
        else if (doc)
            ++documented;
        else
            ++failed;
    }
    std::printf("acceptance: %d pass, %d fail, %d documented failure\n", passed, failed, documented);
    return failed == 0 ? 0 : 1;
}
