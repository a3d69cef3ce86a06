#include "corona/beta.hpp"

#include <climits>

#include "corona/linalg.hpp"
#include "corona/parallel.hpp"

namespace corona {

PlaneFit best_plane_of(const PointMeasure& mu, const std::vector<std::size_t>& atoms, double radius, int k) {
    const std::size_t n = mu.dim();
    if (k < 0 || static_cast<std::size_t>(k) >= n)
        throw PreconditionError("best_plane: need 0 <= k < n");
    double mass = 0.0;
    Vec c(n, 0.0);
    for (std::size_t i : atoms) {
        mass += mu.weight(i);
        axpy(mu.weight(i), mu.point(i), c);
    }
    if (!(mass > 0.0)) throw ZeroMassError("best_plane: ball has zero mass");
    for (double& x : c) x /= mass;

    SymMatrix s(n);
    Vec d(n);
    for (std::size_t i : atoms) {
        const double w = mu.weight(i);
        if (w == 0.0) continue;
        const VecView p = mu.point(i);
        for (std::size_t a = 0; a < n; ++a) d[a] = p[a] - c[a];
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = a; b < n; ++b) s(a, b) += w * d[a] * d[b];
    }
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < a; ++b) s(a, b) = s(b, a);

    EigenDecomposition eig = jacobi_eigen(s);
    std::vector<Vec> frame(eig.vectors.begin(), eig.vectors.begin() + k);
    PlaneFit fit;
    fit.plane = AffinePlane::from_directions(c, frame);
    fit.mass = mass;

    double residual = 0.0;
    for (std::size_t i : atoms) {
        const double w = mu.weight(i);
        if (w == 0.0) continue;
        residual += w * norm_sq(fit.plane.normal_part(mu.point(i)));
    }
    fit.beta_sq = residual / std::pow(radius, k + 2);
    return fit;
}

PlaneFit best_plane(const PointMeasure& mu, const Ball& ball, int k) {
    return best_plane_of(mu, mu.ball_indices(ball), ball.radius, k);
}

double beta_truncated(const PointMeasure& mu, const Ball& ball, int k, double eps_bar) {
    if (eps_bar < 0.0) throw PreconditionError("beta_truncated: eps_bar must be nonnegative");
    const auto atoms = mu.ball_indices(ball);
    const double mass = mu.mass_of(atoms);
    if (mass <= eps_bar * std::pow(ball.radius, k)) return 0.0;
    if (!(mass > 0.0)) return 0.0;
    return best_plane_of(mu, atoms, ball.radius, k).beta_sq;
}

double dini_sum(const PointMeasure& mu, VecView x, int k, double eps_bar, int alpha_min, int alpha_max) {
    if (alpha_min > alpha_max) throw PreconditionError("dini_sum: alpha_min exceeds alpha_max");
    double s = 0.0;
    for (int a = alpha_min; a <= alpha_max; ++a) s += beta_truncated(mu, Ball{to_vec(x), std::ldexp(1.0, a)}, k, eps_bar);
    return s;
}

BetaProfile beta_profile(const PointMeasure& mu, VecView x, int k, double eps_bar, int alpha_min, int alpha_max) {
    if (alpha_min > alpha_max) throw PreconditionError("beta_profile: alpha_min exceeds alpha_max");
    BetaProfile prof;
    prof.center = to_vec(x);
    prof.k = k;
    prof.eps_bar = eps_bar;
    for (int a = alpha_max; a >= alpha_min; --a) {
        BetaEntry e;
        e.alpha = a;
        e.r = std::ldexp(1.0, a);
        const auto atoms = mu.ball_indices(Ball{prof.center, e.r});
        e.mass = mu.mass_of(atoms);
        if (e.mass > eps_bar * std::pow(e.r, k) && e.mass > 0.0) {
            PlaneFit f = best_plane_of(mu, atoms, e.r, k);
            e.beta_sq = f.beta_sq;
            e.plane = std::move(f.plane);
        }
        prof.entries.push_back(std::move(e));
    }
    return prof;
}

nlohmann::json to_json(const AffinePlane& p) {
    return {{"base", p.base()}, {"frame", p.frame()}};
}

nlohmann::json to_json(const BetaProfile& p) {
    nlohmann::json entries = nlohmann::json::array();
    for (const BetaEntry& e : p.entries) {
        nlohmann::json j = {{"alpha", e.alpha}, {"r", e.r}, {"beta_sq", e.beta_sq}, {"mass", e.mass}};
        j["plane"] = e.plane ? to_json(*e.plane) : nlohmann::json(nullptr);
        entries.push_back(std::move(j));
    }
    return {{"center", p.center}, {"k", p.k}, {"eps_bar", p.eps_bar}, {"entries", entries}};
}

int alpha_floor_for(const PointMeasure& mu) {
    const double s = min_positive_spacing(mu);
    if (!std::isfinite(s)) return -60;
    return static_cast<int>(std::floor(std::log2(s / 2.0)));
}

std::vector<double> atom_dini_sums(const PointMeasure& mu, const std::vector<double>& radii, int k,
                                   double eps_bar, int alpha_floor, int alpha_max, int jobs) {
    if (radii.size() != mu.size()) throw DimensionMismatch("atom_dini_sums: one radius per atom");
    std::vector<double> out(mu.size(), 0.0);
    parallel_for(mu.size(), jobs, [&](std::size_t i) {
        int lo = alpha_floor;
        if (radii[i] > 0.0) lo = std::max(lo, static_cast<int>(std::floor(std::log2(radii[i]))) + 1);
        double s = 0.0;
        const Vec x = to_vec(mu.point(i));
        for (int a = lo; a <= alpha_max; ++a) s += beta_truncated(mu, Ball{x, std::ldexp(1.0, a)}, k, eps_bar);
        out[i] = s;
    });
    return out;
}

}  // namespace corona
