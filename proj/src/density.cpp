#include "corona/density.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "corona/beta.hpp"
#include "corona/fixtures.hpp"
#include "corona/parallel.hpp"

namespace corona {

namespace {

double rel_slack(double x) { return x * (1.0 + 1e-12) + 1e-300; }

std::vector<double> window_radii(double s_lo, double s_hi) {
    std::vector<double> out;
    for (double s = s_lo; s <= s_hi * (1.0 + 1e-12); s *= 2.0) out.push_back(s);
    if (out.empty()) out.push_back(s_lo);
    return out;
}

}  // namespace

double DensityEstimate::gated_fraction(const PointMeasure& mu, double a, double b) const {
    double ok = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i)
        if (upper[i] >= a && lower[i] <= b) ok += mu.weight(i);
    const double total = mu.total_mass();
    return total > 0.0 ? ok / total : 0.0;
}

std::pair<double, double> default_density_window(const PointMeasure& mu) {
    const double h = min_positive_spacing(mu);
    if (!std::isfinite(h)) return {1.0 / 64.0, 1.0 / 16.0};
    return {2.0 * h, 8.0 * h};
}

DensityEstimate density_proxies(const PointMeasure& mu, int k, double s_lo, double s_hi, const CoveringPair* covering,
                                int jobs) {
    if (!(s_lo > 0.0) || s_hi < s_lo) throw PreconditionError("density window must satisfy 0 < s_lo <= s_hi");
    DensityEstimate d;
    d.k = k;
    d.s_lo = s_lo;
    d.s_hi = s_hi;
    d.lower.assign(mu.size(), 0.0);
    d.upper.assign(mu.size(), 0.0);
    const auto radii = window_radii(s_lo, s_hi);
    parallel_for(mu.size(), jobs, [&](std::size_t i) {
        const Vec x = to_vec(mu.point(i));
        const double rx = covering ? covering->radius_at(x) : 0.0;
        if (rx > 0.0) {
            const double s = rx / 50.0;
            d.lower[i] = d.upper[i] = mu.ball_mass(Ball{x, s}) / std::pow(s, k);
            return;
        }
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (double s : radii) {
            const double v = mu.ball_mass(Ball{x, s}) / std::pow(s, k);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        d.lower[i] = lo;
        d.upper[i] = hi;
    });
    return d;
}

std::vector<std::size_t> vitali_select(const std::vector<Vec>& centers, const std::vector<double>& radii) {
    if (centers.size() != radii.size()) throw DimensionMismatch("vitali_select: one radius per center");
    if (centers.empty()) return {};
    std::vector<std::size_t> order(centers.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return radii[a] > radii[b]; });
    const double rmax = radii[order.front()];
    PointSet kept(centers.front().size(), {}, std::max(rmax, 1e-12) * 2.0);
    std::vector<std::size_t> ids;
    std::vector<std::size_t> near;
    for (std::size_t i : order) {
        kept.query(centers[i], radii[i] + rmax, near);
        bool clear = true;
        for (std::size_t j : near)
            if (dist(centers[i], centers[ids[j]]) < radii[i] + radii[ids[j]]) {
                clear = false;
                break;
            }
        if (!clear) continue;
        kept.insert(centers[i]);
        ids.push_back(i);
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

DensityInequality density_to_inequality(const PointMeasure& mu, const DensityEstimate& est, double t) {
    DensityInequality out;
    out.t = t;
    const int k = est.k;
    const auto radii = window_radii(est.s_lo, est.s_hi);
    std::vector<Vec> centers;
    std::vector<double> scale;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        if (est.upper[i] < t) continue;
        const Vec x = to_vec(mu.point(i));
        for (auto it = radii.rbegin(); it != radii.rend(); ++it)
            if (mu.ball_mass(Ball{x, *it}) >= t * std::pow(*it, k)) {
                centers.push_back(x);
                scale.push_back(*it);
                break;
            }
    }
    double sum = 0.0;
    for (std::size_t j : vitali_select(centers, scale)) {
        sum += std::pow(scale[j], k);
        ++out.balls;
    }
    out.hk_estimate = omega(k) * std::pow(5.0, k) * sum;
    out.lhs = t * sum;
    out.mass = mu.total_mass();
    out.holds = out.lhs <= rel_slack(out.mass);
    return out;
}

UniformCovering uniform_covering(const CoveringPair& c) {
    const std::size_t n = c.dim();
    for (std::size_t i = 0; i < c.size(); ++i)
        if (c.radius(i) > 1.0) throw PreconditionError("uniform_covering: radii must not exceed 1");

    std::vector<int> band(c.size(), -1);
    int top = -1;
    for (std::size_t y : c.plus()) {
        int a = static_cast<int>(std::floor(std::log2(1.0 / c.radius(y))));
        while (c.radius(y) <= std::ldexp(1.0, -a - 1)) ++a;
        while (a > 0 && c.radius(y) > std::ldexp(1.0, -a)) --a;
        band[y] = a;
        top = std::max(top, a);
    }
    std::vector<std::vector<std::size_t>> by_band(top + 1);
    for (std::size_t y : c.plus()) by_band[band[y]].push_back(y);

    UniformCovering out;
    std::vector<char> keep(c.size(), 0);
    PointSet earlier(n, {}, 2.0 * std::max(c.max_radius(), 1e-12));
    std::vector<std::size_t> earlier_ids;
    double earlier_max = 0.0;
    std::vector<std::size_t> near;
    for (int a = 0; a <= top; ++a) {
        for (std::size_t y : by_band[a]) {
            bool covered = false;
            if (earlier.size()) {
                earlier.query(c.center(y), earlier_max, near);
                for (std::size_t j : near)
                    if (dist(c.center(y), c.center(earlier_ids[j])) < c.radius(earlier_ids[j])) {
                        covered = true;
                        break;
                    }
            }
            if (!covered) keep[y] = 1;
        }
        for (std::size_t y : by_band[a]) {
            earlier.insert(c.center(y));
            earlier_ids.push_back(y);
            earlier_max = std::max(earlier_max, c.radius(y));
        }
    }
    double plus_max = 0.0;
    for (std::size_t y : c.plus()) plus_max = std::max(plus_max, c.radius(y));
    for (std::size_t y = 0; y < c.size(); ++y) {
        if (c.radius(y) > 0.0) continue;
        bool inside = false;
        if (!c.plus().empty()) {
            c.plus_centers().query(c.center(y), plus_max, near);
            for (std::size_t j : near)
                if (dist(c.center(y), c.center(c.plus()[j])) < c.radius(c.plus()[j])) {
                    inside = true;
                    break;
                }
        }
        if (!inside) keep[y] = 1;
    }

    std::vector<double> coords, radii;
    for (std::size_t y = 0; y < c.size(); ++y) {
        if (!keep[y]) continue;
        out.kept.push_back(y);
        out.band.push_back(band[y]);
        const VecView p = c.center(y);
        coords.insert(coords.end(), p.begin(), p.end());
        radii.push_back(c.radius(y));
    }
    out.cover = CoveringPair(n, coords, radii, c.max_radius());

    // (A): no y with r_y > 2 r_x and |x - y| < r_y / 2.
    for (std::size_t u = 0; u < out.kept.size(); ++u) {
        const std::size_t x = out.kept[u];
        if (c.plus().empty()) break;
        c.plus_centers().query(c.center(x), plus_max / 2.0, near);
        for (std::size_t j : near) {
            const std::size_t y = c.plus()[j];
            if (c.radius(y) > 2.0 * c.radius(x) && dist(c.center(x), c.center(y)) < c.radius(y) / 2.0) {
                ++out.violations_a;
                break;
            }
        }
    }
    // (B): every B_{r_y}(y) sits in one B_{5 r_x}(x), and every C_0 point is kept or in one.
    const auto& uplus = out.cover.plus();
    double umax = 0.0;
    for (std::size_t u : uplus) umax = std::max(umax, out.cover.radius(u));
    for (std::size_t y = 0; y < c.size(); ++y) {
        if (c.radius(y) == 0.0 && keep[y]) continue;
        bool ok = false;
        if (!uplus.empty()) {
            out.cover.plus_centers().query(c.center(y), 5.0 * umax, near);
            for (std::size_t j : near) {
                const std::size_t u = uplus[j];
                const double d = dist(c.center(y), out.cover.center(u));
                if (c.radius(y) > 0.0 ? d + c.radius(y) <= rel_slack(5.0 * out.cover.radius(u))
                                      : d < 5.0 * out.cover.radius(u)) {
                    ok = true;
                    break;
                }
            }
        }
        if (!ok) ++out.violations_b;
    }
    return out;
}

double DisjointPacking::total() const {
    double s = 0.0;
    for (std::size_t i = 0; i < radii.size(); ++i) s += weight(i);
    return s;
}

double DisjointPacking::mass(const Ball& b) const {
    double s = 0.0;
    for (std::size_t i = 0; i < centers.size(); ++i)
        if (in_ball(centers[i], b)) s += weight(i);
    return s;
}

PointMeasure DisjointPacking::as_measure() const {
    if (centers.empty()) throw PreconditionError("disjoint packing is empty");
    MeasureBuilder b(centers.front().size());
    for (std::size_t i = 0; i < centers.size(); ++i) b.add(centers[i], weight(i));
    return std::move(b).build();
}

DisjointPacking intermediary_packing(const PointMeasure& mu, const CoveringPair& covering,
                                     const std::vector<std::size_t>& subset, int k, double a) {
    if (!(a > 0.0)) throw PreconditionError("intermediary_packing: a must be positive");
    const UniformCovering u = uniform_covering(covering);
    const std::set<std::size_t> in_u(u.kept.begin(), u.kept.end());
    for (std::size_t y : subset) {
        if (y >= covering.size()) throw PreconditionError("intermediary_packing: index outside the covering");
        if (!(covering.radius(y) > 0.0)) throw PreconditionError("intermediary_packing: subset must lie in C_+");
        if (!in_u.count(y)) throw PreconditionError("intermediary_packing: subset must lie in U(C)");
        const double r = covering.radius(y);
        if (mu.ball_mass(Ball{to_vec(covering.center(y)), r}) < a * std::pow(r, k) * (1.0 - 1e-12))
            throw PreconditionError("intermediary_packing: mu(B_r(x)) < a r^k");
    }
    for (std::size_t i = 0; i < subset.size(); ++i)
        for (std::size_t j = i + 1; j < subset.size(); ++j) {
            const double d = dist(covering.center(subset[i]), covering.center(subset[j]));
            if (d < 2.0 * (covering.radius(subset[i]) + covering.radius(subset[j])))
                throw PreconditionError("intermediary_packing: doubled balls overlap");
        }
    DisjointPacking p;
    p.k = k;
    for (std::size_t y : subset) {
        p.centers.push_back(center_of_mass(mu, Ball{to_vec(covering.center(y)), covering.radius(y)}));
        p.radii.push_back(covering.radius(y));
        p.sources.push_back(y);
    }
    p.disjoint = true;
    for (std::size_t i = 0; i < p.centers.size() && p.disjoint; ++i)
        for (std::size_t j = i + 1; j < p.centers.size(); ++j)
            if (dist(p.centers[i], p.centers[j]) < p.radii[i] + p.radii[j]) {
                p.disjoint = false;
                break;
            }
    return p;
}

bool IntermediaryReport::all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const BoundCheck& c) { return c.pass; });
}

IntermediaryReport intermediary_checks(const PointMeasure& mu, const CoveringPair& covering,
                                       const std::vector<std::size_t>& subset, const DisjointPacking& nu, double a) {
    IntermediaryReport rep;
    const int k = nu.k;
    if (nu.centers.empty()) return rep;
    const PointMeasure nu_mu = nu.as_measure();
    for (std::size_t i = 0; i < subset.size(); ++i) {
        const Vec x = to_vec(covering.center(subset[i]));
        for (double r = nu.radii[i]; r <= 2.0; r *= 2.0) {
            double lhs = 0.0;
            for (std::size_t j = 0; j < subset.size(); ++j)
                if (dist(x, covering.center(subset[j])) < r) lhs += nu.weight(j);
            const double rhs = nu.mass(Ball{x, 2.0 * r});
            rep.worst_domination = std::max(rep.worst_domination, rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? INFINITY : 0.0));
            ++rep.samples;
        }
    }
    const double cbeta = std::pow(4.0, k + 2);
    for (std::size_t i = 0; i < nu.centers.size(); ++i) {
        const Vec& X = nu.centers[i];
        for (double r = nu.radii[i]; r <= 2.0; r *= 2.0) {
            const double m4 = mu.ball_mass(Ball{X, 4.0 * r});
            rep.worst_mass = std::max(rep.worst_mass, a * nu.mass(Ball{X, r}) / m4);
            const double bn = best_plane(nu_mu, Ball{X, r}, k).beta_sq;
            const double bm = best_plane(mu, Ball{X, 4.0 * r}, k).beta_sq;
            const double ratio = bm > 0.0 ? a * bn / (cbeta * bm) : (bn > 1e-14 ? INFINITY : 0.0);
            rep.worst_beta = std::max(rep.worst_beta, ratio);
            ++rep.samples;
        }
    }
    rep.checks.push_back(check_le("nu_dominates_doubled", rep.worst_domination, 1.0));
    rep.checks.push_back(check_le("nu_mass_vs_mu_4r", rep.worst_mass, 1.0));
    rep.checks.push_back(check_le("beta_nu_vs_beta_mu_4r", rep.worst_beta, 1.0));
    rep.checks.push_back(check_le("nu_balls_disjoint", nu.disjoint ? 0.0 : 1.0, 0.0));
    return rep;
}

bool DiscreteReifenbergReport::all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const BoundCheck& c) { return c.pass; });
}

DiscreteReifenbergReport discrete_reifenberg(const std::vector<Vec>& centers, const std::vector<double>& radii,
                                             const std::vector<double>& weights, const DiscreteReifenbergParams& p,
                                             const Constants& consts) {
    if (centers.empty()) throw PreconditionError("discrete_reifenberg: no balls");
    if (radii.size() != centers.size() || weights.size() != centers.size())
        throw DimensionMismatch("discrete_reifenberg: centers, radii and weights must align");
    const std::size_t n = centers.front().size();
    double rmax = 0.0;
    for (std::size_t i = 0; i < centers.size(); ++i) {
        require_dim(centers[i].size(), n, "discrete_reifenberg center");
        if (!(radii[i] > 0.0)) throw PreconditionError("discrete_reifenberg: radii must be positive");
        if (norm(centers[i]) + radii[i] > 1.0 + tolerances().geometric)
            throw PreconditionError("discrete_reifenberg: ball outside B_1");
        rmax = std::max(rmax, radii[i]);
    }
    {
        PointSet ps(n, {}, 2.0 * rmax);
        std::vector<std::size_t> near;
        for (std::size_t i = 0; i < centers.size(); ++i) {
            ps.query(centers[i], radii[i] + rmax, near);
            for (std::size_t j : near)
                if (dist(centers[i], centers[j]) < radii[i] + radii[j] - tolerances().geometric * radii[i])
                    throw PreconditionError("discrete_reifenberg: overlap detected between balls " + std::to_string(j) +
                                            " and " + std::to_string(i));
            ps.insert(centers[i]);
        }
    }
    DiscreteReifenbergReport rep;
    rep.balls = centers.size();
    MeasureBuilder mb(n);
    std::vector<double> coords;
    for (std::size_t i = 0; i < centers.size(); ++i) {
        mb.add(centers[i], weights[i] * std::pow(radii[i], p.k));
        coords.insert(coords.end(), centers[i].begin(), centers[i].end());
        rep.sum_rk += std::pow(radii[i], p.k);
    }
    const PointMeasure mu = std::move(mb).build();
    const CoveringPair cov(n, coords, radii, 1.0);
    rep.total_mass = mu.total_mass();

    std::vector<double> sums(centers.size(), 0.0);
    parallel_for(centers.size(), p.jobs, [&](std::size_t i) {
        const int lo = static_cast<int>(std::floor(std::log2(radii[i]))) + 1;
        if (lo <= 1) sums[i] = dini_sum(mu, centers[i], p.k, p.eps_bar, lo, 1);
    });
    for (std::size_t i = 0; i < centers.size(); ++i) {
        rep.max_dini = std::max(rep.max_dini, sums[i]);
        if (sums[i] > p.M) {
            ++rep.hypothesis_violations;
            rep.hypothesis_mass += mu.weight(i);
        }
    }
    const double c = consts.c_reifenberg;
    const double gamma = rep.hypothesis_mass;
    const double wmin = *std::min_element(weights.begin(), weights.end());
    const double wmax = *std::max_element(weights.begin(), weights.end());
    rep.lower_applies = p.a > 0.0 && wmin >= p.a;
    rep.upper_applies = std::isfinite(p.b) && wmax <= p.b;
    if (rep.lower_applies) {
        rep.bound_lower = c * (p.eps_bar + p.M + gamma) / p.a + c;
        rep.checks.push_back(check_le("lower_packing", rep.sum_rk, rep.bound_lower));
    }
    if (rep.upper_applies) {
        rep.bound_upper = c * (p.b + p.eps_bar + p.M) + gamma;
        rep.checks.push_back(check_le("upper_mass", rep.total_mass, rep.bound_upper));
    }
    if (p.run_chain) {
        ChainParams cp;
        cp.k = p.k;
        cp.M = p.M;
        cp.eps_bar = p.eps_bar;
        cp.jobs = p.jobs;
        const DecompositionResult res = chain_trees(mu, cov, cp, consts);
        for (std::size_t y : res.c_plus) rep.chain_plus_packing += std::pow(cov.radius(y), p.k);
        rep.chain_leaf_packing = res.total_leaf_packing();
        rep.chain_trees = res.trees.size();
        if (rep.lower_applies) rep.checks.push_back(check_le("chain_plus_packing", rep.chain_plus_packing, rep.bound_lower));
    }
    return rep;
}

bool UpperAhlforsReport::all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const BoundCheck& c) { return c.pass; });
}

UpperAhlforsReport upper_ahlfors_at(const PointMeasure& mu, const CoveringPair& covering,
                                    const std::vector<std::pair<Vec, double>>& probes, const UpperAhlforsParams& p,
                                    const Constants& consts) {
    UpperAhlforsReport rep;
    const int k = p.k;
    rep.samples.resize(probes.size());
    parallel_for(probes.size(), p.jobs, [&](std::size_t j) {
        AhlforsSample& s = rep.samples[j];
        s.x = probes[j].first;
        s.r = probes[j].second;
        s.mass = mu.ball_mass(Ball{s.x, s.r});
        s.ratio = s.mass / std::pow(s.r, k);
    });
    for (const AhlforsSample& s : rep.samples) rep.C = std::max(rep.C, s.ratio);

    if (p.hypothesis_budget > 0 && !probes.empty() && !mu.empty()) {
        double rtop = 0.0;
        for (const auto& pr : probes) rtop = std::max(rtop, pr.second);
        const int amax = static_cast<int>(std::floor(std::log2(2.0 * rtop)));
        const int afloor = alpha_floor_for(mu);
        const std::size_t stride = std::max<std::size_t>(1, (mu.size() + p.hypothesis_budget - 1) / p.hypothesis_budget);
        rep.hypothesis_sampled = stride > 1;
        std::vector<std::size_t> picks;
        for (std::size_t i = 0; i < mu.size(); i += stride) picks.push_back(i);
        // profile[j][a - afloor] = beta^2(z_j, 2^a) for 2^a above r_z.
        std::vector<std::vector<double>> profile(picks.size(), std::vector<double>(std::max(0, amax - afloor + 1), 0.0));
        parallel_for(picks.size(), p.jobs, [&](std::size_t j) {
            const VecView z = mu.point(picks[j]);
            const double rz = covering.radius_at(z);
            int lo = afloor;
            if (rz > 0.0) lo = std::max(lo, static_cast<int>(std::floor(std::log2(rz))) + 1);
            for (int a = lo; a <= amax; ++a)
                profile[j][a - afloor] = beta_truncated(mu, Ball{to_vec(z), std::ldexp(1.0, a)}, k, p.eps_bar);
        });
        for (AhlforsSample& s : rep.samples) {
            const int atop = static_cast<int>(std::floor(std::log2(2.0 * s.r)));
            for (std::size_t j = 0; j < picks.size(); ++j) {
                if (!in_ball(mu.point(picks[j]), Ball{s.x, s.r})) continue;
                double sum = 0.0;
                for (int a = afloor; a <= std::min(atop, amax); ++a) sum += profile[j][a - afloor];
                if (sum > p.M) s.hypothesis_mass += mu.weight(picks[j]) * double(stride);
            }
            rep.hypothesis_worst = std::max(rep.hypothesis_worst, s.hypothesis_mass / (p.M * std::pow(s.r, k)));
        }
    }
    if (std::isfinite(p.b)) rep.checks.push_back(check_le("upper_ahlfors", rep.C, consts.c_ahlfors * (p.eps_bar + p.b + p.M)));
    return rep;
}

UpperAhlforsReport upper_ahlfors_check(const PointMeasure& mu, const CoveringPair& covering,
                                       const UpperAhlforsParams& p, const Constants& consts) {
    if (covering.size() == 0) throw PreconditionError("upper_ahlfors_check: empty covering");
    if (p.j_min > p.j_max) throw PreconditionError("upper_ahlfors_check: need j_min <= j_max");
    Rng rng(p.seed);
    std::vector<std::pair<Vec, double>> probes;
    for (std::size_t s = 0; s < p.sample_count; ++s) {
        const std::size_t i = rng.index(covering.size());
        const int j = p.j_min + static_cast<int>(rng.index(static_cast<std::size_t>(p.j_max - p.j_min + 1)));
        double r = std::ldexp(1.0, -j);
        while (r < covering.radius(i)) r *= 2.0;
        probes.emplace_back(to_vec(covering.center(i)), r);
    }
    return upper_ahlfors_at(mu, covering, probes, p, consts);
}

const char* to_string(MassPart p) {
    switch (p) {
        case MassPart::High: return "h";
        case MassPart::Low: return "l";
        case MassPart::Zero: return "0";
    }
    return "?";
}

bool ThreeWay::all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const BoundCheck& c) { return c.pass; });
}

ThreeWay decompose_three_way(const PointMeasure& mu, const ThreeWayParams& p, const Constants& consts) {
    if (!(p.epsilon > 0.0)) throw PreconditionError("decompose_three_way: epsilon must be positive");
    ThreeWay out;
    auto [lo, hi] = default_density_window(mu);
    if (p.s_lo > 0.0) lo = p.s_lo;
    if (p.s_hi > 0.0) hi = p.s_hi;
    out.density = density_proxies(mu, p.k, lo, hi, nullptr, p.jobs);
    ChainParams cp = p.chain;
    cp.k = p.k;
    cp.M = p.M;
    cp.jobs = p.jobs;
    const CoveringPair cov = CoveringPair::support_of(mu);
    out.chain = chain_trees(mu, cov, cp, consts);
    const double high = p.high > 0.0 ? p.high : 1.0 / p.epsilon;

    PointSet q(mu.dim(), {}, std::max(out.chain.r_final, 1e-12));
    for (const Vec& c : out.chain.c_zero) q.insert(c);
    out.k_h = out.chain.c_zero;
    out.label.assign(mu.size(), MassPart::Zero);
    for (std::size_t i = 0; i < mu.size(); ++i) {
        MassPart part;
        if (q.size() && q.any_within(mu.point(i), out.chain.r_final)) {
            part = MassPart::High;
        } else if (out.density.lower[i] >= high) {
            part = MassPart::High;
            out.k_h.push_back(to_vec(mu.point(i)));
        } else if (out.density.upper[i] >= p.epsilon) {
            part = MassPart::Low;
        } else {
            part = MassPart::Zero;
        }
        out.label[i] = part;
        (part == MassPart::High ? out.mass_h : part == MassPart::Low ? out.mass_l : out.mass_0) += mu.weight(i);
    }
    const double bound = consts.c_three_way * (p.epsilon + p.M);
    out.checks.push_back(check_le("mass_l", out.mass_l, bound));
    out.checks.push_back(check_le("mass_0", out.mass_0, bound));
    return out;
}

namespace {

double segment_distance(VecView x, VecView a, VecView b) {
    const Vec ab = sub(b, a);
    const double l2 = norm_sq(ab);
    double t = l2 > 0.0 ? dot(sub(x, a), ab) / l2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    Vec p = to_vec(a);
    axpy(t, ab, p);
    return dist(x, p);
}

double triangle_distance(VecView x, VecView a, VecView b, VecView c) {
    const Vec u = sub(b, a), v = sub(c, a), w = sub(x, a);
    const double uu = dot(u, u), uv = dot(u, v), vv = dot(v, v);
    const double det = uu * vv - uv * uv;
    if (det > 1e-300) {
        const double wu = dot(w, u), wv = dot(w, v);
        const double s = (vv * wu - uv * wv) / det;
        const double t = (uu * wv - uv * wu) / det;
        if (s >= 0.0 && t >= 0.0 && s + t <= 1.0) {
            Vec p = to_vec(a);
            axpy(s, u, p);
            axpy(t, v, p);
            return dist(x, p);
        }
    }
    return std::min({segment_distance(x, a, b), segment_distance(x, b, c), segment_distance(x, c, a)});
}

// Vertex index plus incidence lists for nearby-primitive lookup.
class MeshLocator {
public:
    MeshLocator(const Mesh& mesh, const std::vector<Vec>& pos) : mesh_(mesh), pos_(pos) {
        incident_.resize(pos.size());
        if (mesh.k >= 2 && !mesh.triangles.empty()) {
            for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
                const auto& tri = mesh.triangles[t];
                for (std::size_t v : tri) incident_[v].push_back(t);
                reach_ = std::max({reach_, dist(pos[tri[0]], pos[tri[1]]), dist(pos[tri[1]], pos[tri[2]]),
                                   dist(pos[tri[2]], pos[tri[0]])});
            }
        } else {
            for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
                const auto& ed = mesh.edges[e];
                incident_[ed[0]].push_back(e);
                incident_[ed[1]].push_back(e);
                reach_ = std::max(reach_, dist(pos[ed[0]], pos[ed[1]]));
            }
        }
        std::vector<double> coords;
        for (const Vec& p : pos) coords.insert(coords.end(), p.begin(), p.end());
        index_ = PointSet(mesh.n, coords, std::max(reach_, 1e-12));
    }

    bool within(VecView x, double tol) const {
        std::vector<std::size_t> near;
        index_.query(x, tol + reach_, near);
        const bool tri = mesh_.k >= 2 && !mesh_.triangles.empty();
        for (std::size_t v : near)
            for (std::size_t id : incident_[v]) {
                double d;
                if (tri) {
                    const auto& t = mesh_.triangles[id];
                    d = triangle_distance(x, pos_[t[0]], pos_[t[1]], pos_[t[2]]);
                } else {
                    const auto& e = mesh_.edges[id];
                    d = segment_distance(x, pos_[e[0]], pos_[e[1]]);
                }
                if (d <= tol) return true;
            }
        return !near.empty() && mesh_.edges.empty() && mesh_.triangles.empty() && index_.any_within(x, tol);
    }

private:
    const Mesh& mesh_;
    const std::vector<Vec>& pos_;
    std::vector<std::vector<std::size_t>> incident_;
    double reach_ = 0.0;
    PointSet index_;
};

}  // namespace

double distance_to_mesh(VecView x, const Mesh& mesh, const std::vector<Vec>& pos) {
    double best = std::numeric_limits<double>::infinity();
    if (mesh.k >= 2 && !mesh.triangles.empty()) {
        for (const auto& t : mesh.triangles) best = std::min(best, triangle_distance(x, pos[t[0]], pos[t[1]], pos[t[2]]));
    } else if (!mesh.edges.empty()) {
        for (const auto& e : mesh.edges) best = std::min(best, segment_distance(x, pos[e[0]], pos[e[1]]));
    } else {
        for (const Vec& p : pos) best = std::min(best, dist(x, p));
    }
    return best;
}

bool RectCover::halving_holds() const {
    for (std::size_t i = 1; i < residual_trace.size(); ++i)
        if (residual_trace[i] > 0.5 * residual_trace[i - 1] * (1.0 + 1e-12)) return false;
    return residual_trace.size() > 1;
}

RectCover rectifiable_cover(const PointMeasure& mu, const RectCoverParams& p, const Constants& consts) {
    RectCover out;
    const int k = p.k;
    const std::size_t n = mu.dim();
    out.covered_at.assign(mu.size(), -1);
    if (mu.empty()) {
        out.message = "empty measure";
        out.residual_trace.push_back(0.0);
        return out;
    }
    auto [lo, hi] = default_density_window(mu);
    if (p.s_lo > 0.0) lo = p.s_lo;
    if (p.s_hi > 0.0) hi = p.s_hi;
    const DensityEstimate est = density_proxies(mu, k, lo, hi, nullptr, p.jobs);
    out.gate_fraction = est.gated_fraction(mu, p.a, p.b);
    if (out.gate_fraction < p.gate_fraction) {
        out.message = "density gate failed: only a fraction " + format_number(out.gate_fraction) +
                      " of the mass has upper proxy >= a and lower proxy <= b; no cover claimed";
        out.residual_trace.push_back(mu.total_mass());
        return out;
    }
    out.gate_passed = true;
    double total = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        if (est.upper[i] >= p.a && est.lower[i] <= p.b) {
            total += mu.weight(i);
        } else {
            out.covered_at[i] = -2;
            out.excluded_mass += mu.weight(i);
        }
    }
    out.residual_trace.push_back(total);
    const double h = min_positive_spacing(mu);
    const double s_min = p.s_min > 0.0 ? p.s_min : (std::isfinite(h) ? 16.0 * h : p.s_max / 64.0);
    const double chi = p.chi > 0.0 ? p.chi : omega(k) * p.a / (8.0 * std::pow(10.0, k));
    std::vector<double> levels;
    for (double s = p.s_max; s >= s_min * (1.0 - 1e-12); s /= 2.0) levels.push_back(s);
    if (levels.empty()) throw PreconditionError("rectifiable_cover: s_max below s_min");

    for (int it = 1; it <= p.max_iters; ++it) {
        std::vector<std::size_t> un;
        for (std::size_t i = 0; i < mu.size(); ++i)
            if (out.covered_at[i] == -1) un.push_back(i);
        const double residual = mu.mass_of(un);
        if (residual <= p.epsilon * total) {
            out.message = "residual target reached";
            break;
        }
        const PointMeasure sub_mu = mu.restrict(un);
        const CoveringPair cov = CoveringPair::support_of(sub_mu);
        const int afloor = alpha_floor_for(sub_mu);
        const int amax = static_cast<int>(std::floor(std::log2(2.0 * p.s_max)));
        const std::size_t A = static_cast<std::size_t>(std::max(0, amax - afloor + 1));

        // Dyadic sums up to 2s for every level, per atom.
        std::vector<std::vector<double>> dini(sub_mu.size(), std::vector<double>(levels.size(), 0.0));
        parallel_for(sub_mu.size(), p.jobs, [&](std::size_t z) {
            const Vec x = to_vec(sub_mu.point(z));
            std::vector<double> prof(A, 0.0);
            for (std::size_t a = 0; a < A; ++a)
                prof[a] = beta_truncated(sub_mu, Ball{x, std::ldexp(1.0, afloor + static_cast<int>(a))}, k, 0.0);
            for (std::size_t l = 0; l < levels.size(); ++l) {
                const int top = static_cast<int>(std::floor(std::log2(2.0 * levels[l] * (1.0 + 1e-12))));
                double s = 0.0;
                for (int a = afloor; a <= std::min(top, amax); ++a) s += prof[a - afloor];
                dini[z][l] = s;
            }
        });

        ClassifyParams cls{k, p.tree_rho, m0_of(static_cast<int>(n), k, p.tree_rho) * p.tree_M, p.tree_M};
        std::vector<double> pick(sub_mu.size(), 0.0);
        parallel_for(sub_mu.size(), p.jobs, [&](std::size_t z) {
            const Vec x = to_vec(sub_mu.point(z));
            for (std::size_t l = 0; l < levels.size(); ++l) {
                const double s = levels[l];
                if (sub_mu.ball_mass(Ball{x, s / 5.0}) < omega(k) * p.a / 2.0 * std::pow(s / 5.0, k)) continue;
                double bad = 0.0;
                for (std::size_t w : sub_mu.ball_indices(Ball{x, s}))
                    if (dini[w][l] > p.tau) bad += sub_mu.weight(w);
                if (bad > chi * std::pow(s, k)) continue;
                if (classify_ball(sub_mu, Ball{x, s}, cov, cls).kind != BallKind::Good) continue;
                pick[z] = s;
                break;
            }
        });
        std::vector<Vec> centers;
        std::vector<double> fifth;
        std::vector<std::size_t> owner;
        for (std::size_t z = 0; z < sub_mu.size(); ++z)
            if (pick[z] > 0.0) {
                centers.push_back(to_vec(sub_mu.point(z)));
                fifth.push_back(pick[z] / 5.0);
                owner.push_back(z);
            }
        if (centers.empty()) {
            out.message = "no qualifying balls at iteration " + std::to_string(it);
            break;
        }
        const auto chosen = vitali_select(centers, fifth);

        std::vector<CoverPiece> pieces(chosen.size());
        std::vector<char> built(chosen.size(), 0);
        parallel_for(chosen.size(), p.jobs, [&](std::size_t c) {
            const std::size_t j = chosen[c];
            CoverPiece& piece = pieces[c];
            piece.iteration = it;
            piece.ball = Ball{centers[j], 5.0 * fifth[j]};
            TreeParams tp;
            tp.k = k;
            tp.rho = p.tree_rho;
            tp.M = p.tree_M;
            tp.enforce_delta = false;
            tp.delta_sample_budget = 256;
            try {
                const PointMeasure local = sub_mu.restrict(sub_mu.ball_indices(piece.ball));
                const TreeRecord tree =
                    build_good_tree(local, piece.ball, CoveringPair::support_of(local), tp, consts);
                double last_good = tree.root.radius;
                for (const TreeScale& sc : tree.scales)
                    if (!sc.good.empty()) last_good = sc.radius;
                piece.tol = 2.0 * last_good;
                ManifoldResult m = manifold_limit(tree, consts, p.vertex_budget, 1);
                piece.mesh = std::move(m.t0);
                piece.positions = m.final_vertices();
                built[c] = 1;
            } catch (const Error&) {
                built[c] = 0;
            }
        });
        std::size_t newly = 0;
        for (std::size_t c = 0; c < pieces.size(); ++c) {
            if (!built[c]) continue;
            CoverPiece& piece = pieces[c];
            const MeshLocator loc(piece.mesh, piece.positions);
            for (std::size_t z : sub_mu.ball_indices(piece.ball)) {
                const std::size_t g = un[z];
                if (out.covered_at[g] != -1) continue;
                if (!loc.within(sub_mu.point(z), piece.tol)) continue;
                out.covered_at[g] = it;
                ++piece.covered_atoms;
                piece.covered_mass += mu.weight(g);
                ++newly;
            }
            out.pieces.push_back(std::move(piece));
        }
        double left = 0.0;
        for (std::size_t i = 0; i < mu.size(); ++i)
            if (out.covered_at[i] == -1) left += mu.weight(i);
        out.residual_trace.push_back(left);
        if (newly == 0) {
            out.message = "no atom covered at iteration " + std::to_string(it);
            break;
        }
    }
    if (out.message.empty()) out.message = "iteration cap reached";
    return out;
}

nlohmann::json to_json(const DensityEstimate& d) {
    return {{"kind", "density_estimate"}, {"k", d.k}, {"s_lo", d.s_lo}, {"s_hi", d.s_hi}, {"lower", d.lower}, {"upper", d.upper}};
}

nlohmann::json to_json(const UniformCovering& u) {
    return {{"kind", "uniform_covering"},
            {"kept", u.kept},
            {"band", u.band},
            {"violations_a", u.violations_a},
            {"violations_b", u.violations_b},
            {"holds", u.holds()}};
}

nlohmann::json to_json(const DisjointPacking& p) {
    nlohmann::json balls = nlohmann::json::array();
    for (std::size_t i = 0; i < p.centers.size(); ++i)
        balls.push_back({{"center", p.centers[i]}, {"radius", p.radii[i]}, {"source", p.sources[i]}, {"weight", p.weight(i)}});
    return {{"kind", "disjoint_packing"}, {"k", p.k}, {"disjoint", p.disjoint}, {"total", p.total()}, {"balls", balls}};
}

namespace {

nlohmann::json checks_json(const std::vector<BoundCheck>& cs) {
    nlohmann::json a = nlohmann::json::array();
    for (const BoundCheck& c : cs) a.push_back(to_json(c));
    return a;
}

}  // namespace

nlohmann::json to_json(const IntermediaryReport& r) {
    return {{"kind", "intermediary_packing"},
            {"samples", r.samples},
            {"worst_domination", r.worst_domination},
            {"worst_mass", r.worst_mass},
            {"worst_beta", r.worst_beta},
            {"checks", checks_json(r.checks)},
            {"all_pass", r.all_pass()}};
}

nlohmann::json to_json(const DiscreteReifenbergReport& r) {
    return {{"kind", "discrete_reifenberg"},
            {"balls", r.balls},
            {"sum_rk", r.sum_rk},
            {"total_mass", r.total_mass},
            {"hypothesis_mass", r.hypothesis_mass},
            {"hypothesis_violations", r.hypothesis_violations},
            {"max_dini", r.max_dini},
            {"lower_applies", r.lower_applies},
            {"upper_applies", r.upper_applies},
            {"bound_lower", r.bound_lower},
            {"bound_upper", r.bound_upper},
            {"chain_plus_packing", r.chain_plus_packing},
            {"chain_leaf_packing", r.chain_leaf_packing},
            {"chain_trees", r.chain_trees},
            {"checks", checks_json(r.checks)},
            {"all_pass", r.all_pass()}};
}

nlohmann::json to_json(const UpperAhlforsReport& r) {
    nlohmann::json s = nlohmann::json::array();
    for (const AhlforsSample& a : r.samples)
        s.push_back({{"x", a.x}, {"r", a.r}, {"mass", a.mass}, {"ratio", a.ratio}, {"hypothesis_mass", a.hypothesis_mass}});
    return {{"kind", "upper_ahlfors"},
            {"C", r.C},
            {"hypothesis_worst", r.hypothesis_worst},
            {"hypothesis_sampled", r.hypothesis_sampled},
            {"samples", s},
            {"checks", checks_json(r.checks)},
            {"all_pass", r.all_pass()}};
}

nlohmann::json to_json(const ThreeWay& t) {
    nlohmann::json labels = nlohmann::json::array();
    for (MassPart p : t.label) labels.push_back(to_string(p));
    return {{"kind", "three_way"},
            {"mass_h", t.mass_h},
            {"mass_l", t.mass_l},
            {"mass_0", t.mass_0},
            {"labels", labels},
            {"k_h", t.k_h},
            {"chain", to_json(t.chain)},
            {"checks", checks_json(t.checks)},
            {"all_pass", t.all_pass()}};
}

nlohmann::json to_json(const RectCover& c) {
    nlohmann::json pieces = nlohmann::json::array();
    for (const CoverPiece& p : c.pieces)
        pieces.push_back({{"iteration", p.iteration},
                          {"center", p.ball.center},
                          {"radius", p.ball.radius},
                          {"tol", p.tol},
                          {"vertices", p.positions.size()},
                          {"covered_atoms", p.covered_atoms},
                          {"covered_mass", p.covered_mass}});
    return {{"kind", "rectifiable_cover"},
            {"gate_passed", c.gate_passed},
            {"gate_fraction", c.gate_fraction},
            {"message", c.message},
            {"excluded_mass", c.excluded_mass},
            {"residual_trace", c.residual_trace},
            {"halving_holds", c.halving_holds()},
            {"pieces", pieces},
            {"covered_at", c.covered_at}};
}

}  // namespace corona
