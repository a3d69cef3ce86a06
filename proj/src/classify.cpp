#include "corona/classify.hpp"

#include <algorithm>
#include <limits>
#include <map>

#include "corona/beta.hpp"

namespace corona {

const char* to_string(BallKind k) {
    switch (k) {
        case BallKind::Good: return "good";
        case BallKind::Bad: return "bad";
        case BallKind::Stop: return "stop";
    }
    return "?";
}

const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::None: return "none";
        case StopReason::LowMass: return "low_mass";
        case StopReason::HitsOriginalBall: return "hits_original_ball";
    }
    return "?";
}

nlohmann::json to_json(const BallClass& c) {
    nlohmann::json j = {{"kind", to_string(c.kind)},
                        {"center", c.ball.center},
                        {"radius", c.ball.radius},
                        {"mass", c.mass},
                        {"params", {{"k", c.params.k}, {"rho", c.params.rho}, {"m", c.params.m}, {"M", c.params.M}}}};
    if (c.kind == BallKind::Good)
        j["good_witness"] = {{"points", c.good.points}, {"masses", c.good.masses}, {"centers", c.good.centers}};
    if (c.kind == BallKind::Bad) {
        j["bad_plane"] = to_json(*c.bad_plane);
        j["bad_residual"] = c.bad_residual;
        j["bad_bound"] = c.bad_bound;
    }
    if (c.kind == BallKind::Stop) {
        j["stop_reason"] = to_string(c.stop);
        if (c.original) j["original_index"] = *c.original;
    }
    return j;
}

namespace {

void check_params(const ClassifyParams& p, std::size_t n) {
    if (!(p.rho > 0.0) || p.rho > 1.0 / 20.0 + 1e-15) throw PreconditionError("classify: rho must lie in (0, 1/20]");
    if (!(p.m > 0.0) || !(p.M > 0.0)) throw PreconditionError("classify: m and M must be positive");
    if (p.k < 1 || static_cast<std::size_t>(p.k) >= n) throw PreconditionError("classify: need 1 <= k < n");
}

AffinePlane padded_span(const std::vector<Vec>& pts, const Vec& fallback_base, int target_dim) {
    const std::size_t n = fallback_base.size();
    const Vec base = pts.empty() ? fallback_base : pts.front();
    std::vector<Vec> dirs;
    for (std::size_t i = 1; i < pts.size(); ++i) dirs.push_back(sub(pts[i], base));
    std::vector<Vec> frame = orthonormalize(dirs, tolerances().frame);
    for (std::size_t axis = 0; axis < n && frame.size() < static_cast<std::size_t>(target_dim); ++axis) {
        std::vector<Vec> trial = frame;
        trial.push_back(unit_vector(n, axis));
        trial = orthonormalize(trial, 1e-6);
        if (trial.size() > frame.size()) frame = std::move(trial);
    }
    frame.resize(std::min<std::size_t>(frame.size(), target_dim));
    return AffinePlane::from_frame(base, frame);
}

}  // namespace

BallClass dichotomy(const PointMeasure& mu, const Ball& ball, const ClassifyParams& params) {
    check_params(params, mu.dim());
    BallClass c;
    c.ball = ball;
    c.params = params;
    const auto atoms = mu.ball_indices(ball);
    c.mass = mu.mass_of(atoms);

    const double s = params.rho * ball.radius;
    const double thresh = params.m * std::pow(s, params.k);
    std::vector<double> sub_mass(atoms.size(), -1.0);
    std::vector<Vec> Y;
    std::vector<Vec> frame;

    for (int i = 0; i <= params.k; ++i) {
        bool found = false;
        for (std::size_t a = 0; a < atoms.size(); ++a) {
            const VecView p = mu.point(atoms[a]);
            if (i > 0) {
                Vec d = sub(p, Y.front());
                for (const Vec& e : frame) axpy(-dot(d, e), e, d);
                if (norm(d) < 2.0 * s) continue;
            }
            if (sub_mass[a] < 0.0) sub_mass[a] = mu.ball_mass(Ball{to_vec(p), s});
            if (sub_mass[a] > thresh) {
                const Ball sb{to_vec(p), s};
                c.good.points.push_back(sb.center);
                c.good.masses.push_back(sub_mass[a]);
                Y.push_back(center_of_mass(mu, sb));
                c.good.centers.push_back(Y.back());
                found = true;
                break;
            }
        }
        if (!found) {
            c.kind = BallKind::Bad;
            c.bad_plane = padded_span(Y, ball.center, params.k - 1);
            double resid = 0.0;
            for (std::size_t a : atoms)
                if (plane_distance(mu.point(a), *c.bad_plane) >= 2.0 * s) resid += mu.weight(a);
            c.bad_residual = resid;
            c.bad_bound = std::pow(2.0, double(mu.dim())) * std::pow(params.rho, params.k - double(mu.dim())) * params.m *
                          std::pow(ball.radius, params.k);
            c.good = GoodWitness{};
            return c;
        }
        std::vector<Vec> dirs;
        for (std::size_t j = 1; j < Y.size(); ++j) dirs.push_back(sub(Y[j], Y.front()));
        frame = orthonormalize(dirs, tolerances().frame);
    }
    c.kind = BallKind::Good;
    return c;
}

BallClass classify_ball(const PointMeasure& mu, const Ball& ball, const CoveringPair& covering,
                        const ClassifyParams& params) {
    check_params(params, mu.dim());
    const double mass = mu.ball_mass(ball);
    if (mass <= params.M * std::pow(ball.radius, params.k)) {
        BallClass c;
        c.ball = ball;
        c.params = params;
        c.mass = mass;
        c.stop = StopReason::LowMass;
        return c;
    }
    if (auto hit = covering.hitting_original_ball(ball.center, ball.radius, params.rho)) {
        BallClass c;
        c.ball = ball;
        c.params = params;
        c.mass = mass;
        c.stop = StopReason::HitsOriginalBall;
        c.original = *hit;
        return c;
    }
    return dichotomy(mu, ball, params);
}

bool witness_holds(const PointMeasure& mu, const BallClass& c) {
    if (c.kind != BallKind::Good) return false;
    const auto& w = c.good;
    const std::size_t need = static_cast<std::size_t>(c.params.k) + 1;
    if (w.points.size() != need || w.centers.size() != need || w.masses.size() != need) return false;
    const double s = c.params.rho * c.ball.radius;
    const double thresh = c.params.m * std::pow(s, c.params.k);
    for (std::size_t i = 0; i < need; ++i) {
        if (!in_ball(w.points[i], c.ball)) return false;
        const Ball sb{w.points[i], s};
        double mass = 0.0;
        Vec com(mu.dim(), 0.0);
        for (std::size_t a = 0; a < mu.size(); ++a) {
            if (dist_sq(mu.point(a), sb.center) < s * s) {
                mass += mu.weight(a);
                axpy(mu.weight(a), mu.point(a), com);
            }
        }
        if (!(mass >= thresh) || !(mass > 0.0)) return false;
        for (double& x : com) x /= mass;
        if (dist(com, w.centers[i]) > tolerances().geometric * std::max(1.0, s)) return false;
    }
    return general_position(w.centers, s);
}

std::vector<Vec> plane_lattice(const AffinePlane& w, const Ball& ball, double spacing, std::size_t budget,
                               const std::vector<Vec>& near, double near_radius, bool* truncated) {
    if (truncated) *truncated = false;
    std::vector<Vec> out;
    const double d = plane_distance(ball.center, w);
    if (d >= ball.radius) return out;
    const std::size_t m = w.k();
    if (m == 0) {
        if (in_ball(w.base(), ball)) out.push_back(w.base());
        return out;
    }
    const double rad = std::sqrt(ball.radius * ball.radius - d * d);
    const Vec uc = w.coordinates(ball.center);
    std::vector<long> lo(m), hi(m);
    double count = 1.0;
    for (std::size_t j = 0; j < m; ++j) {
        lo[j] = static_cast<long>(std::ceil((uc[j] - rad) / spacing));
        hi[j] = static_cast<long>(std::floor((uc[j] + rad) / spacing));
        count *= std::max(0.0, double(hi[j] - lo[j] + 1));
    }
    auto emit = [&](const std::vector<long>& idx) {
        Vec u(m);
        for (std::size_t j = 0; j < m; ++j) u[j] = idx[j] * spacing;
        Vec p = w.embed(u);
        if (in_ball(p, ball)) out.push_back(std::move(p));
    };
    if (count <= double(budget)) {
        if (count == 0.0) return out;
        std::vector<long> idx = lo;
        for (;;) {
            emit(idx);
            std::size_t j = 0;
            while (j < m && idx[j] == hi[j]) {
                idx[j] = lo[j];
                ++j;
            }
            if (j == m) break;
            ++idx[j];
        }
        return out;
    }
    if (truncated) *truncated = true;
    std::map<std::vector<long>, bool> keys;
    for (const Vec& q : near) {
        const Vec uq = w.coordinates(q);
        std::vector<long> a(m), b(m), idx(m);
        for (std::size_t j = 0; j < m; ++j) {
            a[j] = std::max(lo[j], static_cast<long>(std::ceil((uq[j] - near_radius) / spacing)));
            b[j] = std::min(hi[j], static_cast<long>(std::floor((uq[j] + near_radius) / spacing)));
            if (a[j] > b[j]) goto next;
        }
        idx = a;
        for (;;) {
            Vec u(m);
            for (std::size_t j = 0; j < m; ++j) u[j] = idx[j] * spacing;
            if (dist(w.embed(u), q) < near_radius) keys[idx] = true;
            std::size_t j = 0;
            while (j < m && idx[j] == b[j]) {
                idx[j] = a[j];
                ++j;
            }
            if (j == m) break;
            ++idx[j];
        }
    next:;
    }
    for (const auto& kv : keys) emit(kv.first);
    return out;
}

std::vector<Vec> greedy_net(const std::vector<Vec>& candidates, double separation, std::size_t n,
                            const PointSet* blocked) {
    PointSet accepted(n, {}, separation);
    std::vector<Vec> out;
    for (const Vec& c : candidates) {
        if (blocked && blocked->size() && blocked->any_within(c, separation)) continue;
        if (accepted.any_within(c, separation)) continue;
        accepted.insert(c);
        out.push_back(c);
    }
    return out;
}

std::vector<Vec> bad_ball_net(const PointMeasure& mu, const AffinePlane& w, const Ball& ball, double rho,
                              std::size_t lattice_budget) {
    const double s = rho * ball.radius;
    std::vector<Vec> cand;
    for (std::size_t a : mu.ball_indices(ball)) {
        if (plane_distance(mu.point(a), w) < 5.0 * s) cand.push_back(to_vec(mu.point(a)));
    }
    const std::vector<Vec> atoms = cand;
    for (Vec& p : plane_lattice(w, ball, 0.4 * s, lattice_budget, atoms, s)) cand.push_back(std::move(p));
    return greedy_net(cand, 0.4 * s, ball.dim());
}

TiltingResult tilting_check(const PointMeasure& mu, const Ball& inner, const BallClass& inner_class,
                            const Ball& outer, int k, double m, double eps_bar, double c_tilt) {
    if (inner_class.kind != BallKind::Good) throw PreconditionError("tilting_check: inner ball is not good");
    const double R = outer.radius / 8.0;
    const double rho = inner.radius / R;
    if (!(dist(inner.center, outer.center) < 7.0 * R)) throw PreconditionError("tilting_check: inner center outside B_7");
    const Ball outer8{outer.center, 8.0 * R};
    const Ball inner8{inner.center, 8.0 * rho * R};
    if (!(mu.ball_mass(outer8) > eps_bar * std::pow(outer8.radius, k)) ||
        !(mu.ball_mass(inner8) > eps_bar * std::pow(inner8.radius, k)))
        throw PreconditionError("tilting_check: mass threshold not met");

    const PlaneFit fin = best_plane(mu, inner8, k);
    const PlaneFit fout = best_plane(mu, outer8, k);
    TiltingResult t;
    t.beta_inner = fin.beta_sq;
    t.beta_outer = fout.beta_sq;
    const double dh = slice_hausdorff(fin.plane, fout.plane, inner8) / R;
    t.measured = dh * dh;
    const double dg = grassmann_distance(fin.plane, fout.plane);
    t.grassmann_sq = dg * dg;
    t.bound = c_tilt / m * (t.beta_inner + t.beta_outer);
    t.pass = t.measured <= t.bound * (1.0 + 1e-9) + 1e-15 && t.grassmann_sq <= t.bound * (1.0 + 1e-9) + 1e-15;
    return t;
}

}  // namespace corona
