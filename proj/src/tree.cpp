#include "corona/tree.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include "corona/beta.hpp"
#include "corona/parallel.hpp"

namespace corona {

const char* to_string(TreeKind k) { return k == TreeKind::Good ? "good" : "bad"; }

std::vector<std::size_t> TreeRecord::leaves() const {
    std::vector<std::size_t> out;
    for (const TreeScale& s : scales) {
        const auto& v = kind == TreeKind::Good ? s.bad : s.good;
        out.insert(out.end(), v.begin(), v.end());
    }
    return out;
}

const std::vector<std::size_t>& TreeRecord::active(int i) const {
    return kind == TreeKind::Good ? scales.at(i).good : scales.at(i).bad;
}

const std::vector<std::size_t>& TreeRecord::switching(int i) const {
    return kind == TreeKind::Good ? scales.at(i).bad : scales.at(i).good;
}

double measure_delta(const PointMeasure& mu, const CoveringPair& covering, const Ball& root, int k, double eps_bar,
                     std::size_t budget, bool* sampled) {
    const auto idx = covering.centers().query(root.center, 2.0 * root.radius);
    const std::size_t stride = budget == 0 ? 1 : std::max<std::size_t>(1, (idx.size() + budget - 1) / budget);
    if (sampled) *sampled = stride > 1;
    const int floor_alpha = alpha_floor_for(mu);
    const int hi = static_cast<int>(std::floor(std::log2(16.0 * root.radius)));
    double worst = 0.0;
    for (std::size_t j = 0; j < idx.size(); j += stride) {
        const std::size_t y = idx[j];
        int lo = floor_alpha;
        const double ry = covering.radius(y);
        if (ry > 0.0) lo = std::max(lo, static_cast<int>(std::floor(std::log2(ry))) + 1);
        if (lo > hi) continue;
        worst = std::max(worst, dini_sum(mu, covering.center(y), k, eps_bar, lo, hi));
    }
    return std::sqrt(worst);
}

namespace {

struct Builder {
    TreeKind kind;
    const PointMeasure& mu;
    const CoveringPair& covering;
    const TreeParams& p;
    ClassifyParams cp;
    TreeRecord t;
    // switching and stop centers per scale: the remainder R_i
    std::vector<PointSet> remainder;

    Builder(TreeKind kd, const PointMeasure& m, const CoveringPair& c, const TreeParams& tp)
        : kind(kd), mu(m), covering(c), p(tp) {}

    BallKind active_kind() const { return kind == TreeKind::Good ? BallKind::Good : BallKind::Bad; }

    bool in_remainder(VecView x, int upto) const {
        for (int l = 0; l <= upto && l < static_cast<int>(remainder.size()); ++l)
            if (remainder[l].size() && remainder[l].any_within(x, t.r(l))) return true;
        return false;
    }

    void attach_geometry(TreeBall& b) {
        if (b.cls.kind == BallKind::Good && kind == TreeKind::Good) {
            b.plane = best_plane(mu, Ball{b.center, 8.0 * b.radius}, p.k).plane;
            b.com = center_of_mass(mu, Ball{b.center, b.radius});
        } else if (b.cls.kind == BallKind::Bad) {
            b.plane = b.cls.bad_plane;
        }
    }

    void add_scale(int i, std::vector<TreeBall> balls) {
        TreeScale sc;
        sc.index = i;
        sc.radius = t.r(i);
        PointSet rem(mu.dim(), {}, 0.4 * sc.radius);
        for (TreeBall& b : balls) {
            const std::size_t id = t.balls.size();
            switch (b.cls.kind) {
                case BallKind::Good: sc.good.push_back(id); break;
                case BallKind::Bad: sc.bad.push_back(id); break;
                case BallKind::Stop: sc.stop.push_back(id); break;
            }
            if (b.cls.kind != active_kind()) rem.insert(b.center);
            t.balls.push_back(std::move(b));
        }
        remainder.push_back(std::move(rem));
        t.scales.push_back(std::move(sc));
        compute_excess(i);
    }

    void compute_excess(int i) {
        TreeScale& sc = t.scales[i];
        const double next = t.r(i + 1);
        const double cut = kind == TreeKind::Good ? next / 50.0 : 2.0 * next;
        std::set<std::size_t> ex;
        for (std::size_t id : (kind == TreeKind::Good ? sc.good : sc.bad)) {
            const TreeBall& b = t.balls[id];
            for (std::size_t a : mu.ball_indices(Ball{b.center, b.radius}))
                if (plane_distance(mu.point(a), *b.plane) >= cut) ex.insert(a);
        }
        sc.excess_atoms.assign(ex.begin(), ex.end());
        sc.excess_mass = mu.mass_of(sc.excess_atoms);
    }

    std::vector<TreeBall> classify_all(const std::vector<Vec>& centers, int i) {
        std::vector<TreeBall> out(centers.size());
        const double r = t.r(i);
        parallel_for(centers.size(), p.jobs, [&](std::size_t j) {
            TreeBall& b = out[j];
            b.center = centers[j];
            b.scale = i;
            b.radius = r;
            b.cls = classify_ball(mu, Ball{b.center, r}, covering, cp);
            attach_geometry(b);
        });
        return out;
    }

    std::vector<Vec> net_candidates(int i, TreeScale& info) {
        const double prev = t.r(i - 1);
        const double r = t.r(i);
        const double strip = kind == TreeKind::Good ? r / 40.0 : 5.0 * r;
        std::vector<char> mark(mu.size(), 0);
        std::vector<Vec> lattice;
        for (std::size_t id : t.active(i - 1)) {
            const TreeBall& b = t.balls[id];
            std::vector<Vec> strip_atoms;
            for (std::size_t a : mu.ball_indices(Ball{b.center, prev})) {
                const VecView x = mu.point(a);
                if (!in_ball(x, t.root)) continue;
                if (plane_distance(x, *b.plane) < strip) {
                    strip_atoms.push_back(to_vec(x));
                    if (!mark[a] && !in_remainder(x, i - 1)) mark[a] = 1;
                }
            }
            if (kind == TreeKind::Bad) {
                bool trunc = false;
                for (Vec& q : plane_lattice(*b.plane, Ball{b.center, prev}, 0.4 * r, p.lattice_budget, strip_atoms, r,
                                            &trunc)) {
                    if (in_ball(q, t.root) && !in_remainder(q, i - 1)) lattice.push_back(std::move(q));
                }
                info.lattice_truncated = info.lattice_truncated || trunc;
            }
        }
        std::vector<Vec> cand;
        for (std::size_t a = 0; a < mu.size(); ++a)
            if (mark[a]) cand.push_back(to_vec(mu.point(a)));
        info.candidates = cand.size();
        info.lattice_candidates = lattice.size();
        for (Vec& q : lattice) cand.push_back(std::move(q));
        return cand;
    }

    void finish() {
        std::set<std::size_t> plus;
        for (const TreeBall& b : t.balls)
            if (b.cls.kind == BallKind::Stop && b.cls.stop == StopReason::HitsOriginalBall) plus.insert(*b.cls.original);
        t.c_plus.assign(plus.begin(), plus.end());
        const int last = static_cast<int>(t.scales.size()) - 1;
        t.r_final = t.r(last);
        for (std::size_t id : t.active(last)) t.c_zero.push_back(t.balls[id].center);
    }

    void run(const Ball& root, const std::optional<BallClass>& root_class, const Constants& consts) {
        const std::size_t n = mu.dim();
        require_dim(root.dim(), n, "tree root");
        if (!(root.radius > 0.0)) throw PreconditionError("tree: root radius must be positive");
        if (!(p.rho > 0.0) || p.rho > 1.0 / 20.0 + 1e-15) throw PreconditionError("tree: rho must lie in (0, 1/20]");
        cp.k = p.k;
        cp.rho = p.rho;
        cp.M = p.M;
        cp.m = p.m > 0.0 ? p.m : m0_of(static_cast<int>(n), p.k, p.rho) * p.M;
        if (kind == TreeKind::Bad && p.enforce_rho && c1_of(static_cast<int>(n), p.k) * p.rho > 0.5)
            throw PreconditionError("bad tree: need c1(n) rho <= 1/2");

        t.kind = kind;
        t.root = root;
        t.params = p;
        t.params.m = cp.m;
        if (p.r_min >= 0.0) {
            t.r_min = p.r_min;
        } else {
            const double s = min_positive_spacing(mu);
            t.r_min = std::isfinite(s) ? s / 10.0 : 0.0;
        }

        if (kind == TreeKind::Good) {
            if (p.delta >= 0.0) {
                t.delta = p.delta;
            } else {
                t.delta = measure_delta(mu, covering, root, p.k, p.eps_bar, p.delta_sample_budget, &t.delta_sampled);
                t.delta_measured = true;
            }
        }

        BallClass rc = root_class ? *root_class : classify_ball(mu, root, covering, cp);
        if (rc.kind != active_kind())
            throw PreconditionError(std::string(to_string(kind)) + " tree: root classifies " + to_string(rc.kind));
        if (kind == TreeKind::Good && p.enforce_delta) {
            if (t.delta * t.delta > consts.delta1 * consts.delta1 * p.M)
                throw PreconditionError("good tree: delta^2 exceeds delta1^2 M");
        }

        TreeBall rb;
        rb.center = root.center;
        rb.scale = 0;
        rb.radius = root.radius;
        rb.cls = std::move(rc);
        attach_geometry(rb);
        std::vector<TreeBall> first;
        first.push_back(std::move(rb));
        add_scale(0, std::move(first));

        for (int i = 1; i <= p.max_depth; ++i) {
            if (t.r(i - 1) < t.r_min) break;
            if (t.active(i - 1).empty()) break;
            TreeScale info;
            std::vector<Vec> cand = net_candidates(i, info);
            std::vector<Vec> net = greedy_net(cand, 0.4 * t.r(i), n);
            add_scale(i, classify_all(net, i));
            TreeScale& sc = t.scales.back();
            sc.candidates = info.candidates;
            sc.lattice_candidates = info.lattice_candidates;
            sc.lattice_truncated = info.lattice_truncated;
        }
        finish();
    }
};

}  // namespace

TreeRecord build_good_tree(const PointMeasure& mu, const Ball& root, const CoveringPair& covering,
                           const TreeParams& params, const Constants& consts,
                           const std::optional<BallClass>& root_class) {
    Builder b(TreeKind::Good, mu, covering, params);
    b.run(root, root_class, consts);
    return std::move(b.t);
}

TreeRecord build_bad_tree(const PointMeasure& mu, const Ball& root, const CoveringPair& covering,
                          const TreeParams& params, const Constants& consts,
                          const std::optional<BallClass>& root_class) {
    Builder b(TreeKind::Bad, mu, covering, params);
    b.run(root, root_class, consts);
    return std::move(b.t);
}

nlohmann::json to_json(const BoundCheck& b) {
    return {{"name", b.name}, {"claimed_bound", b.claimed_bound}, {"measured", b.measured}, {"pass", b.pass}};
}

BoundCheck check_le(std::string name, double measured, double bound, double rel_tol, double abs_tol) {
    BoundCheck c;
    c.name = std::move(name);
    c.measured = measured;
    c.claimed_bound = bound;
    c.pass = measured <= bound + rel_tol * std::abs(bound) + abs_tol;
    return c;
}

bool TreeAudit::all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const BoundCheck& c) { return c.pass; });
}

std::vector<double> packing_profile(const TreeRecord& t) {
    std::vector<double> out;
    const double Rk = std::pow(t.root.radius, t.params.k);
    double settled = 0.0;
    for (std::size_t i = 0; i < t.scales.size(); ++i) {
        const TreeScale& s = t.scales[i];
        const double rk = std::pow(s.radius, t.params.k);
        settled += double(t.switching(static_cast<int>(i)).size() + s.stop.size()) * rk;
        out.push_back((double(t.active(static_cast<int>(i)).size()) * rk + settled) / Rk);
    }
    return out;
}

std::vector<double> scale_packing(const TreeRecord& t) {
    std::vector<double> out;
    const double Rk = std::pow(t.root.radius, t.params.k);
    for (const TreeScale& s : t.scales)
        out.push_back(double(s.good.size() + s.bad.size() + s.stop.size()) * std::pow(s.radius, t.params.k) / Rk);
    return out;
}

double residual_mass(const TreeRecord& t, const PointMeasure& mu, const CoveringPair& covering, int scale) {
    if (scale < 0 || scale >= static_cast<int>(t.scales.size())) throw PreconditionError("residual_mass: no such scale");
    const std::size_t n = mu.dim();
    const double ri = t.r(scale);
    PointSet active(n, {}, ri);
    for (std::size_t id : t.active(scale)) active.insert(t.balls[id].center);
    std::vector<PointSet> sw;
    for (int l = 0; l <= scale; ++l) {
        PointSet ps(n, {}, t.r(l));
        for (std::size_t id : t.switching(l)) ps.insert(t.balls[id].center);
        sw.push_back(std::move(ps));
    }
    std::vector<std::size_t> big;
    for (std::size_t y : t.c_plus)
        if (covering.radius(y) >= ri) big.push_back(y);
    double mass = 0.0;
    for (std::size_t a : mu.ball_indices(t.root)) {
        const VecView x = mu.point(a);
        if (active.size() && active.any_within(x, ri)) continue;
        bool hit = false;
        for (int l = 0; l <= scale && !hit; ++l) hit = sw[l].size() && sw[l].any_within(x, t.r(l));
        for (std::size_t j = 0; j < big.size() && !hit; ++j)
            hit = dist(x, covering.center(big[j])) < 4.0 * covering.radius(big[j]);
        if (!hit) mass += mu.weight(a);
    }
    return mass;
}

TreeAudit audit_tree(const TreeRecord& t, const PointMeasure& mu, const CoveringPair& covering, const Constants& consts) {
    TreeAudit audit;
    const int k = t.params.k;
    const double R = t.root.radius;
    const double Rk = std::pow(R, k);
    const double M = t.params.M;
    const double rho = t.params.rho;
    const std::size_t n = mu.dim();
    const int S = static_cast<int>(t.scales.size());

    if (t.kind == TreeKind::Good) {
        const auto prof = packing_profile(t);
        audit.checks.push_back(check_le("packing", *std::max_element(prof.begin(), prof.end()), std::pow(50.0, k)));
    } else {
        const auto sp = scale_packing(t);
        double cum = 0.0;
        double worst_ratio = 0.0;
        for (int i = 1; i < S; ++i) {
            cum += sp[i];
            worst_ratio = std::max(worst_ratio, sp[i] / std::pow(consts.c1 * rho, i));
        }
        audit.checks.push_back(check_le("packing", cum, 2.0 * consts.c1 * rho));
        audit.checks.push_back(check_le("single_scale_packing_ratio", worst_ratio, 1.0));
    }

    // Vitali: each r_i/5 ball avoids every earlier switching or stop r_l/5 ball and its own scale.
    std::size_t vitali_bad = 0;
    std::vector<PointSet> settled;
    for (int i = 0; i < S; ++i) {
        const double ri = t.r(i);
        PointSet same(n, {}, 0.4 * ri);
        std::vector<std::size_t> ids;
        const TreeScale& sc = t.scales[i];
        for (auto* v : {&sc.good, &sc.bad, &sc.stop}) ids.insert(ids.end(), v->begin(), v->end());
        std::sort(ids.begin(), ids.end());
        for (std::size_t id : ids) {
            const Vec& c = t.balls[id].center;
            if (same.size() && same.any_within(c, 0.4 * ri)) ++vitali_bad;
            for (int l = 0; l < i; ++l)
                if (settled[l].size() && settled[l].any_within(c, (t.r(l) + ri) / 5.0)) ++vitali_bad;
            same.insert(c);
        }
        PointSet st(n, {}, t.r(i));
        for (std::size_t id : ids)
            if (t.balls[id].cls.kind != (t.kind == TreeKind::Good ? BallKind::Good : BallKind::Bad))
                st.insert(t.balls[id].center);
        settled.push_back(std::move(st));
    }
    audit.checks.push_back(check_le("vitali_violations", double(vitali_bad), 0.0));

    // Every ball lies in B_{2R}(root).
    double reach = 0.0;
    for (const TreeBall& b : t.balls) reach = std::max(reach, (dist(b.center, t.root.center) + b.radius) / R);
    audit.checks.push_back(check_le("balls_inside_B2", reach, 2.0));

    // Radius control on non-stop balls.
    double radius_ratio = 0.0;
    for (const TreeBall& b : t.balls) {
        if (b.cls.kind == BallKind::Stop) continue;
        for (std::size_t y : covering.plus()) {
            const double ry = covering.radius(y);
            if (ry <= b.radius) continue;
            if (dist(b.center, covering.center(y)) < 2.0 * b.radius + ry)
                radius_ratio = std::max(radius_ratio, ry / b.radius);
        }
    }
    audit.checks.push_back(check_le("radius_control", radius_ratio, 1.0));

    // Covering control at every scale.
    double uncovered = 0.0;
    {
        const auto atoms = mu.ball_indices(t.root);
        std::vector<char> in_excess(mu.size(), 0);
        std::vector<PointSet> rem;
        for (int i = 0; i < S; ++i) {
            const double ri = t.r(i);
            PointSet act(n, {}, ri);
            for (std::size_t id : t.active(i)) act.insert(t.balls[id].center);
            PointSet st(n, {}, ri);
            const TreeScale& sc = t.scales[i];
            for (std::size_t id : t.switching(i)) st.insert(t.balls[id].center);
            for (std::size_t id : sc.stop) st.insert(t.balls[id].center);
            rem.push_back(std::move(st));
            double miss = 0.0;
            for (std::size_t a : atoms) {
                if (in_excess[a]) continue;
                const VecView x = mu.point(a);
                if (act.size() && act.any_within(x, ri)) continue;
                bool hit = false;
                for (int l = 0; l <= i && !hit; ++l) hit = rem[l].size() && rem[l].any_within(x, t.r(l));
                if (!hit) miss += mu.weight(a);
            }
            uncovered = std::max(uncovered, miss);
            for (std::size_t a : sc.excess_atoms) in_excess[a] = 1;
        }
    }
    audit.checks.push_back(check_le("covering_control_mass", uncovered, 0.0));

    // Heavy stop balls sit inside B_{4 r_y}(y) and y carries mass > M rho^k r_y^k there.
    double incl = 0.0;
    double lower = 0.0;
    for (const TreeBall& b : t.balls) {
        if (b.cls.kind != BallKind::Stop || b.cls.stop != StopReason::HitsOriginalBall) continue;
        const std::size_t y = *b.cls.original;
        const double ry = covering.radius(y);
        incl = std::max(incl, (dist(b.center, covering.center(y)) + b.radius) / (4.0 * ry));
    }
    for (std::size_t y : t.c_plus) {
        const double ry = covering.radius(y);
        const double mass = mu.ball_mass(Ball{to_vec(covering.center(y)), 4.0 * ry});
        lower = std::max(lower, M * std::pow(rho * ry, k) / mass);
    }
    audit.checks.push_back(check_le("stop_inclusion", incl, 1.0));
    audit.checks.push_back(check_le("stop_lower_mass_ratio", lower, 1.0));

    // Excess and residual.
    if (t.kind == TreeKind::Good) {
        double total = 0.0;
        for (const TreeScale& s : t.scales) total += s.excess_mass;
        const double d2 = t.delta * t.delta;
        const double cheb = std::pow(50.0 / rho, 2.0);
        audit.checks.push_back(
            check_le("excess", total, consts.c_excess * cheb * std::exp(2.0 * consts.c3 * d2 / M) * d2 * Rk));
        // Each excess set against the plane's own L2 residual on B_{8r}.
        double ratio = 0.0;
        for (int i = 0; i < S; ++i) {
            const double cut = t.r(i + 1) / 50.0;
            for (std::size_t id : t.scales[i].good) {
                const TreeBall& b = t.balls[id];
                double m = 0.0, moment = 0.0;
                for (std::size_t a : mu.ball_indices(Ball{b.center, 8.0 * b.radius})) {
                    const double d = plane_distance(mu.point(a), *b.plane);
                    moment += mu.weight(a) * d * d;
                    if (d >= cut && in_ball(mu.point(a), Ball{b.center, b.radius})) m += mu.weight(a);
                }
                if (m > 0.0) ratio = std::max(ratio, m * cut * cut / moment);
            }
        }
        audit.checks.push_back(check_le("excess_chebyshev_ratio", ratio, 1.0));
        double worst = 0.0;
        for (int i = 0; i < S; ++i) worst = std::max(worst, residual_mass(t, mu, covering, i));
        audit.checks.push_back(check_le("residual", worst, (consts.c_measure_M * M + consts.c_measure_delta * cheb * d2) * Rk));
    } else {
        double worst_excess = 0.0;
        for (int i = 0; i < S; ++i) {
            const double cut = 2.0 * t.r(i + 1);
            for (std::size_t id : t.scales[i].bad) {
                const TreeBall& b = t.balls[id];
                double m = 0.0;
                for (std::size_t a : mu.ball_indices(Ball{b.center, b.radius}))
                    if (plane_distance(mu.point(a), *b.plane) >= cut) m += mu.weight(a);
                worst_excess = std::max(worst_excess, m / (M * std::pow(b.radius, k)));
            }
        }
        audit.checks.push_back(check_le("excess_per_bad_ball_ratio", worst_excess, 1.0));
        double worst = 0.0;
        for (int i = 0; i < S; ++i) worst = std::max(worst, residual_mass(t, mu, covering, i));
        audit.checks.push_back(check_le("residual", worst, 3.0 * M * Rk));
    }
    return audit;
}

nlohmann::json to_json(const TreeRecord& t) {
    nlohmann::json j;
    j["kind"] = to_string(t.kind);
    j["root"] = {{"center", t.root.center}, {"radius", t.root.radius}};
    j["params"] = {{"k", t.params.k},       {"rho", t.params.rho},       {"M", t.params.M},
                   {"m", t.params.m},       {"eps_bar", t.params.eps_bar}, {"max_depth", t.params.max_depth},
                   {"r_min", t.r_min}};
    j["delta"] = t.delta;
    j["delta_measured"] = t.delta_measured;
    j["delta_sampled"] = t.delta_sampled;
    nlohmann::json scales = nlohmann::json::array();
    for (const TreeScale& s : t.scales) {
        nlohmann::json js;
        js["index"] = s.index;
        js["radius"] = s.radius;
        js["candidates"] = s.candidates;
        js["lattice_candidates"] = s.lattice_candidates;
        js["lattice_truncated"] = s.lattice_truncated;
        js["excess_mass"] = s.excess_mass;
        js["excess_atoms"] = s.excess_atoms;
        nlohmann::json balls = nlohmann::json::array();
        std::vector<std::size_t> ids;
        for (auto* v : {&s.good, &s.bad, &s.stop}) ids.insert(ids.end(), v->begin(), v->end());
        std::sort(ids.begin(), ids.end());
        for (std::size_t id : ids) {
            const TreeBall& b = t.balls[id];
            nlohmann::json jb = {{"center", b.center}, {"kind", to_string(b.cls.kind)}, {"mass", b.cls.mass}};
            if (b.cls.kind == BallKind::Stop) {
                jb["stop_reason"] = to_string(b.cls.stop);
                if (b.cls.original) jb["original_index"] = *b.cls.original;
            }
            if (b.plane) jb["plane"] = to_json(*b.plane);
            if (!b.com.empty()) jb["center_of_mass"] = b.com;
            balls.push_back(std::move(jb));
        }
        js["balls"] = std::move(balls);
        scales.push_back(std::move(js));
    }
    j["scales"] = std::move(scales);
    j["c_plus"] = t.c_plus;
    j["c_zero"] = t.c_zero;
    j["r_final"] = t.r_final;
    return j;
}

}  // namespace corona
