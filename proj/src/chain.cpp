#include "corona/chain.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <set>
#include <unordered_set>

#include "corona/beta.hpp"
#include "corona/parallel.hpp"

namespace corona {

double DecompositionResult::total_leaf_packing() const {
    double s = 0.0;
    for (const ChainStage& st : stages) s += st.packing;
    return s;
}

namespace {

bool vec_less(const Vec& a, const Vec& b) { return a < b; }

}  // namespace

DecompositionResult chain_trees(const PointMeasure& mu_in, const CoveringPair& covering, const ChainParams& params,
                                const Constants& consts) {
    const std::size_t n = mu_in.dim();
    const int k = params.k;
    if (k < 1 || static_cast<std::size_t>(k) >= n) throw PreconditionError("chain: need 1 <= k < n");
    require_dim(covering.dim(), n, "covering pair");

    DecompositionResult res;
    res.params = params;
    ChainParams& p = res.params;
    p.rho = params.rho > 0.0 ? params.rho : rho_of(static_cast<int>(n), k);
    if (p.enforce_rho && 2.0 * c1_of(static_cast<int>(n), k) * p.rho * std::pow(50.0, k) > 0.5)
        throw PreconditionError("chain: rho violates 2 c1 rho 50^k <= 1/2");
    p.m = params.m > 0.0 ? params.m : m0_of(static_cast<int>(n), k, p.rho) * params.M;
    res.root = params.root ? *params.root : Ball{Vec(n, 0.0), 1.0};
    require_dim(res.root.dim(), n, "chain root");
    const double R = res.root.radius;
    if (p.r_min < 0.0) {
        const double s = min_positive_spacing(mu_in);
        p.r_min = std::isfinite(s) ? s / 10.0 : 0.0;
    }

    // Dini hypothesis on sampled covering centers, window r_x < 2^alpha <= 2R.
    const double delta0 = consts.delta1 * std::pow(16.0, -(k + 2));
    res.hypothesis_bound = delta0 * delta0 * params.M;
    {
        const auto idx = covering.centers().query(res.root.center, R);
        const std::size_t budget = std::max<std::size_t>(1, p.delta_sample_budget);
        const std::size_t stride = std::max<std::size_t>(1, (idx.size() + budget - 1) / budget);
        res.hypothesis_sampled = stride > 1;
        const int floor_alpha = alpha_floor_for(mu_in);
        const int hi = static_cast<int>(std::floor(std::log2(2.0 * R)));
        std::vector<std::size_t> picks;
        for (std::size_t j = 0; j < idx.size(); j += stride) picks.push_back(idx[j]);
        std::vector<double> sums(picks.size(), 0.0);
        parallel_for(picks.size(), p.jobs, [&](std::size_t j) {
            const std::size_t y = picks[j];
            int lo = floor_alpha;
            if (covering.radius(y) > 0.0)
                lo = std::max(lo, static_cast<int>(std::floor(std::log2(covering.radius(y)))) + 1);
            if (lo <= hi) sums[j] = dini_sum(mu_in, covering.center(y), k, p.eps_bar, lo, hi);
        });
        std::set<std::size_t> excised;
        for (std::size_t j = 0; j < picks.size(); ++j) {
            const VecView c = covering.center(picks[j]);
            const auto at = mu_in.points().query(c, tolerances().geometric * std::max(1.0, R));
            double mass = 0.0;
            for (std::size_t a : at) mass += mu_in.weight(a);
            if (sums[j] > res.hypothesis_bound) {
                ++res.hypothesis_violations;
                res.hypothesis_violation_mass += mass * double(stride);
            }
            if (params.main_mode && sums[j] > params.M)
                for (std::size_t a : at) excised.insert(a);
        }
        if (res.hypothesis_violation_mass > params.gamma)
            throw PreconditionError("chain: Dini hypothesis violated on mass above the gamma budget");
        res.exceptional_atoms.assign(excised.begin(), excised.end());
        res.exceptional_mass = mu_in.mass_of(res.exceptional_atoms);
    }
    if (res.exceptional_atoms.empty()) {
        res.measure = mu_in;
    } else {
        std::vector<char> drop(mu_in.size(), 0);
        for (std::size_t a : res.exceptional_atoms) drop[a] = 1;
        res.measure = mu_in.restrict([&](std::size_t a) { return !drop[a]; });
    }
    const PointMeasure& mu = res.measure;

    if (p.delta < 0.0) {
        bool sampled = false;
        p.delta = measure_delta(mu, covering, res.root, k, p.eps_bar, p.delta_sample_budget, &sampled);
    }

    ClassifyParams cp{k, p.rho, p.m, params.M};
    res.root_class = classify_ball(mu, res.root, covering, cp);
    if (res.root_class.kind == BallKind::Stop) {
        res.stop_root = true;
        res.final_scale = 0;
        res.r_final = R;
        return res;
    }

    ChainStage first;
    first.kind = res.root_class.kind;
    first.leaves.push_back(ChainLeaf{res.root.center, R, 0, res.root_class});
    first.packing = 1.0;
    res.stages.push_back(std::move(first));

    for (int t = 1; t <= p.max_stages; ++t) {
        const ChainStage& prev = res.stages.back();
        if (prev.leaves.empty()) break;
        const bool good = prev.kind == BallKind::Good;
        std::vector<TreeRecord> built(prev.leaves.size());
        parallel_for(prev.leaves.size(), p.jobs, [&](std::size_t j) {
            const ChainLeaf& f = prev.leaves[j];
            TreeParams tp;
            tp.k = k;
            tp.rho = p.rho;
            tp.M = params.M;
            tp.m = p.m;
            tp.eps_bar = p.eps_bar;
            tp.delta = p.delta;
            tp.enforce_delta = false;
            tp.enforce_rho = p.enforce_rho;
            tp.max_depth = std::max(0, p.max_scale - f.scale);
            tp.r_min = p.r_min;
            tp.lattice_budget = p.lattice_budget;
            const Ball root{f.center, f.radius};
            built[j] = good ? build_good_tree(mu, root, covering, tp, consts, f.cls)
                            : build_bad_tree(mu, root, covering, tp, consts, f.cls);
        });
        ChainStage next;
        next.kind = good ? BallKind::Bad : BallKind::Good;
        for (std::size_t j = 0; j < built.size(); ++j) {
            const TreeRecord& tr = built[j];
            const int base = prev.leaves[j].scale;
            for (std::size_t id : tr.leaves()) {
                const TreeBall& b = tr.balls[id];
                next.leaves.push_back(ChainLeaf{b.center, b.radius, base + b.scale, b.cls});
                next.packing += std::pow(b.radius / R, k);
            }
            res.trees.push_back(tr);
            res.tree_scale.push_back(base);
            res.tree_stage.push_back(t - 1);
        }
        res.stages.push_back(std::move(next));
        if (t == p.max_stages && !res.stages.back().leaves.empty()) res.stage_capped = true;
    }
    if (!res.stages.empty() && res.stages.back().leaves.empty()) res.stages.pop_back();

    // Q slices: every good or bad ball of every tree, indexed by global scale.
    int deepest = 0;
    for (std::size_t j = 0; j < res.trees.size(); ++j) {
        const TreeRecord& tr = res.trees[j];
        for (const TreeBall& b : tr.balls) {
            if (b.cls.kind == BallKind::Stop) continue;
            if (b.scale == 0 && res.tree_stage[j] > 0) continue;  // same ball as the parent's leaf
            const int g = res.tree_scale[j] + b.scale;
            if (static_cast<int>(res.q_slices.size()) <= g) res.q_slices.resize(g + 1);
            res.q_slices[g].push_back(b.center);
            deepest = std::max(deepest, g);
        }
    }
    for (auto& q : res.q_slices) std::sort(q.begin(), q.end(), vec_less);
    res.final_scale = deepest;
    res.r_final = res.r(deepest);
    if (!res.q_slices.empty()) res.c_zero = res.q_slices[deepest];

    std::set<std::size_t> plus;
    for (const TreeRecord& tr : res.trees) plus.insert(tr.c_plus.begin(), tr.c_plus.end());
    res.c_plus.assign(plus.begin(), plus.end());
    return res;
}

double chain_residual(const DecompositionResult& res, const CoveringPair& covering, int scale, double enlarge) {
    const PointMeasure& mu = res.measure;
    const std::size_t n = mu.dim();
    const double ri = res.r(scale);
    PointSet q(n, {}, ri);
    if (scale < static_cast<int>(res.q_slices.size()))
        for (const Vec& c : res.q_slices[scale]) q.insert(c);
    double maxr = 0.0;
    for (std::size_t y : res.c_plus) maxr = std::max(maxr, covering.radius(y));
    PointSet plus(n, {}, std::max(enlarge * maxr, ri));
    for (std::size_t y : res.c_plus) plus.insert(covering.center(y));
    double mass = 0.0;
    std::vector<std::size_t> near;
    for (std::size_t a : mu.ball_indices(res.root)) {
        const VecView x = mu.point(a);
        if (q.size() && q.any_within(x, ri)) continue;
        bool hit = false;
        if (plus.size()) {
            plus.query(x, enlarge * maxr, near);
            for (std::size_t j : near)
                if (dist(x, covering.center(res.c_plus[j])) < enlarge * covering.radius(res.c_plus[j])) {
                    hit = true;
                    break;
                }
        }
        if (!hit) mass += mu.weight(a);
    }
    return mass;
}

double union_volume(const std::vector<Vec>& points, const std::vector<double>& radii, double step) {
    if (points.empty()) return 0.0;
    if (radii.size() != points.size()) throw DimensionMismatch("union_volume: one radius per point");
    if (!(step > 0.0)) throw PreconditionError("union_volume: step must be positive");
    const std::size_t n = points.front().size();
    std::unordered_set<std::string> seen;
    std::string key(n * sizeof(std::int64_t), '\0');
    std::vector<std::int64_t> lo(n), hi(n), idx(n);
    for (std::size_t p = 0; p < points.size(); ++p) {
        const Vec& c = points[p];
        const double r = radii[p];
        for (std::size_t j = 0; j < n; ++j) {
            lo[j] = static_cast<std::int64_t>(std::floor((c[j] - r) / step));
            hi[j] = static_cast<std::int64_t>(std::floor((c[j] + r) / step));
        }
        idx = lo;
        for (;;) {
            double d2 = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double x = (double(idx[j]) + 0.5) * step - c[j];
                d2 += x * x;
            }
            if (d2 < r * r) {
                std::memcpy(key.data(), idx.data(), key.size());
                seen.insert(key);
            }
            std::size_t j = 0;
            while (j < n && idx[j] == hi[j]) {
                idx[j] = lo[j];
                ++j;
            }
            if (j == n) break;
            ++idx[j];
        }
    }
    return double(seen.size()) * std::pow(step, double(n));
}

bool CoreReport::all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const BoundCheck& c) { return c.pass; });
}

CoreReport core_estimate_report(const DecompositionResult& res, const CoveringPair& covering, const Constants& consts) {
    CoreReport rep;
    const PointMeasure& mu = res.measure;
    const int k = res.params.k;
    const double M = res.params.M;
    const double R = res.root.radius;
    const double Rk = std::pow(R, k);
    const std::size_t n = mu.dim();
    rep.c_key = std::pow(4.0 / res.params.rho, k);

    for (const ChainStage& s : res.stages) rep.stage_packing.push_back(s.packing);
    const double tree_pack = 2.0 * (1.0 + std::pow(50.0, k));
    rep.checks.push_back(check_le("leaf_packing_total", res.total_leaf_packing(), tree_pack));
    double decay = 0.0;
    for (std::size_t t = 0; t < rep.stage_packing.size(); ++t)
        decay = std::max(decay, rep.stage_packing[t] / ((1.0 + std::pow(50.0, k)) * std::pow(2.0, -double(t / 2))));
    rep.checks.push_back(check_le("leaf_packing_decay_ratio", decay, 1.0));

    // (A) packing of C'_+, Q slices and the Minkowski profile.
    double plus_pack = 0.0;
    for (std::size_t y : res.c_plus) plus_pack += std::pow(covering.radius(y) / R, k);
    rep.checks.push_back(check_le("c_plus_packing", plus_pack, consts.c_orig_pack));
    double qmax = 0.0;
    for (std::size_t i = 0; i < res.q_slices.size(); ++i) {
        rep.q_packing.push_back(double(res.q_slices[i].size()) * std::pow(res.r(static_cast<int>(i)) / R, k));
        qmax = std::max(qmax, rep.q_packing.back());
    }
    rep.checks.push_back(check_le("q_packing", qmax, consts.c_Q));

    if (!res.stop_root) {
        double mink = 0.0;
        for (int a = 0; a < 40; ++a) {
            const double r = R * std::ldexp(1.0, -a);
            if (r < res.r_final) break;
            std::vector<Vec> pts;
            std::vector<double> rad;
            for (std::size_t y : res.c_plus) {
                pts.push_back(to_vec(covering.center(y)));
                rad.push_back(r);
            }
            for (const Vec& c : res.c_zero) {
                pts.push_back(c);
                rad.push_back(r);
            }
            const double step = r / 8.0;
            const double cells = double(pts.size()) * std::pow(2.0 * r / step + 1.0, double(n));
            if (cells > 4e7) break;
            const double v = union_volume(pts, rad, step) * std::pow(r, double(k) - double(n)) / Rk;
            rep.minkowski_profile.emplace_back(r, v);
            mink = std::max(mink, v);
        }
        rep.checks.push_back(check_le("minkowski", mink, consts.c_mink));
    }

    // (B) residual mass.
    const int last = res.final_scale;
    rep.residual = 0.0;
    for (int i = 0; i <= last; ++i) rep.residual = std::max(rep.residual, chain_residual(res, covering, i, 4.0));
    rep.residual_rx = chain_residual(res, covering, last, 1.0);
    rep.checks.push_back(check_le("residual", rep.residual, consts.c_residual * M * Rk));

    // (C) noncollapse on dyadic radii above 4 r_x.
    auto probe = [&](VecView x, double rx) {
        for (double r = 4.0 * rx * 1.0000001; r <= R; r *= 2.0) {
            const double m = mu.ball_mass(Ball{to_vec(x), r});
            const double need = M * std::pow(r, k) / rep.c_key;
            rep.noncollapse_worst = std::max(rep.noncollapse_worst, m > 0.0 ? need / m : std::numeric_limits<double>::infinity());
            ++rep.noncollapse_samples;
        }
    };
    if (!res.stop_root) {
        for (std::size_t y : res.c_plus) probe(covering.center(y), covering.radius(y));
        for (const Vec& c : res.c_zero) probe(c, res.r_final);
        rep.checks.push_back(check_le("noncollapse", rep.noncollapse_worst, 1.0));
    }

    // (D) Hausdorff content of C'_0 per ball, at the final resolution.
    if (!res.c_zero.empty()) {
        PointSet z(n, {}, res.r_final);
        for (const Vec& c : res.c_zero) z.insert(c);
        double worst = 0.0;
        const std::size_t stride = std::max<std::size_t>(1, res.c_zero.size() / 64);
        for (std::size_t j = 0; j < res.c_zero.size(); j += stride) {
            for (double r = 4.0 * res.r_final; r <= R; r *= 2.0) {
                const double content = double(z.query(res.c_zero[j], r).size()) * std::pow(res.r_final, k);
                worst = std::max(worst, content / std::pow(r, k));
            }
        }
        rep.checks.push_back(check_le("hausdorff_content", worst, consts.c_hk));
    }
    return rep;
}

nlohmann::json to_json(const DecompositionResult& r, bool include_trees) {
    nlohmann::json j;
    j["kind"] = "decomposition";
    j["stop_root"] = r.stop_root;
    j["root"] = {{"center", r.root.center}, {"radius", r.root.radius}};
    j["root_class"] = to_json(r.root_class);
    j["params"] = {{"k", r.params.k},         {"rho", r.params.rho},       {"M", r.params.M},
                   {"m", r.params.m},         {"eps_bar", r.params.eps_bar}, {"delta", r.params.delta},
                   {"r_min", r.params.r_min}, {"max_stages", r.params.max_stages}, {"max_scale", r.params.max_scale},
                   {"main_mode", r.params.main_mode}};
    j["gamma"] = std::isfinite(r.params.gamma) ? nlohmann::json(r.params.gamma) : nlohmann::json("inf");
    j["exceptional_mass"] = r.exceptional_mass;
    j["exceptional_atoms"] = r.exceptional_atoms;
    j["hypothesis"] = {{"bound", r.hypothesis_bound},
                       {"violations", r.hypothesis_violations},
                       {"violation_mass", r.hypothesis_violation_mass},
                       {"sampled", r.hypothesis_sampled}};
    nlohmann::json stages = nlohmann::json::array();
    for (const ChainStage& s : r.stages) {
        nlohmann::json leaves = nlohmann::json::array();
        for (const ChainLeaf& f : s.leaves) leaves.push_back({{"center", f.center}, {"radius", f.radius}, {"scale", f.scale}});
        stages.push_back({{"kind", to_string(s.kind)}, {"packing", s.packing}, {"leaves", leaves}});
    }
    j["stages"] = stages;
    j["stage_capped"] = r.stage_capped;
    j["tree_count"] = r.trees.size();
    if (include_trees) {
        nlohmann::json trees = nlohmann::json::array();
        for (const TreeRecord& t : r.trees) trees.push_back(to_json(t));
        j["trees"] = trees;
    }
    nlohmann::json q = nlohmann::json::array();
    for (std::size_t i = 0; i < r.q_slices.size(); ++i) q.push_back({{"scale", i}, {"count", r.q_slices[i].size()}});
    j["q_slices"] = q;
    j["c_plus"] = r.c_plus;
    j["c_zero"] = r.c_zero;
    j["final_scale"] = r.final_scale;
    j["r_final"] = r.r_final;
    j["leaf_packing_total"] = r.total_leaf_packing();
    return j;
}

nlohmann::json to_json(const CoreReport& r) {
    nlohmann::json checks = nlohmann::json::array();
    for (const BoundCheck& c : r.checks) checks.push_back(to_json(c));
    nlohmann::json mink = nlohmann::json::array();
    for (const auto& [rr, v] : r.minkowski_profile) mink.push_back({{"r", rr}, {"value", v}});
    return {{"kind", "core_estimate"},
            {"checks", checks},
            {"all_pass", r.all_pass()},
            {"c_key", r.c_key},
            {"stage_packing", r.stage_packing},
            {"q_packing", r.q_packing},
            {"minkowski_profile", mink},
            {"noncollapse_worst", r.noncollapse_worst},
            {"noncollapse_samples", r.noncollapse_samples},
            {"residual", r.residual},
            {"residual_rx", r.residual_rx}};
}

}  // namespace corona
