#include "corona/manifold.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>

#include "corona/parallel.hpp"

namespace corona {

namespace {

double h(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

Vec perp(const AffinePlane& plane, VecView v) {
    Vec out = to_vec(v);
    for (const Vec& e : plane.frame()) axpy(-dot(v, e), e, out);
    return out;
}

void check_separation(const std::vector<Vec>& centers, double r) {
    const double sep = 0.4 * r * (1.0 - 1e-12);
    for (std::size_t i = 0; i < centers.size(); ++i)
        for (std::size_t j = i + 1; j < centers.size(); ++j)
            if (dist(centers[i], centers[j]) < sep)
                throw PreconditionError("partition_of_unity: centers closer than 2r/5");
}

// Weights over the listed psi values.
void normalize(std::vector<double>& psi) {
    double sum = 0.0;
    double prod = 1.0;
    for (double p : psi) {
        sum += p;
        prod *= 1.0 - p;
    }
    const double denom = prod + sum;
    for (double& p : psi) p = p / denom;
}

}  // namespace

double smooth_step(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double a = h(t);
    return a / (a + h(1.0 - t));
}

double bump(VecView x, VecView g, double r) { return smooth_step((3.0 - dist(x, g) / r) * 4.0); }

std::vector<double> partition_of_unity(const std::vector<Vec>& centers, double r, VecView x) {
    if (!(r > 0.0)) throw PreconditionError("partition_of_unity: radius must be positive");
    check_separation(centers, r);
    std::vector<double> psi;
    psi.reserve(centers.size());
    for (const Vec& g : centers) psi.push_back(bump(x, g, r));
    normalize(psi);
    return psi;
}

SigmaScale::SigmaScale(const TreeRecord& t, int i) : r_(t.r(i)) {
    centers_ = PointSet(t.root.dim(), {}, 3.0 * r_);
    if (t.kind != TreeKind::Good) return;
    for (std::size_t id : t.scales.at(i).good) {
        const TreeBall& b = t.balls[id];
        centers_.insert(b.center);
        planes_.push_back(*b.plane);
        coms_.push_back(b.com);
    }
}

Vec SigmaScale::apply(VecView x) const {
    Vec out = to_vec(x);
    if (planes_.empty()) return out;
    const auto near = centers_.query(x, 3.0 * r_);
    if (near.empty()) return out;
    std::vector<double> w;
    for (std::size_t j : near) w.push_back(bump(x, centers_.point(j), r_));
    normalize(w);
    for (std::size_t a = 0; a < near.size(); ++a) {
        if (w[a] == 0.0) continue;
        const std::size_t j = near[a];
        axpy(-w[a], perp(planes_[j], sub(x, coms_[j])), out);
    }
    return out;
}

Vec sigma_map(const TreeRecord& tree, int i, VecView x) {
    if (tree.kind != TreeKind::Good) throw PreconditionError("sigma_map: needs a good tree");
    if (i < 0 || i >= static_cast<int>(tree.scales.size())) throw PreconditionError("sigma_map: scale not built");
    return SigmaScale(tree, i).apply(x);
}

Mesh plane_mesh(const AffinePlane& plane, const Ball& ball, double edge) {
    Mesh m;
    m.n = plane.dim();
    m.k = static_cast<int>(plane.k());
    const double d = plane_distance(ball.center, plane);
    if (d >= ball.radius || !(edge > 0.0)) return m;
    const double rad = std::sqrt(ball.radius * ball.radius - d * d);
    const Vec uc = plane.coordinates(ball.center);
    const long N = static_cast<long>(std::ceil(rad / edge));
    const std::size_t k = plane.k();
    std::map<std::vector<long>, std::size_t> id;
    std::vector<long> idx(k, -N);
    for (;;) {
        Vec u(k);
        double s = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            u[j] = idx[j] * edge;
            s += u[j] * u[j];
        }
        if (s < rad * rad) {
            for (std::size_t j = 0; j < k; ++j) u[j] += uc[j];
            id[idx] = m.vertices.size();
            m.vertices.push_back(plane.embed(u));
        }
        std::size_t j = 0;
        while (j < k && idx[j] == N) {
            idx[j] = -N;
            ++j;
        }
        if (j == k) break;
        ++idx[j];
    }
    auto find = [&](const std::vector<long>& v) -> std::optional<std::size_t> {
        auto it = id.find(v);
        if (it == id.end()) return std::nullopt;
        return it->second;
    };
    for (const auto& [key, a] : id) {
        for (std::size_t j = 0; j < k; ++j) {
            auto nb = key;
            ++nb[j];
            if (auto b = find(nb)) m.edges.push_back({a, *b});
        }
        if (k == 2) {
            auto px = key, py = key, pxy = key;
            ++px[0];
            ++py[1];
            ++pxy[0];
            ++pxy[1];
            auto bx = find(px), by = find(py), bxy = find(pxy);
            if (bxy) m.edges.push_back({a, *bxy});
            if (bx && bxy) m.triangles.push_back({a, *bx, *bxy});
            if (by && bxy) m.triangles.push_back({a, *bxy, *by});
        }
    }
    std::sort(m.edges.begin(), m.edges.end());
    std::sort(m.triangles.begin(), m.triangles.end());
    return m;
}

bool ManifoldResult::all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const BoundCheck& c) { return c.pass; });
}

namespace {

Vec run_through(const std::vector<SigmaScale>& sig, VecView x, int upto) {
    Vec y = to_vec(x);
    for (int i = 1; i <= upto; ++i) y = sig[i].apply(y);
    return y;
}

// Polyline on a 1-plane, refined near the good balls of each scale.
Mesh adaptive_polyline(const TreeRecord& t, const std::vector<SigmaScale>& sig, const AffinePlane& L0,
                       std::size_t budget, double& finest, bool& coarsened) {
    const Ball dom{t.root.center, 3.0 * t.root.radius};
    const double d = plane_distance(dom.center, L0);
    const double rad = std::sqrt(std::max(0.0, dom.radius * dom.radius - d * d));
    const double uc = L0.coordinates(dom.center)[0];
    double step = t.root.radius / 4.0;
    std::vector<double> par;
    const long N = static_cast<long>(std::ceil(rad / step));
    for (long j = -N; j <= N; ++j) {
        const double u = j * step;
        if (std::abs(u) < rad) par.push_back(uc + u);
    }
    finest = step;
    const int S = static_cast<int>(t.scales.size());
    for (int i = 1; i < S; ++i) {
        if (sig[i].size() == 0) continue;
        const double ri = sig[i].radius();
        const double target = ri / 4.0;
        std::vector<Vec> pos(par.size());
        for (std::size_t a = 0; a < par.size(); ++a) pos[a] = run_through(sig, L0.embed(Vec{par[a]}), i - 1);
        std::vector<double> next;
        for (std::size_t a = 0; a + 1 < par.size(); ++a) {
            next.push_back(par[a]);
            const double len = par[a + 1] - par[a];
            if (len <= target) continue;
            const double reach = 3.0 * ri + 2.0 * len;
            if (!sig[i].centers().any_within(pos[a], reach) && !sig[i].centers().any_within(pos[a + 1], reach))
                continue;
            const long pieces = static_cast<long>(std::ceil(len / target));
            if (next.size() + par.size() + static_cast<std::size_t>(pieces) > budget) {
                coarsened = true;
                continue;
            }
            for (long q = 1; q < pieces; ++q) next.push_back(par[a] + len * double(q) / double(pieces));
        }
        if (!par.empty()) next.push_back(par.back());
        par.swap(next);
        finest = std::min(finest, target);
    }
    Mesh m;
    m.n = L0.dim();
    m.k = 1;
    for (double u : par) m.vertices.push_back(L0.embed(Vec{u}));
    for (std::size_t a = 0; a + 1 < par.size(); ++a) m.edges.push_back({a, a + 1});
    return m;
}

}  // namespace

ManifoldResult manifold_limit(const TreeRecord& tree, const Constants& consts, std::size_t vertex_budget, int jobs) {
    if (tree.kind != TreeKind::Good) throw PreconditionError("manifold_limit: needs a good tree");
    ManifoldResult res;
    const int S = static_cast<int>(tree.scales.size());
    const int k = tree.params.k;
    const std::size_t n = tree.root.dim();
    const AffinePlane& L0 = *tree.balls.at(tree.scales[0].good.at(0)).plane;

    std::vector<SigmaScale> sig;
    for (int i = 0; i < S; ++i) sig.emplace_back(tree, i);

    double last_good_r = tree.root.radius;
    for (int i = 0; i < S; ++i)
        if (!tree.scales[i].good.empty()) last_good_r = tree.r(i);

    if (k == 1) {
        res.t0 = adaptive_polyline(tree, sig, L0, vertex_budget, res.edge, res.coarsened);
    } else {
        double edge = last_good_r / 4.0;
        const double rad = 3.0 * tree.root.radius;
        while (omega(k) * std::pow(rad / edge + 1.0, k) > double(vertex_budget)) {
            edge *= 1.25;
            res.coarsened = true;
        }
        res.edge = edge;
        res.t0 = plane_mesh(L0, Ball{tree.root.center, rad}, edge);
    }

    const std::size_t V = res.t0.vertices.size();
    res.stages.assign(S, {});
    res.stages[0] = res.t0.vertices;
    for (int i = 1; i < S; ++i) {
        res.stages[i].resize(V);
        parallel_for(V, jobs, [&](std::size_t v) { res.stages[i][v] = sig[i].apply(res.stages[i - 1][v]); });
    }

    const double d2 = tree.delta * tree.delta;
    const double M = tree.params.M;
    const double atol = tolerances().geometric;

    // Edge distortion of T_0 -> T_last.
    const auto& last = res.stages.back();
    double distortion = 1.0;
    for (const auto& e : res.t0.edges) {
        const double a = dist(res.t0.vertices[e[0]], res.t0.vertices[e[1]]);
        const double b = dist(last[e[0]], last[e[1]]);
        if (a <= 0.0) continue;
        if (b <= 0.0) {
            distortion = std::numeric_limits<double>::infinity();
            continue;
        }
        distortion = std::max({distortion, b / a, a / b});
    }
    res.distortion = distortion;
    res.distortion_bound = std::exp(consts.c2 * d2 / M);

    res.step_displacement.assign(S, 0.0);
    for (int i = 1; i < S; ++i)
        for (std::size_t v = 0; v < V; ++v)
            res.step_displacement[i] =
                std::max(res.step_displacement[i], dist(res.stages[i][v], res.stages[i - 1][v]) / tree.r(i));
    res.c0_displacement.assign(S, 0.0);
    for (int j = 0; j < S; ++j)
        for (std::size_t v = 0; v < V; ++v)
            res.c0_displacement[j] = std::max(res.c0_displacement[j], dist(last[v], res.stages[j][v]) / tree.r(j));

    // Graphicality on every good ball.
    for (int i = 0; i < S; ++i) {
        const double ri = tree.r(i);
        PointSet verts(n, {}, 2.0 * ri);
        for (const Vec& p : res.stages[i]) verts.insert(p);
        for (std::size_t id : tree.scales[i].good) {
            const TreeBall& b = tree.balls[id];
            ++res.graph_balls;
            const auto near = verts.query(b.center, 2.0 * ri);
            const std::size_t cap = k == 1 ? near.size() : 400;
            const std::size_t stride = std::max<std::size_t>(1, (near.size() + cap - 1) / cap);
            std::vector<Vec> samples;
            for (std::size_t q = 0; q < near.size(); q += stride) samples.push_back(res.stages[i][near[q]]);
            if (samples.size() < 2) {
                ++res.graph_unsampled;
                continue;
            }
            const GraphNorm g = verify_graphical(samples, *b.plane, Ball{b.center, 2.0 * ri}, ri);
            if (!g.graphical) {
                ++res.graph_failures;
                continue;
            }
            res.graph_norm = std::max(res.graph_norm, g.c1());
        }
    }

    // Hole control: T_i = T_{i-1} inside earlier switching and stop balls shrunk to 4/5.
    for (int i = 1; i < S; ++i) {
        for (std::size_t v = 0; v < V; ++v) {
            const Vec& x = res.stages[i - 1][v];
            bool inside = false;
            for (int l = 0; l < i && !inside; ++l) {
                const double rl = tree.r(l);
                for (std::size_t id : tree.scales[l].bad)
                    if (dist(x, tree.balls[id].center) < 0.8 * rl) inside = true;
                for (std::size_t id : tree.scales[l].stop)
                    if (!inside && dist(x, tree.balls[id].center) < 0.8 * rl) inside = true;
            }
            if (inside) res.hole_motion = std::max(res.hole_motion, dist(res.stages[i][v], x));
        }
    }

    // Good centers lie within r_i of T_i ∩ B_R.
    for (int i = 0; i < S; ++i) {
        PointSet verts(n, {}, tree.r(i));
        for (const Vec& p : res.stages[i])
            if (in_ball(p, tree.root)) verts.insert(p);
        for (std::size_t id : tree.scales[i].good)
            res.inclusion_ratio =
                std::max(res.inclusion_ratio, verts.nearest_distance(tree.balls[id].center) / tree.r(i));
    }

    const double dm = tree.delta / std::sqrt(M);
    double rcs = 0.0;
    for (double s : res.step_displacement) rcs = std::max(rcs, s);
    double c0 = 0.0;
    for (double s : res.c0_displacement) c0 = std::max(c0, s);
    res.checks.push_back(check_le("distortion", res.distortion, res.distortion_bound, 1e-9, 1e-9));
    res.checks.push_back(check_le("sigma_displacement", rcs, consts.c_rcs * dm, 1e-9, atol));
    res.checks.push_back(check_le("c0_convergence", c0, consts.c2 * dm, 1e-9, atol));
    res.checks.push_back(check_le("graph_norm", res.graph_norm, consts.Lambda * dm, 1e-9, atol));
    res.checks.push_back(check_le("graph_failures", double(res.graph_failures), 0.0));
    res.checks.push_back(check_le("hole_motion", res.hole_motion, 0.0));
    res.checks.push_back(
        check_le("good_ball_inclusion", res.inclusion_ratio, 1.0 + std::sqrt(double(k)) * res.edge / last_good_r));
    return res;
}

void write_mesh_csv(std::ostream& vertices, std::ostream& edges, const Mesh& mesh, const std::vector<Vec>& positions) {
    if (positions.size() != mesh.vertices.size()) throw DimensionMismatch("write_mesh_csv: one position per vertex");
    vertices << "id";
    for (std::size_t j = 0; j < mesh.n; ++j) vertices << ",x" << (j + 1);
    vertices << '\n';
    for (std::size_t v = 0; v < positions.size(); ++v) {
        vertices << v;
        for (double c : positions[v]) vertices << ',' << format_number(c);
        vertices << '\n';
    }
    edges << "a,b\n";
    for (const auto& e : mesh.edges) edges << e[0] << ',' << e[1] << '\n';
}

void write_mesh_files(const std::string& prefix, const Mesh& mesh, const std::vector<Vec>& positions) {
    std::ofstream v(prefix + "_vertices.csv");
    std::ofstream e(prefix + "_edges.csv");
    if (!v || !e) throw InputError("cannot write mesh files at " + prefix);
    write_mesh_csv(v, e, mesh, positions);
}

nlohmann::json to_json(const ManifoldResult& m) {
    nlohmann::json checks = nlohmann::json::array();
    for (const BoundCheck& c : m.checks) checks.push_back(to_json(c));
    return {{"vertices", m.t0.vertices.size()},
            {"edges", m.t0.edges.size()},
            {"edge_length", m.edge},
            {"coarsened", m.coarsened},
            {"distortion", m.distortion},
            {"distortion_bound", m.distortion_bound},
            {"step_displacement", m.step_displacement},
            {"c0_displacement", m.c0_displacement},
            {"graph_norm", m.graph_norm},
            {"graph_balls", m.graph_balls},
            {"graph_unsampled", m.graph_unsampled},
            {"graph_failures", m.graph_failures},
            {"hole_motion", m.hole_motion},
            {"inclusion_ratio", m.inclusion_ratio},
            {"checks", checks}};
}

}  // namespace corona
