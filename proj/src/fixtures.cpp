#include "corona/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace corona {

namespace {

std::uint64_t splitmix(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

// Odometer over the integer box [-m, m]^d.
template <class Fn>
void for_each_lattice_point(std::size_t d, std::int64_t m, Fn&& fn) {
    std::vector<std::int64_t> idx(d, -m);
    if (d == 0) {
        fn(idx);
        return;
    }
    for (;;) {
        fn(idx);
        std::size_t j = 0;
        while (j < d && idx[j] == m) {
            idx[j] = -m;
            ++j;
        }
        if (j == d) return;
        ++idx[j];
    }
}

void check_budget(double count, double cap, const char* what) {
    if (count > cap) throw BudgetExceeded(std::string(what) + ": resolution would exceed the atom budget");
}

constexpr double kAtomCap = 5e6;

}  // namespace

Rng::Rng(std::uint64_t seed) {
    for (auto& s : s_) s = splitmix(seed);
}

std::uint64_t Rng::next() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform() { return double(next() >> 11) * 0x1.0p-53; }

double Rng::normal() {
    double u = uniform();
    while (u <= 0.0) u = uniform();
    const double v = uniform();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
}

std::size_t Rng::index(std::size_t count) { return count == 0 ? 0 : static_cast<std::size_t>(next() % count); }

Vec Rng::on_sphere(std::size_t n) {
    for (;;) {
        Vec v(n);
        for (double& x : v) x = normal();
        const double l = norm(v);
        if (l > 1e-12) return scaled(v, 1.0 / l);
    }
}

Vec Rng::in_ball(std::size_t n, double r) {
    return scaled(on_sphere(n), r * std::pow(uniform(), 1.0 / double(n)));
}

namespace {

void require_kappa(const std::vector<double>& kappa, int depth) {
    if (depth < 0 || depth > 16) throw PreconditionError("koch: depth must lie in [0, 16]");
    if (static_cast<int>(kappa.size()) < depth) throw PreconditionError("koch: need one kappa per step");
    for (int i = 0; i < depth; ++i)
        if (!(kappa[i] >= 0.0)) throw PreconditionError("koch: kappa must be nonnegative");
}

struct P2 {
    double x, y;
};

void tent(P2 a, P2 b, double kappa, P2 out[5]) {
    const double dx = b.x - a.x, dy = b.y - a.y;
    out[0] = a;
    out[1] = {a.x + dx / 3.0, a.y + dy / 3.0};
    out[2] = {a.x + dx / 2.0 - kappa * dy, a.y + dy / 2.0 + kappa * dx};
    out[3] = {a.x + 2.0 * dx / 3.0, a.y + 2.0 * dy / 3.0};
    out[4] = b;
}

double streamed(P2 a, P2 b, const std::vector<double>& kappa, int level, int depth) {
    if (level == depth) return std::hypot(b.x - a.x, b.y - a.y);
    P2 p[5];
    tent(a, b, kappa[level], p);
    double s = 0.0;
    for (int j = 0; j < 4; ++j) s += streamed(p[j], p[j + 1], kappa, level + 1, depth);
    return s;
}

}  // namespace

KochCurve koch(const std::vector<double>& kappa, int depth) {
    require_kappa(kappa, depth);
    check_budget(std::pow(4.0, depth), 1 << 20, "koch");
    std::vector<P2> chain{{0.0, 0.0}, {1.0, 0.0}};
    for (int i = 0; i < depth; ++i) {
        std::vector<P2> next;
        next.reserve(4 * (chain.size() - 1) + 1);
        for (std::size_t s = 0; s + 1 < chain.size(); ++s) {
            P2 p[5];
            tent(chain[s], chain[s + 1], kappa[i], p);
            for (int j = 0; j < 4; ++j) next.push_back(p[j]);
        }
        next.push_back(chain.back());
        chain.swap(next);
    }
    KochCurve c;
    c.vertices.reserve(chain.size());
    for (const P2& p : chain) c.vertices.push_back({p.x, p.y});
    for (std::size_t s = 0; s + 1 < chain.size(); ++s) {
        c.segment_lengths.push_back(std::hypot(chain[s + 1].x - chain[s].x, chain[s + 1].y - chain[s].y));
        c.length += c.segment_lengths.back();
    }
    return c;
}

double koch_length_streamed(const std::vector<double>& kappa, int depth) {
    require_kappa(kappa, depth);
    return streamed({0.0, 0.0}, {1.0, 0.0}, kappa, 0, depth);
}

double koch_length_formula(const std::vector<double>& kappa, int depth) {
    require_kappa(kappa, depth);
    double l = 1.0;
    for (int i = 0; i < depth; ++i) l *= (2.0 + std::sqrt(1.0 + 36.0 * kappa[i] * kappa[i])) / 3.0;
    return l;
}

PointMeasure koch_measure(const KochCurve& c) {
    MeasureBuilder b(2);
    for (std::size_t v = 0; v < c.vertices.size(); ++v) {
        double w = 0.0;
        if (v > 0) w += 0.5 * c.segment_lengths[v - 1];
        if (v < c.segment_lengths.size()) w += 0.5 * c.segment_lengths[v];
        b.add(c.vertices[v], w);
    }
    return std::move(b).build();
}

PointMeasure lebesgue(std::size_t n, double spacing, double radius) {
    return flat(n, n, spacing, radius);
}

PointMeasure flat(std::size_t n, std::size_t d, double spacing, double radius) {
    if (d > n) throw PreconditionError("flat: plane dimension exceeds ambient dimension");
    if (!(spacing > 0.0) || !(radius > 0.0)) throw PreconditionError("flat: spacing and radius must be positive");
    const auto m = static_cast<std::int64_t>(std::floor(radius / spacing));
    check_budget(std::pow(2.0 * double(m) + 1.0, double(d)), kAtomCap, "flat");
    const double w = std::pow(spacing, double(d));
    MeasureBuilder b(n);
    Vec p(n, 0.0);
    for_each_lattice_point(d, m, [&](const std::vector<std::int64_t>& idx) {
        for (std::size_t j = 0; j < d; ++j) p[j] = double(idx[j]) * spacing;
        if (norm(p) < radius) b.add(p, w);
    });
    return std::move(b).build(spacing);
}

PointMeasure packed_spheres(std::size_t n, int k, double rho, std::size_t per_sphere, double clip) {
    if (k < 1 || k > 2 || static_cast<std::size_t>(k) >= n)
        throw PreconditionError("packed_spheres: need k in {1, 2} and k < n");
    if (!(rho > 0.0) || rho > 1.0) throw PreconditionError("packed_spheres: rho must lie in (0, 1]");
    if (per_sphere == 0) throw PreconditionError("packed_spheres: per_sphere must be positive");
    const double s = std::pow(rho, double(n) / double(k));
    const auto m = static_cast<std::int64_t>(std::floor(2.0 / rho));
    check_budget(std::pow(2.0 * double(m) + 1.0, double(n)) * double(per_sphere), kAtomCap, "packed_spheres");

    std::vector<Vec> shape;  // unit k-sphere in the first k+1 axes
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (std::size_t j = 0; j < per_sphere; ++j) {
        Vec u(n, 0.0);
        if (k == 1) {
            const double t = 2.0 * std::numbers::pi * double(j) / double(per_sphere);
            u[0] = std::cos(t);
            u[1] = std::sin(t);
        } else {
            const double z = 1.0 - (2.0 * double(j) + 1.0) / double(per_sphere);
            const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            u[0] = r * std::cos(golden * double(j));
            u[1] = r * std::sin(golden * double(j));
            u[2] = z;
        }
        shape.push_back(u);
    }
    const double w = sphere_area(k) * std::pow(s, k) / double(per_sphere);

    MeasureBuilder b(n);
    Vec c(n), p(n);
    for_each_lattice_point(n, m, [&](const std::vector<std::int64_t>& idx) {
        for (std::size_t j = 0; j < n; ++j) c[j] = double(idx[j]) * rho;
        if (!(norm(c) < 2.0)) return;
        for (const Vec& u : shape) {
            for (std::size_t j = 0; j < n; ++j) p[j] = c[j] + s * u[j];
            if (norm(p) < clip) b.add(p, w);
        }
    });
    return std::move(b).build();
}

std::vector<Vec> dirac_positions(std::size_t n, int k, std::size_t count) {
    if (k < 1 || static_cast<std::size_t>(k) > n) throw PreconditionError("dirac_positions: need 1 <= k <= n");
    // phi_k: positive root of x^{k+1} = x + 1.
    double g = 2.0;
    for (int it = 0; it < 200; ++it) g = std::pow(1.0 + g, 1.0 / double(k + 1));
    Vec alpha(k);
    for (int j = 0; j < k; ++j) alpha[j] = std::pow(1.0 / g, double(j + 1));
    std::vector<Vec> out;
    const double r = 0.95;
    for (std::size_t i = 1; out.size() < count; ++i) {
        Vec p(n, 0.0);
        for (int j = 0; j < k; ++j) {
            const double t = std::fmod(0.5 + alpha[j] * double(i), 1.0);
            p[j] = r * (2.0 * t - 1.0);
        }
        if (norm(p) < r) out.push_back(p);
    }
    return out;
}

PointMeasure plane_plus_diracs(std::size_t n, int k, const std::vector<double>& weights, double spacing) {
    for (double w : weights)
        if (!(w > 0.0)) throw PreconditionError("plane_plus_diracs: weights must be positive");
    MeasureBuilder b(n);
    b.append(lebesgue(n, spacing, 1.0));
    const auto pos = dirac_positions(n, k, weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) b.add(pos[i], weights[i]);
    return std::move(b).build(spacing);
}

PointMeasure nested_segments(std::size_t n, double rho, int levels, std::size_t per_level, double density) {
    if (n < 2) throw PreconditionError("nested_segments: need n >= 2");
    if (!(rho > 0.0) || rho >= 0.5) throw PreconditionError("nested_segments: rho must lie in (0, 1/2)");
    if (levels < 1 || levels > 8) throw PreconditionError("nested_segments: levels must lie in [1, 8]");
    if (per_level < 2 || !(density > 0.0)) throw PreconditionError("nested_segments: need per_level >= 2 and density > 0");
    MeasureBuilder b(n);
    for (int j = 0; j < levels; ++j) {
        const double outer = std::pow(rho, 2 * j);
        const double gap = j + 1 < levels ? 2.0 * std::pow(rho, 2 * j + 1) : 0.0;
        const double lambda = j == 0 ? density : density / rho;
        const std::size_t half = per_level / 2;
        const double step = (outer - gap) / double(half);
        for (int side : {-1, 1})
            for (std::size_t i = 0; i < half; ++i) {
                Vec x(n, 0.0);
                x[0] = side * (gap + (double(i) + 0.5) * step);
                b.add(x, lambda * step);
            }
    }
    return std::move(b).build();
}

GraphFunction graph_function_from(const std::string& s) {
    if (s == "flat") return GraphFunction::Flat;
    if (s == "sine") return GraphFunction::Sine;
    if (s == "parabola") return GraphFunction::Parabola;
    if (s == "abs") return GraphFunction::Abs;
    throw InputError("unknown graph function '" + s + "'");
}

const char* to_string(GraphFunction f) {
    switch (f) {
        case GraphFunction::Flat: return "flat";
        case GraphFunction::Sine: return "sine";
        case GraphFunction::Parabola: return "parabola";
        case GraphFunction::Abs: return "abs";
    }
    return "?";
}

double graph_value(GraphFunction f, double a, VecView x) {
    switch (f) {
        case GraphFunction::Flat: return 0.0;
        case GraphFunction::Sine: return a * std::sin(2.0 * std::numbers::pi * x[0]);
        case GraphFunction::Parabola: return a * norm_sq(x);
        case GraphFunction::Abs: return a * norm(x);
    }
    return 0.0;
}

namespace {

double gradient_sq(GraphFunction f, double a, VecView x) {
    switch (f) {
        case GraphFunction::Flat: return 0.0;
        case GraphFunction::Sine: {
            const double g = 2.0 * std::numbers::pi * a * std::cos(2.0 * std::numbers::pi * x[0]);
            return g * g;
        }
        case GraphFunction::Parabola: return 4.0 * a * a * norm_sq(x);
        case GraphFunction::Abs: return norm_sq(x) > 0.0 ? a * a : 0.0;
    }
    return 0.0;
}

}  // namespace

PointMeasure graph_sample(int k, GraphFunction f, double amplitude, double spacing, double radius) {
    if (k < 1) throw PreconditionError("graph_sample: k must be positive");
    if (!(spacing > 0.0) || !(radius > 0.0)) throw PreconditionError("graph_sample: spacing and radius must be positive");
    const std::size_t d = static_cast<std::size_t>(k);
    const auto m = static_cast<std::int64_t>(std::floor(radius / spacing));
    check_budget(std::pow(2.0 * double(m) + 1.0, double(d)), kAtomCap, "graph_sample");
    const double cell = std::pow(spacing, double(d));
    MeasureBuilder b(d + 1);
    Vec x(d), p(d + 1);
    for_each_lattice_point(d, m, [&](const std::vector<std::int64_t>& idx) {
        for (std::size_t j = 0; j < d; ++j) x[j] = p[j] = double(idx[j]) * spacing;
        p[d] = graph_value(f, amplitude, x);
        if (norm(p) < radius) b.add(p, cell * std::sqrt(1.0 + gradient_sq(f, amplitude, x)));
    });
    return std::move(b).build(spacing);
}

PointMeasure graph_with_noise(int k, GraphFunction f, double amplitude, double spacing, std::size_t noise_count,
                              double noise_mass, std::uint64_t seed) {
    MeasureBuilder b(static_cast<std::size_t>(k) + 1);
    b.append(graph_sample(k, f, amplitude, spacing, 1.0));
    Rng rng(seed);
    for (std::size_t i = 0; i < noise_count; ++i)
        b.add(rng.in_ball(static_cast<std::size_t>(k) + 1, 1.0), noise_mass / double(noise_count));
    return std::move(b).build(spacing);
}

FixtureSpec fixture_spec_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw InputError("fixture spec: expected a JSON object");
    FixtureSpec s;
    auto get = [&](const char* key, auto& field) {
        if (!j.contains(key)) return;
        try {
            j.at(key).get_to(field);
        } catch (const nlohmann::json::exception& e) {
            throw InputError(std::string("fixture spec: field '") + key + "': " + e.what());
        }
    };
    get("kind", s.kind);
    get("n", s.n);
    get("k", s.k);
    get("kappa", s.kappa);
    get("depth", s.depth);
    get("spacing", s.spacing);
    get("radius", s.radius);
    get("rho", s.rho);
    get("per_sphere", s.per_sphere);
    get("per_level", s.per_level);
    get("density", s.density);
    get("dirac_weights", s.dirac_weights);
    get("function", s.function);
    get("amplitude", s.amplitude);
    get("noise_count", s.noise_count);
    get("noise_mass", s.noise_mass);
    get("seed", s.seed);
    if (s.kind.empty()) throw InputError("fixture spec: field 'kind' is required");
    return s;
}

nlohmann::json to_json(const FixtureSpec& s) {
    return {{"kind", s.kind},
            {"n", s.n},
            {"k", s.k},
            {"kappa", s.kappa},
            {"depth", s.depth},
            {"spacing", s.spacing},
            {"radius", s.radius},
            {"rho", s.rho},
            {"per_sphere", s.per_sphere},
            {"per_level", s.per_level},
            {"density", s.density},
            {"dirac_weights", s.dirac_weights},
            {"function", s.function},
            {"amplitude", s.amplitude},
            {"noise_count", s.noise_count},
            {"noise_mass", s.noise_mass},
            {"seed", s.seed}};
}

PointMeasure generate(const FixtureSpec& s) {
    if (s.kind == "koch") {
        std::vector<double> kappa = s.kappa;
        if (kappa.size() == 1) kappa.resize(static_cast<std::size_t>(std::max(s.depth, 1)), kappa[0]);
        return koch_measure(koch(kappa, s.depth));
    }
    if (s.kind == "lebesgue") return lebesgue(s.n, s.spacing, s.radius);
    if (s.kind == "flat") return flat(s.n, static_cast<std::size_t>(s.k), s.spacing, s.radius);
    if (s.kind == "packed_spheres") return packed_spheres(s.n, s.k, s.rho, s.per_sphere, s.radius);
    if (s.kind == "nested") return nested_segments(s.n, s.rho, s.depth, s.per_level, s.density);
    if (s.kind == "plane_plus_diracs") return plane_plus_diracs(s.n, s.k, s.dirac_weights, s.spacing);
    if (s.kind == "graph") return graph_sample(s.k, graph_function_from(s.function), s.amplitude, s.spacing, s.radius);
    if (s.kind == "graph_noise")
        return graph_with_noise(s.k, graph_function_from(s.function), s.amplitude, s.spacing, s.noise_count,
                                s.noise_mass, s.seed);
    throw InputError("fixture spec: unknown kind '" + s.kind + "'");
}

}  // namespace corona
