#include "corona/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <numeric>

namespace corona {

std::vector<Vec> orthonormalize(const std::vector<Vec>& vectors, double drop_tol) {
    std::vector<Vec> basis;
    for (const Vec& v0 : vectors) {
        Vec v = v0;
        const double original = norm(v);
        if (original == 0.0) continue;
        for (int pass = 0; pass < 2; ++pass) {
            for (const Vec& e : basis) {
                const double c = dot(v, e);
                axpy(-c, e, v);
            }
        }
        const double len = norm(v);
        if (len <= drop_tol * std::max(original, 1.0)) continue;
        for (double& x : v) x /= len;
        basis.push_back(std::move(v));
    }
    return basis;
}

AffinePlane AffinePlane::from_directions(Vec base, const std::vector<Vec>& directions) {
    for (const Vec& d : directions) require_dim(d.size(), base.size(), "plane direction");
    std::vector<Vec> frame = orthonormalize(directions, tolerances().frame);
    if (frame.size() != directions.size())
        throw RankDeficient("plane directions are linearly dependent");
    if (frame.size() >= base.size() && !base.empty())
        throw PreconditionError("plane dimension must be below the ambient dimension");
    AffinePlane p;
    p.base_ = std::move(base);
    p.frame_ = std::move(frame);
    return p;
}

AffinePlane AffinePlane::from_frame(Vec base, std::vector<Vec> frame) {
    const double tol = tolerances().frame;
    for (std::size_t i = 0; i < frame.size(); ++i) {
        require_dim(frame[i].size(), base.size(), "plane frame");
        if (std::abs(norm_sq(frame[i]) - 1.0) > tol)
            throw PreconditionError("plane frame vector is not unit length");
        for (std::size_t j = 0; j < i; ++j)
            if (std::abs(dot(frame[i], frame[j])) > tol)
                throw PreconditionError("plane frame is not orthogonal");
    }
    AffinePlane p;
    p.base_ = std::move(base);
    p.frame_ = std::move(frame);
    return p;
}

Vec AffinePlane::coordinates(VecView x) const {
    const Vec d = sub(x, base_);
    Vec c(frame_.size());
    for (std::size_t i = 0; i < frame_.size(); ++i) c[i] = dot(d, frame_[i]);
    return c;
}

Vec AffinePlane::embed(VecView coords) const {
    Vec x = base_;
    for (std::size_t i = 0; i < frame_.size(); ++i) axpy(coords[i], frame_[i], x);
    return x;
}

Vec AffinePlane::normal_part(VecView x) const {
    Vec d = sub(x, base_);
    for (const Vec& e : frame_) {
        const double c = dot(d, e);
        axpy(-c, e, d);
    }
    return d;
}

Vec project(const AffinePlane& plane, VecView x) {
    require_dim(x.size(), plane.dim(), "project");
    return plane.embed(plane.coordinates(x));
}

double plane_distance(VecView x, const AffinePlane& plane) {
    require_dim(x.size(), plane.dim(), "plane_distance");
    return norm(plane.normal_part(x));
}

namespace {

// Distance from a unit vector p of L_a to the unit disk of L_b (both linear).
double disk_gap(const Vec& p, const std::vector<Vec>& frame_b) {
    Vec q(p.size(), 0.0);
    for (const Vec& e : frame_b) axpy(dot(p, e), e, q);
    const double len = norm(q);
    if (len > 1.0)
        for (double& x : q) x /= len;
    return dist(p, q);
}

Vec sphere_point(const std::vector<double>& angles) {
    // Hyperspherical coordinates on S^{m}, m = angles.size().
    const std::size_t m = angles.size();
    Vec u(m + 1, 1.0);
    for (std::size_t i = 0; i < m; ++i) {
        u[i] *= std::cos(angles[i]);
        for (std::size_t j = i + 1; j <= m; ++j) u[j] *= std::sin(angles[i]);
    }
    return u;
}

double directed_grassmann(const std::vector<Vec>& fa, const std::vector<Vec>& fb) {
    const std::size_t k = fa.size();
    const std::size_t n = fa.front().size();
    auto eval = [&](const std::vector<double>& angles) {
        const Vec u = sphere_point(angles);
        Vec p(n, 0.0);
        for (std::size_t i = 0; i < k; ++i) axpy(u[i], fa[i], p);
        return disk_gap(p, fb);
    };

    if (k == 1) {
        Vec p = fa[0];
        const double plus = disk_gap(p, fb);
        for (double& x : p) x = -x;
        return std::max(plus, disk_gap(p, fb));
    }

    const std::size_t m = k - 1;
    const double full = 2.0 * std::numbers::pi;
    // Keep the grid near 2pi/256 per angle but bounded in total size.
    int steps = 256;
    while (m > 1 && std::pow(steps / 2.0, double(m - 1)) * steps > 2.0e5 && steps > 16) steps /= 2;
    const double h = full / steps;

    std::vector<int> counts(m);
    for (std::size_t i = 0; i < m; ++i) counts[i] = (i + 1 == m) ? steps : steps / 2 + 1;

    struct Sample {
        double value;
        std::vector<double> angles;
    };
    std::vector<Sample> best;
    std::vector<int> idx(m, 0);
    std::vector<double> angles(m);
    for (;;) {
        for (std::size_t i = 0; i < m; ++i) angles[i] = idx[i] * h;
        const double v = eval(angles);
        best.push_back({v, angles});
        if (best.size() > 64) {
            std::nth_element(best.begin(), best.begin() + 8, best.end(),
                             [](const Sample& a, const Sample& b) { return a.value > b.value; });
            best.resize(8);
        }
        std::size_t d = 0;
        while (d < m && ++idx[d] == counts[d]) idx[d++] = 0;
        if (d == m) break;
    }
    std::sort(best.begin(), best.end(),
              [](const Sample& a, const Sample& b) { return a.value > b.value; });
    if (best.size() > 4) best.resize(4);

    double result = best.front().value;
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    for (Sample s : best) {
        for (int round = 0; round < 3; ++round) {
            for (std::size_t i = 0; i < m; ++i) {
                double lo = s.angles[i] - h, hi = s.angles[i] + h;
                auto at = [&](double t) {
                    std::vector<double> a = s.angles;
                    a[i] = t;
                    return eval(a);
                };
                double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
                double f1 = at(x1), f2 = at(x2);
                for (int it = 0; it < 60; ++it) {
                    if (f1 < f2) {
                        lo = x1;
                        x1 = x2;
                        f1 = f2;
                        x2 = lo + phi * (hi - lo);
                        f2 = at(x2);
                    } else {
                        hi = x2;
                        x2 = x1;
                        f2 = f1;
                        x1 = hi - phi * (hi - lo);
                        f1 = at(x1);
                    }
                }
                const double t = 0.5 * (lo + hi);
                const double v = at(t);
                if (v > s.value) {
                    s.value = v;
                    s.angles[i] = t;
                }
            }
        }
        result = std::max(result, s.value);
    }
    return std::min(result, 1.0);
}

}  // namespace

double grassmann_distance(const AffinePlane& a, const AffinePlane& b) {
    if (a.k() != b.k())
        throw DimensionMismatch("grassmann_distance: planes have different dimensions");
    require_dim(a.dim(), b.dim(), "grassmann_distance");
    if (a.k() == 0) return 0.0;
    return std::max(directed_grassmann(a.frame(), b.frame()),
                    directed_grassmann(b.frame(), a.frame()));
}

bool general_position(const std::vector<Vec>& points, double rho) {
    if (points.empty()) return true;
    std::vector<Vec> dirs;
    for (std::size_t i = 1; i < points.size(); ++i) {
        Vec d = sub(points[i], points[0]);
        for (const Vec& e : orthonormalize(dirs, tolerances().frame)) {
            const double c = dot(d, e);
            axpy(-c, e, d);
        }
        if (norm(d) < rho) return false;
        dirs.push_back(sub(points[i], points[0]));
    }
    return true;
}

namespace {

struct Slice {
    bool empty = true;
    Vec center;
    double radius = 0.0;
};

Slice make_slice(const AffinePlane& p, const Ball& ball) {
    Slice s;
    const double d = plane_distance(ball.center, p);
    if (d >= ball.radius) return s;
    s.empty = false;
    s.center = project(p, ball.center);
    s.radius = std::sqrt(ball.radius * ball.radius - d * d);
    return s;
}

double gap_to_slice(VecView x, const AffinePlane& p, const Slice& s) {
    Vec q = project(p, x);
    Vec off = sub(q, s.center);
    const double len = norm(off);
    if (len > s.radius) {
        q = s.center;
        axpy(s.radius / len, off, q);
    }
    return dist(x, q);
}

std::vector<Vec> slice_samples(const AffinePlane& p, const Slice& s, int per_axis) {
    std::vector<Vec> out;
    const std::size_t k = p.k();
    if (k == 0) {
        out.push_back(s.center);
        return out;
    }
    const Vec c0 = p.coordinates(s.center);
    std::vector<int> idx(k, 0);
    const double h = 2.0 / per_axis;
    for (;;) {
        Vec u(k);
        for (std::size_t i = 0; i < k; ++i) u[i] = -1.0 + h * idx[i];
        if (norm_sq(u) <= 1.0) out.push_back(p.embed(add(c0, scaled(u, s.radius))));
        std::size_t d = 0;
        while (d < k && ++idx[d] == per_axis + 1) idx[d++] = 0;
        if (d == k) break;
    }
    // Boundary samples, where the directed distance is largest.
    if (k == 1) {
        out.push_back(p.embed(Vec{c0[0] - s.radius}));
        out.push_back(p.embed(Vec{c0[0] + s.radius}));
    } else {
        const int ring = 8 * per_axis;
        for (int j = 0; j < ring; ++j) {
            const double t = 2.0 * std::numbers::pi * j / ring;
            Vec u(k, 0.0);
            u[0] = std::cos(t);
            u[1] = std::sin(t);
            out.push_back(p.embed(add(c0, scaled(u, s.radius))));
        }
    }
    return out;
}

}  // namespace

double slice_hausdorff(const AffinePlane& a, const AffinePlane& b, const Ball& ball,
                       int samples_per_axis) {
    const Slice sa = make_slice(a, ball), sb = make_slice(b, ball);
    if (sa.empty && sb.empty) return 0.0;
    if (sa.empty || sb.empty) return std::numeric_limits<double>::infinity();
    double h = 0.0;
    for (const Vec& x : slice_samples(a, sa, samples_per_axis)) h = std::max(h, gap_to_slice(x, b, sb));
    for (const Vec& x : slice_samples(b, sb, samples_per_axis)) h = std::max(h, gap_to_slice(x, a, sa));
    return h;
}

GraphNorm verify_graphical(const std::vector<Vec>& samples, const AffinePlane& plane,
                           const Ball& ball, std::optional<double> scale) {
    const double r = scale.value_or(ball.radius);
    struct Entry {
        Vec u;
        Vec h;
    };
    std::vector<Entry> pts;
    for (const Vec& s : samples) {
        if (!in_ball(s, ball)) continue;
        pts.push_back({plane.coordinates(s), plane.normal_part(s)});
    }
    if (pts.empty()) throw PreconditionError("verify_graphical: no samples inside the ball");

    GraphNorm g;
    g.samples = pts.size();
    for (const Entry& e : pts) g.height = std::max(g.height, norm(e.h) / r);

    const double near = 1e-6 * r;
    const double height_tol = tolerances().geometric * std::max(r, 1.0);

    if (plane.k() == 1) {
        std::sort(pts.begin(), pts.end(), [](const Entry& a, const Entry& b) { return a.u[0] < b.u[0]; });
        // Merge samples sharing a coordinate, then compare consecutive groups.
        std::vector<std::size_t> heads;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (!heads.empty() && pts[i].u[0] - pts[heads.back()].u[0] <= near) {
                if (dist(pts[i].h, pts[heads.back()].h) > height_tol) return GraphNorm{false, g.height, 0.0, g.samples};
                continue;
            }
            heads.push_back(i);
        }
        for (std::size_t j = 1; j < heads.size(); ++j) {
            const Entry& a = pts[heads[j - 1]];
            const Entry& b = pts[heads[j]];
            g.slope = std::max(g.slope, dist(a.h, b.h) / (b.u[0] - a.u[0]));
        }
    } else {
        for (std::size_t i = 0; i < pts.size(); ++i) {
            for (std::size_t j = i + 1; j < pts.size(); ++j) {
                const double du = dist(pts[i].u, pts[j].u);
                const double dh = dist(pts[i].h, pts[j].h);
                if (du <= near) {
                    if (dh > height_tol) return GraphNorm{false, g.height, 0.0, g.samples};
                    continue;
                }
                g.slope = std::max(g.slope, dh / du);
            }
        }
    }
    g.graphical = true;
    return g;
}

}  // namespace corona
