#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace corona {

using Vec = std::vector<double>;
using VecView = std::span<const double>;

// Central numerical tolerances. Every comparison in the library reads from here.
struct Tolerances {
    double geometric = 1e-9;   // containment and equality of lengths
    double frame = 1e-10;      // orthonormality of plane frames
    double eigen = 1e-12;      // Jacobi off-diagonal stopping threshold
    double property = 1e-9;    // property-suite violation threshold
};

const Tolerances& tolerances();

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class ZeroMassError : public Error {
public:
    using Error::Error;
};

class RankDeficient : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

class BudgetExceeded : public Error {
public:
    using Error::Error;
};

class InputError : public Error {
public:
    using Error::Error;
};

/// Open ball B_r(x) = {y : |y - x| < r}.
struct Ball {
    Vec center;
    double radius = 0.0;

    std::size_t dim() const { return center.size(); }
};

inline double dot(VecView a, VecView b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm_sq(VecView a) { return dot(a, a); }
inline double norm(VecView a) { return std::sqrt(norm_sq(a)); }

inline double dist_sq(VecView a, VecView b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

inline double dist(VecView a, VecView b) { return std::sqrt(dist_sq(a, b)); }

inline Vec sub(VecView a, VecView b) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline Vec add(VecView a, VecView b) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline Vec scaled(VecView a, double s) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] * s;
    return r;
}

inline void axpy(double s, VecView x, Vec& y) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += s * x[i];
}

inline Vec to_vec(VecView a) { return Vec(a.begin(), a.end()); }

inline Vec unit_vector(std::size_t n, std::size_t i) {
    Vec e(n, 0.0);
    e[i] = 1.0;
    return e;
}

inline bool in_ball(VecView p, const Ball& b) {
    return dist_sq(p, b.center) < b.radius * b.radius;
}

inline void require_dim(std::size_t got, std::size_t want, const char* what) {
    if (got != want)
        throw DimensionMismatch(std::string(what) + ": dimension " + std::to_string(got) +
                                " does not match " + std::to_string(want));
}

/// Volume of the unit j-ball.
double omega(int j);

/// Surface measure of the unit j-sphere in R^{j+1}.
double sphere_area(int j);

}  // namespace corona
