#include "corona/linalg.hpp"

#include <algorithm>
#include <numeric>

namespace corona {

EigenDecomposition jacobi_eigen(const SymMatrix& m) {
    const std::size_t n = m.n;
    SymMatrix a = m;
    SymMatrix v(n);
    for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

    double scale = 0.0;
    for (double x : a.a) scale = std::max(scale, std::abs(x));
    const double stop = tolerances().eigen * std::max(scale, 1e-300);

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off = std::max(off, std::abs(a(p, q)));
        if (off <= stop) break;

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

    EigenDecomposition out;
    for (std::size_t idx : order) {
        out.values.push_back(a(idx, idx));
        Vec e(n);
        for (std::size_t k = 0; k < n; ++k) e[k] = v(k, idx);
        for (std::size_t k = 0; k < n; ++k) {
            if (std::abs(e[k]) > tolerances().frame) {
                if (e[k] < 0)
                    for (double& x : e) x = -x;
                break;
            }
        }
        out.vectors.push_back(std::move(e));
    }
    return out;
}

}  // namespace corona
