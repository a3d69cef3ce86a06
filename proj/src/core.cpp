#include "corona/core.hpp"

#include <numbers>

namespace corona {

const Tolerances& tolerances() {
    static const Tolerances t{};
    return t;
}

double omega(int j) {
    return std::pow(std::numbers::pi, j / 2.0) / std::tgamma(j / 2.0 + 1.0);
}

double sphere_area(int j) {
    return (j + 1) * omega(j + 1);
}

}  // namespace corona
