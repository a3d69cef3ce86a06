#pragma once

#include <vector>

#include "corona/core.hpp"

namespace corona {

/// Dense row-major square matrix.
struct SymMatrix {
    std::size_t n = 0;
    std::vector<double> a;

    explicit SymMatrix(std::size_t dim = 0) : n(dim), a(dim * dim, 0.0) {}
    double& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }
};

struct EigenDecomposition {
    Vec values;               // descending
    std::vector<Vec> vectors; // vectors[i] pairs with values[i]
};

/// Cyclic Jacobi. Eigenvalues sorted descending, ties broken by original index;
/// each eigenvector's first component above the frame tolerance is made positive.
EigenDecomposition jacobi_eigen(const SymMatrix& m);

}  // namespace corona
