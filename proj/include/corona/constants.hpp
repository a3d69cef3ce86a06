#pragma once

#include <json.hpp>

namespace corona {

/// Constants table. The first block follows from explicit formulas; the second
/// block was calibrated once on the fixture suite and is frozen here.
/// corona_calibrate reproduces the suite: each frozen value is the smallest power
/// of two at least twice the suite supremum. c3, delta1, c_tilt, c_measure_*
/// and c_orig_pack were not exercised by the suite and keep their initial values.
/// Excess and residual bounds carry the Chebyshev factor (50 / rho)^2.
struct Constants {
    int n = 2;
    int k = 1;

    double c1 = 0.0;             // omega_{n-k+1} omega_{k-1} 3 30^n / omega_n
    double rho0 = 0.0;           // largest dyadic rho <= 1/20 with 2 c1 rho 50^k <= 1/2
    double m0 = 0.0;             // rho^{n-k} 2^{-n} / 2, evaluated at rho0
    double tree_pack = 0.0;      // 2 (1 + 50^k): total leaf packing over all stages
    double beta_sum_vs_int = 0.0; // 2^{k+3}

    double c2 = 4096.0;          // distortion exponent: e^{c2 delta^2 / M}
    double c3 = 1.0;             // excess exponent
    double c_rcs = 32.0;         // |sigma_i(x) - x| <= c_rcs delta r_i / sqrt(M)
    double Lambda = 16.0;        // graph norm bound Lambda delta / sqrt(M)
    double delta1 = 1.0;         // delta^2 <= delta1^2 M
    double c_tilt = 4096.0;      // tilting constant c(n, rho)
    double c_measure_M = 4.0;    // good-tree residual: c(k) M + ...
    double c_measure_delta = 64.0; // ... + c(k, rho) delta^2
    double c_excess = 0.25;      // total excess <= c_excess e^{2 c3 delta^2/M} delta^2
    double c_Q = 2.0;            // #Q_i r_i^k
    double c_residual = 8.0;     // chain residual / M
    double c_orig_pack = 8.0;    // sum over C'_+ of r^k
    double c_mink = 16.0;        // r^{k-n} |B_r(C')|
    double c_hk = 0.5;           // H^k(C'_0 ∩ B_r) / r^k
    double c_three_way = 8.0;    // mu_l(B1), mu_0(B1) <= c (eps + M)
    double c_reifenberg = 1.0;   // sum r^k <= c (eps + M + Gamma)/a + c
    double c_ahlfors = 2.0;      // mu(B_r) <= c (eps + b + M) r^k
    double c_sphere_pack = 0.0;  // sigma_k omega_n 2^n

    nlohmann::json to_json() const;
};

/// Fills the derived block for (n, k) and applies overrides from a flat JSON object.
Constants make_constants(int n, int k, const nlohmann::json& overrides = nlohmann::json::object());

double c1_of(int n, int k);
double m0_of(int n, int k, double rho);
/// Largest 2^{-j} <= 1/20 with 2 c1 rho 50^k <= 1/2.
double rho_of(int n, int k);

}  // namespace corona
