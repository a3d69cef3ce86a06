#include "corona/constants.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "corona/core.hpp"

namespace corona {

double c1_of(int n, int k) {
    return omega(n - k + 1) * omega(k - 1) * 3.0 * std::pow(30.0, n) / omega(n);
}

double m0_of(int n, int k, double rho) {
    return std::pow(rho, n - k) * std::pow(2.0, -n) / 2.0;
}

double rho_of(int n, int k) {
    const double c1 = c1_of(n, k);
    double rho = 1.0 / 32.0;
    while (2.0 * c1 * rho * std::pow(50.0, k) > 0.5) rho /= 2.0;
    return rho;
}

nlohmann::json Constants::to_json() const {
    return {{"n", n},
            {"k", k},
            {"c1", c1},
            {"rho0", rho0},
            {"m0", m0},
            {"tree_pack", tree_pack},
            {"beta_sum_vs_int", beta_sum_vs_int},
            {"c2", c2},
            {"c3", c3},
            {"c_rcs", c_rcs},
            {"Lambda", Lambda},
            {"delta1", delta1},
            {"c_tilt", c_tilt},
            {"c_measure_M", c_measure_M},
            {"c_measure_delta", c_measure_delta},
            {"c_excess", c_excess},
            {"c_Q", c_Q},
            {"c_residual", c_residual},
            {"c_orig_pack", c_orig_pack},
            {"c_mink", c_mink},
            {"c_hk", c_hk},
            {"c_three_way", c_three_way},
            {"c_reifenberg", c_reifenberg},
            {"c_ahlfors", c_ahlfors},
            {"c_sphere_pack", c_sphere_pack}};
}

Constants make_constants(int n, int k, const nlohmann::json& overrides) {
    if (n < 1 || k < 1 || k >= n) throw PreconditionError("constants need 1 <= k < n");
    Constants c;
    c.n = n;
    c.k = k;
    c.c1 = c1_of(n, k);
    c.rho0 = rho_of(n, k);
    c.m0 = m0_of(n, k, c.rho0);
    c.tree_pack = 2.0 * (1.0 + std::pow(50.0, k));
    c.beta_sum_vs_int = std::pow(2.0, k + 3);
    c.c_sphere_pack = sphere_area(k) * omega(n) * std::pow(2.0, n);

    if (!overrides.is_object()) throw InputError("constants override must be a JSON object");
    std::vector<std::string> known;
    auto set = [&](const char* key, double& field) {
        known.emplace_back(key);
        if (overrides.contains(key)) {
            if (!overrides[key].is_number()) throw InputError(std::string("constant ") + key + " must be a number");
            field = overrides[key].get<double>();
        }
    };
    set("c1", c.c1);
    set("rho0", c.rho0);
    set("m0", c.m0);
    set("tree_pack", c.tree_pack);
    set("c2", c.c2);
    set("c3", c.c3);
    set("c_rcs", c.c_rcs);
    set("Lambda", c.Lambda);
    set("delta1", c.delta1);
    set("c_tilt", c.c_tilt);
    set("c_measure_M", c.c_measure_M);
    set("c_measure_delta", c.c_measure_delta);
    set("c_excess", c.c_excess);
    set("c_Q", c.c_Q);
    set("c_residual", c.c_residual);
    set("c_orig_pack", c.c_orig_pack);
    set("c_mink", c.c_mink);
    set("c_hk", c.c_hk);
    set("c_three_way", c.c_three_way);
    set("c_reifenberg", c.c_reifenberg);
    set("c_ahlfors", c.c_ahlfors);
    set("c_sphere_pack", c.c_sphere_pack);
    for (const auto& item : overrides.items())
        if (std::find(known.begin(), known.end(), item.key()) == known.end())
            throw InputError("unknown constant '" + item.key() + "'");
    return c;
}

}  // namespace corona
