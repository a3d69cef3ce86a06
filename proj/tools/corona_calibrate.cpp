// Runs the calibration fixture suite and reports, for every calibrated constant,
// the smallest value that passes each check it enters.
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "corona/chain.hpp"
#include "corona/density.hpp"
#include "corona/fixtures.hpp"
#include "corona/manifold.hpp"
#include "corona/tree.hpp"

using namespace corona;
using nlohmann::json;

namespace {

struct Need {
    double value = 0.0;
    std::string where;
};

std::map<std::string, Need> needs;
json rows = json::array();

void need(const std::string& constant, double required, const std::string& where) {
    if (!std::isfinite(required)) return;
    Need& n = needs[constant];
    if (required > n.value) n = {required, where};
}

// Bounds that are linear in one constant: required = current * measured / bound.
void linear(const BoundCheck& b, const std::string& constant, double current, const std::string& where) {
    if (b.claimed_bound > 0.0) need(constant, current * b.measured / b.claimed_bound, where);
    rows.push_back({{"fixture", where}, {"check", b.name}, {"measured", b.measured}, {"bound", b.claimed_bound}});
}

void record(const std::vector<BoundCheck>& checks, const std::map<std::string, std::string>& map, const Constants& c,
            const std::string& where) {
    const json cj = c.to_json();
    for (const BoundCheck& b : checks) {
        auto it = map.find(b.name);
        if (it == map.end()) {
            rows.push_back({{"fixture", where}, {"check", b.name}, {"measured", b.measured}, {"bound", b.claimed_bound},
                            {"pass", b.pass}});
            continue;
        }
        linear(b, it->second, cj[it->second].get<double>(), where);
    }
}

void good_tree_case(const std::string& name, const PointMeasure& mu, const Constants& c) {
    const CoveringPair cov = CoveringPair::support_of(mu);
    TreeParams tp;
    tp.k = c.k;
    tp.rho = 1.0 / 32.0;
    tp.M = 1.0;
    const TreeRecord t = build_good_tree(mu, Ball{Vec(mu.dim(), 0.0), 1.0}, cov, tp, c);
    const TreeAudit a = audit_tree(t, mu, cov, c);
    record(a.checks, {{"excess", "c_excess"}}, c, name);
    const ManifoldResult m = manifold_limit(t, c);
    const double d2 = t.delta * t.delta / tp.M;
    if (d2 > 0.0 && m.distortion > 1.0) need("c2", std::log(m.distortion) / d2, name);
    std::vector<BoundCheck> rest;
    for (const BoundCheck& b : m.checks)
        if (b.name != "distortion") rest.push_back(b);
    rows.push_back({{"fixture", name}, {"check", "distortion"}, {"measured", m.distortion}, {"delta", t.delta}});
    record(rest, {{"sigma_displacement", "c_rcs"}, {"c0_convergence", "c2"}, {"graph_norm", "Lambda"}}, c, name);
}

void chain_case(const std::string& name, const PointMeasure& mu, const Constants& c, double M) {
    const CoveringPair cov = CoveringPair::support_of(mu);
    ChainParams cp;
    cp.k = c.k;
    cp.M = M;
    const DecompositionResult res = chain_trees(mu, cov, cp, c);
    const CoreReport rep = core_estimate_report(res, cov, c);
    record(rep.checks,
           {{"c_plus_packing", "c_orig_pack"},
            {"q_packing", "c_Q"},
            {"minkowski", "c_mink"},
            {"residual", "c_residual"},
            {"hausdorff_content", "c_hk"}},
           c, name);
}

void three_way_case(const std::string& name, const PointMeasure& mu, const Constants& c) {
    ThreeWayParams p;
    p.k = c.k;
    p.M = 1.0;
    p.epsilon = 0.1;
    const ThreeWay t = decompose_three_way(mu, p, c);
    record(t.checks, {{"mass_l", "c_three_way"}, {"mass_0", "c_three_way"}}, c, name);
}

void reifenberg_case(const std::string& name, std::size_t count, const Constants& c) {
    std::vector<Vec> centers;
    std::vector<double> radii, weights;
    const double r = 1.0 / double(count + 1);
    for (std::size_t j = 0; j < count; ++j) {
        centers.push_back({-1.0 + double(2 * j + 1) * r, 0.0});
        radii.push_back(r * (1.0 - 1e-9));
        weights.push_back(1.0);
    }
    DiscreteReifenbergParams p;
    p.k = 1;
    p.M = 1.0;
    p.a = 1.0;
    p.b = 1.0;
    p.run_chain = false;
    const DiscreteReifenbergReport rep = discrete_reifenberg(centers, radii, weights, p, c);
    record(rep.checks, {{"lower_packing", "c_reifenberg"}, {"upper_mass", "c_reifenberg"}}, c, name);
}

void ahlfors_case(const std::string& name, double spacing, const Constants& c) {
    const PointMeasure mu = flat(2, 1, spacing);
    const CoveringPair cov = CoveringPair::support_of(mu);
    UpperAhlforsParams p;
    p.k = 1;
    p.M = 1.0;
    p.b = 2.0;
    const UpperAhlforsReport rep = upper_ahlfors_check(mu, cov, p, c);
    record(rep.checks, {{"upper_ahlfors", "c_ahlfors"}}, c, name);
}

double frozen(double sup) {
    if (!(sup > 0.0)) return 1.0;
    return std::exp2(std::ceil(std::log2(2.0 * sup)));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"corona calibration suite"};
    std::string out;
    app.add_option("-o,--output", out, "JSON report path");
    CLI11_PARSE(app, argc, argv);

    try {
        const Constants c = make_constants(2, 1);
        for (double a : {0.001, 0.002, 0.005, 0.01, 0.02, 0.05})
            good_tree_case("sine " + std::to_string(a), graph_sample(1, GraphFunction::Sine, a, 1.0 / 256.0), c);
        for (double a : {0.05, 0.2})
            good_tree_case("parabola " + std::to_string(a), graph_sample(1, GraphFunction::Parabola, a, 1.0 / 256.0),
                           c);
        good_tree_case("flat", flat(2, 1, 1.0 / 256.0), c);

        chain_case("chain sine 0.05", graph_sample(1, GraphFunction::Sine, 0.05, 1.0 / 256.0), c, 1.0);
        chain_case("chain parabola 0.2", graph_sample(1, GraphFunction::Parabola, 0.2, 1.0 / 256.0), c, 1.0);
        chain_case("chain koch 0.1", koch_measure(koch(std::vector<double>(6, 0.1), 6)), c, 1.0);
        chain_case("chain plane+diracs", plane_plus_diracs(2, 1, {1000.0}, 1.0 / 256.0), c, 1.0);
        chain_case("chain noise", graph_with_noise(1, GraphFunction::Sine, 0.05, 1.0 / 256.0, 50, 0.05, 3), c, 1.0);

        three_way_case("three-way sine", graph_sample(1, GraphFunction::Sine, 0.05, 1.0 / 256.0), c);
        three_way_case("three-way plane+diracs", plane_plus_diracs(2, 1, {1000.0}, 1.0 / 128.0), c);
        three_way_case("three-way noise", graph_with_noise(1, GraphFunction::Abs, 0.3, 1.0 / 256.0, 100, 0.2, 5), c);

        for (std::size_t count : {100, 1000, 10000}) reifenberg_case("segment balls " + std::to_string(count), count, c);
        for (double h : {1.0 / 256.0, 1.0 / 1024.0}) ahlfors_case("flat ahlfors " + std::to_string(h), h, c);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }

    json summary = json::object();
    for (const auto& [name, n] : needs) {
        summary[name] = {{"sup", n.value}, {"at", n.where}, {"frozen", frozen(n.value)}};
        std::cout << name << ": sup " << n.value << " at " << n.where << ", frozen " << frozen(n.value) << "\n";
    }
    if (!out.empty()) std::ofstream(out) << json{{"constants", summary}, {"checks", rows}}.dump(2) << "\n";
    return 0;
}
