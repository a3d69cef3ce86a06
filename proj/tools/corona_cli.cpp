#include <chrono>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "corona/beta.hpp"
#include "corona/chain.hpp"
#include "corona/density.hpp"
#include "corona/fixtures.hpp"
#include "corona/oracle.hpp"
#include "corona/parallel.hpp"

using namespace corona;
using nlohmann::json;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitBound = 2;
constexpr int kExitInput = 3;

struct RunConfig {
    std::string input;
    std::string output;
    std::string constants;
    std::string profiles;
    std::string covering;
    int k = 1;
    double M = 1.0;
    double rho = 0.0;
    double m = 0.0;
    double delta = -1.0;
    double eps_bar = 0.0;
    double gamma = std::numeric_limits<double>::infinity();
    double a = 0.25;
    double b = std::numeric_limits<double>::infinity();
    double epsilon = 0.1;
    unsigned long long seed = 1;
    int jobs = 1;

    // generate
    std::string spec;
    std::string kind = "flat";
    std::size_t n = 2;
    std::vector<double> kappa;
    int depth = 0;
    double spacing = 1.0 / 64.0;
    double radius = 1.0;
    std::size_t per_sphere = 32;
    std::size_t per_level = 256;
    double line_density = 2.0;
    std::vector<double> dirac_weights;
    std::string function = "flat";
    double amplitude = 0.0;
    std::size_t noise_count = 0;
    double noise_mass = 0.0;

    // beta
    std::size_t stride = 1;
    int alpha_min = std::numeric_limits<int>::min();
    int alpha_max = 0;

    // decompose
    bool main_mode = false;
    bool include_trees = false;
    int max_stages = 64;

    // density
    std::string report = "three-way";
    double s_lo = 0.0;
    double s_hi = 0.0;
    int max_iters = 8;
    std::size_t sample_count = 100;
    int j_min = 1;
    int j_max = 3;

    // verify
    std::string check = "all";
    double r = 1.0;
    double step = 0.0;
    double resolution = 1.0 / 720.0;
};

using FieldRef = std::variant<std::string*, int*, double*, unsigned long long*, std::size_t*, bool*, std::vector<double>*>;

struct Field {
    std::string name;
    FieldRef ref;
    std::string help;
};

std::vector<Field> fields_of(RunConfig& c) {
    return {
        {"input", &c.input, "input measure (CSV or .json)"},
        {"output", &c.output, "output path; stdout when empty"},
        {"constants", &c.constants, "flat JSON object overriding constants"},
        {"profiles", &c.profiles, "beta: BetaProfile JSON output path"},
        {"covering", &c.covering, "density: covering CSV x1..xn,radius (or balls x1..xn,radius,weight)"},
        {"k", &c.k, "dimension k"},
        {"M", &c.M, "Dini budget M"},
        {"rho", &c.rho, "scale ratio rho; 0 picks the largest admissible dyadic value"},
        {"m", &c.m, "low-mass threshold m; 0 uses m0(n, rho) M"},
        {"delta", &c.delta, "good-tree delta; negative measures it"},
        {"eps-bar", &c.eps_bar, "truncation threshold eps_bar"},
        {"gamma", &c.gamma, "mass budget Gamma for hypothesis violations"},
        {"a", &c.a, "lower density or weight bound a"},
        {"b", &c.b, "upper density or weight bound b"},
        {"epsilon", &c.epsilon, "epsilon for the three-way split and cover target"},
        {"seed", &c.seed, "random seed"},
        {"jobs", &c.jobs, "worker threads"},
        {"spec", &c.spec, "generate: FixtureSpec JSON path"},
        {"kind", &c.kind, "generate: koch, lebesgue, flat, packed_spheres, plane_plus_diracs, nested, graph, graph_noise"},
        {"n", &c.n, "generate: ambient dimension"},
        {"kappa", &c.kappa, "generate: Koch heights"},
        {"depth", &c.depth, "generate: Koch depth or nested levels"},
        {"spacing", &c.spacing, "generate: lattice spacing"},
        {"radius", &c.radius, "generate: support radius; verify: domain radius"},
        {"per-sphere", &c.per_sphere, "generate: samples per sphere"},
        {"per-level", &c.per_level, "generate: nested atoms per level"},
        {"line-density", &c.line_density, "generate: nested line density at level 0"},
        {"dirac-weights", &c.dirac_weights, "generate: Dirac weights"},
        {"function", &c.function, "generate: flat, sine, parabola, abs"},
        {"amplitude", &c.amplitude, "generate: graph amplitude"},
        {"noise-count", &c.noise_count, "generate: noise atoms"},
        {"noise-mass", &c.noise_mass, "generate: total noise mass"},
        {"stride", &c.stride, "beta/verify: every stride-th atom is a center"},
        {"alpha-min", &c.alpha_min, "beta: smallest alpha; default from the atom spacing"},
        {"alpha-max", &c.alpha_max, "beta: largest alpha"},
        {"main-mode", &c.main_mode, "decompose: excise atoms whose Dini sum exceeds M first"},
        {"include-trees", &c.include_trees, "decompose: embed every tree record"},
        {"max-stages", &c.max_stages, "decompose: stage cap"},
        {"report", &c.report, "density: proxies, uniform, intermediary, reifenberg, ahlfors, three-way, cover"},
        {"s-lo", &c.s_lo, "density: smallest proxy radius; 0 for the default window"},
        {"s-hi", &c.s_hi, "density: largest proxy radius"},
        {"max-iters", &c.max_iters, "density: cover iterations"},
        {"sample-count", &c.sample_count, "density: Ahlfors probes"},
        {"j-min", &c.j_min, "density: smallest j with r = 2^-j"},
        {"j-max", &c.j_max, "density: largest j"},
        {"check", &c.check, "verify: beta, minkowski or all"},
        {"r", &c.r, "verify: ball or tube radius"},
        {"step", &c.step, "verify: grid step; 0 uses r/4"},
        {"resolution", &c.resolution, "verify: beta oracle grid resolution"},
    };
}

const std::map<std::string, std::vector<std::string>> kCommandFields = {
    {"generate", {"output", "spec", "kind", "n", "k", "kappa", "depth", "spacing", "radius", "rho", "per-sphere",
                  "per-level", "line-density", "dirac-weights", "function", "amplitude", "noise-count", "noise-mass", "seed"}},
    {"beta", {"input", "output", "profiles", "k", "eps-bar", "stride", "alpha-min", "alpha-max", "jobs"}},
    {"decompose", {"input", "output", "constants", "k", "M", "rho", "m", "delta", "eps-bar", "gamma", "main-mode",
                   "include-trees", "max-stages", "jobs"}},
    {"density", {"input", "output", "constants", "covering", "k", "M", "eps-bar", "gamma", "a", "b", "epsilon", "seed",
                 "report", "s-lo", "s-hi", "max-iters", "sample-count", "j-min", "j-max", "rho", "jobs"}},
    {"verify", {"input", "output", "k", "check", "r", "step", "radius", "stride", "resolution"}},
};

json load_json(const std::string& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw InputError(std::string("cannot open ") + what + " " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError(std::string(what) + " " + path + ": " + e.what());
    }
}

void assign_from_json(const Field& f, const json& v) {
    auto fail = [&](const char* type) { throw InputError("config field '" + f.name + "' must be " + type); };
    std::visit(
        [&](auto* p) {
            using T = std::remove_pointer_t<decltype(p)>;
            if constexpr (std::is_same_v<T, std::string>) {
                if (!v.is_string()) fail("a string");
                *p = v.get<std::string>();
            } else if constexpr (std::is_same_v<T, bool>) {
                if (!v.is_boolean()) fail("a boolean");
                *p = v.get<bool>();
            } else if constexpr (std::is_same_v<T, std::vector<double>>) {
                if (v.is_number()) {
                    *p = {v.get<double>()};
                    return;
                }
                if (!v.is_array()) fail("a number or an array of numbers");
                p->clear();
                for (const auto& e : v) {
                    if (!e.is_number()) fail("an array of numbers");
                    p->push_back(e.get<double>());
                }
            } else if constexpr (std::is_integral_v<T>) {
                if (!v.is_number_integer()) fail("an integer");
                if (std::is_unsigned_v<T> && v.get<long long>() < 0) fail("non-negative");
                *p = v.get<T>();
            } else {
                if (v.is_string() && (v == "inf" || v == "infinity")) {
                    *p = std::numeric_limits<double>::infinity();
                    return;
                }
                if (!v.is_number()) fail("a number");
                *p = v.get<double>();
            }
        },
        f.ref);
}

json field_value(const Field& f) {
    return std::visit(
        [](auto* p) -> json {
            using T = std::remove_pointer_t<decltype(p)>;
            if constexpr (std::is_floating_point_v<T>) {
                if (std::isinf(*p)) return *p > 0 ? "inf" : "-inf";
                return *p;
            } else {
                return *p;
            }
        },
        f.ref);
}

CLI::Option* register_field(CLI::App* app, Field& f) {
    return std::visit([&](auto* p) { return app->add_option("--" + f.name, *p, f.help); }, f.ref);
}

json echo_config(const std::string& command, RunConfig& c) {
    json out = json::object();
    auto fs = fields_of(c);
    for (const auto& name : kCommandFields.at(command))
        for (const Field& f : fs)
            if (f.name == name) out[name] = field_value(f);
    return out;
}

void write_output(const RunConfig& c, const std::string& text, double seconds) {
    if (c.output.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(c.output);
    if (!out) throw InputError("cannot write " + c.output);
    out << text;
    std::ofstream meta(c.output + ".meta.json");
    const std::time_t now = std::time(nullptr);
    char stamp[64];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    meta << json{{"written_at", stamp}, {"wall_seconds", seconds}}.dump(2) << '\n';
}

Constants constants_for(const RunConfig& c, std::size_t n) {
    json over = json::object();
    if (!c.constants.empty()) over = load_json(c.constants, "constants file");
    return make_constants(static_cast<int>(n), c.k, over);
}

PointMeasure read_input(const RunConfig& c) {
    if (c.input.empty()) throw InputError("--input is required");
    return read_measure_file(c.input);
}

// Numeric CSV with a header row; returns rows of doubles.
std::vector<std::vector<double>> read_table(const std::string& path, std::vector<std::string>& header) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw InputError(path + ": empty file");
    header.clear();
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
            header.push_back(cell);
        }
    }
    std::vector<std::vector<double>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
                while (used < cell.size() && (cell[used] == ' ' || cell[used] == '\r')) ++used;
                if (used != cell.size()) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw InputError(path + ": line " + std::to_string(lineno) + ", field " +
                                 std::to_string(row.size() + 1) + ": cannot parse '" + cell + "'");
            }
        }
        if (row.size() != header.size())
            throw InputError(path + ": line " + std::to_string(lineno) + " has " + std::to_string(row.size()) +
                             " fields, header has " + std::to_string(header.size()));
        rows.push_back(std::move(row));
    }
    return rows;
}

bool all_pass(const std::vector<BoundCheck>& cs) {
    return std::all_of(cs.begin(), cs.end(), [](const BoundCheck& b) { return b.pass; });
}

std::string first_failure(const std::vector<BoundCheck>& cs) {
    for (const BoundCheck& b : cs)
        if (!b.pass)
            return b.name + ": measured " + format_number(b.measured) + " > bound " + format_number(b.claimed_bound);
    return "";
}

struct Outcome {
    json doc;
    std::string csv;  // beta writes CSV instead of JSON
    bool pass = true;
    std::string failure;
};

Outcome run_generate(const RunConfig& c, const std::set<std::string>& given) {
    FixtureSpec s;
    if (!c.spec.empty()) s = fixture_spec_from_json(load_json(c.spec, "fixture spec"));
    auto set_if = [&](const char* name, auto& dst, const auto& src) {
        if (c.spec.empty() || given.count(name)) dst = src;
    };
    set_if("kind", s.kind, c.kind);
    set_if("n", s.n, c.n);
    set_if("k", s.k, c.k);
    set_if("kappa", s.kappa, c.kappa);
    set_if("depth", s.depth, c.depth);
    set_if("spacing", s.spacing, c.spacing);
    set_if("radius", s.radius, c.radius);
    if (c.spec.empty() ? c.rho > 0.0 : given.count("rho") > 0) s.rho = c.rho;
    set_if("per-sphere", s.per_sphere, c.per_sphere);
    set_if("per-level", s.per_level, c.per_level);
    set_if("line-density", s.density, c.line_density);
    set_if("dirac-weights", s.dirac_weights, c.dirac_weights);
    set_if("function", s.function, c.function);
    set_if("amplitude", s.amplitude, c.amplitude);
    set_if("noise-count", s.noise_count, c.noise_count);
    set_if("noise-mass", s.noise_mass, c.noise_mass);
    set_if("seed", s.seed, c.seed);
    const PointMeasure mu = generate(s);
    Outcome o;
    std::ostringstream out;
    const bool as_json = c.output.size() >= 5 && c.output.substr(c.output.size() - 5) == ".json";
    if (as_json)
        write_measure_json(out, mu);
    else
        write_measure_csv(out, mu);
    o.csv = out.str();
    return o;
}

Outcome run_beta(const RunConfig& c) {
    const PointMeasure mu = read_input(c);
    if (c.stride == 0) throw InputError("--stride must be positive");
    const int amin = c.alpha_min == std::numeric_limits<int>::min() ? alpha_floor_for(mu) : c.alpha_min;
    if (amin > c.alpha_max) throw InputError("--alpha-min exceeds --alpha-max");
    std::vector<std::size_t> centers;
    for (std::size_t i = 0; i < mu.size(); i += c.stride) centers.push_back(i);
    std::vector<BetaProfile> profiles(centers.size());
    parallel_for(centers.size(), c.jobs, [&](std::size_t j) {
        profiles[j] = beta_profile(mu, mu.point(centers[j]), c.k, c.eps_bar, amin, c.alpha_max);
    });
    Outcome o;
    std::ostringstream csv;
    csv << "center_index,alpha,r,beta_sq,mass\n";
    for (std::size_t j = 0; j < centers.size(); ++j)
        for (const BetaEntry& e : profiles[j].entries)
            csv << centers[j] << ',' << e.alpha << ',' << format_number(e.r) << ',' << format_number(e.beta_sq) << ','
                << format_number(e.mass) << '\n';
    o.csv = csv.str();
    if (!c.profiles.empty()) {
        json arr = json::array();
        for (std::size_t j = 0; j < centers.size(); ++j) {
            json p = to_json(profiles[j]);
            p["center_index"] = centers[j];
            arr.push_back(p);
        }
        std::ofstream out(c.profiles);
        if (!out) throw InputError("cannot write " + c.profiles);
        out << arr.dump(2) << '\n';
    }
    return o;
}

Outcome run_decompose(const RunConfig& c) {
    const PointMeasure mu = read_input(c);
    const Constants consts = constants_for(c, mu.dim());
    const CoveringPair cov = CoveringPair::support_of(mu);
    ChainParams p;
    p.k = c.k;
    p.M = c.M;
    p.rho = c.rho;
    p.m = c.m;
    p.delta = c.delta;
    p.eps_bar = c.eps_bar;
    p.gamma = c.gamma;
    p.main_mode = c.main_mode;
    p.max_stages = c.max_stages;
    p.jobs = c.jobs;
    const DecompositionResult res = chain_trees(mu, cov, p, consts);
    const CoreReport rep = core_estimate_report(res, cov, consts);
    Outcome o;
    o.doc["constants"] = consts.to_json();
    o.doc["decomposition"] = to_json(res, c.include_trees);
    o.doc["report"] = to_json(rep);
    o.pass = rep.all_pass();
    o.failure = first_failure(rep.checks);
    return o;
}

CoveringPair read_covering(const RunConfig& c, std::size_t n, std::vector<double>* weights) {
    if (c.covering.empty()) throw InputError("--covering is required for this report");
    std::vector<std::string> header;
    const auto rows = read_table(c.covering, header);
    const std::size_t extra = weights ? 2 : 1;
    if (header.size() != n + extra || header[n] != "radius" || (weights && header[n + 1] != "weight"))
        throw InputError(c.covering + ": header must be x1..x" + std::to_string(n) + ",radius" +
                         (weights ? ",weight" : ""));
    std::vector<double> coords, radii;
    for (const auto& row : rows) {
        coords.insert(coords.end(), row.begin(), row.begin() + static_cast<long>(n));
        radii.push_back(row[n]);
        if (weights) weights->push_back(row[n + 1]);
    }
    return CoveringPair(n, coords, radii, 1.0);
}

Outcome run_density(const RunConfig& c) {
    Outcome o;
    const std::string& rep = c.report;
    if (rep == "reifenberg") {
        if (c.input.empty() && c.covering.empty()) throw InputError("reifenberg needs --covering with radius,weight");
        std::vector<std::string> header;
        const auto rows = read_table(c.covering, header);
        if (header.size() < 3 || header[header.size() - 2] != "radius" || header.back() != "weight")
            throw InputError(c.covering + ": header must be x1..xn,radius,weight");
        const std::size_t n = header.size() - 2;
        std::vector<Vec> centers;
        std::vector<double> radii, weights;
        for (const auto& row : rows) {
            centers.emplace_back(row.begin(), row.begin() + static_cast<long>(n));
            radii.push_back(row[n]);
            weights.push_back(row[n + 1]);
        }
        const Constants consts = constants_for(c, n);
        DiscreteReifenbergParams p;
        p.k = c.k;
        p.M = c.M;
        p.eps_bar = c.eps_bar;
        p.a = c.a;
        p.b = c.b;
        p.jobs = c.jobs;
        const auto r = discrete_reifenberg(centers, radii, weights, p, consts);
        o.doc["constants"] = consts.to_json();
        o.doc["result"] = to_json(r);
        o.pass = r.all_pass();
        o.failure = first_failure(r.checks);
        return o;
    }
    const PointMeasure mu = read_input(c);
    const Constants consts = constants_for(c, mu.dim());
    o.doc["constants"] = consts.to_json();
    if (rep == "proxies") {
        auto [lo, hi] = default_density_window(mu);
        if (c.s_lo > 0.0) lo = c.s_lo;
        if (c.s_hi > 0.0) hi = c.s_hi;
        const auto est = density_proxies(mu, c.k, lo, hi, nullptr, c.jobs);
        o.doc["result"] = to_json(est);
        o.doc["result"]["gated_fraction"] = est.gated_fraction(mu, c.a, c.b);
    } else if (rep == "uniform") {
        const auto u = uniform_covering(read_covering(c, mu.dim(), nullptr));
        o.doc["result"] = to_json(u);
        o.pass = u.holds();
        o.failure = "uniform covering property scan found violations";
    } else if (rep == "intermediary") {
        const CoveringPair cov = read_covering(c, mu.dim(), nullptr);
        const UniformCovering u = uniform_covering(cov);
        // Greedy admissible subset of U(C)_+ in index order.
        std::vector<std::size_t> subset;
        for (std::size_t y : u.kept) {
            const double ry = cov.radius(y);
            if (!(ry > 0.0)) continue;
            if (mu.ball_mass(Ball{to_vec(cov.center(y)), ry}) < c.a * std::pow(ry, c.k)) continue;
            bool clear = true;
            for (std::size_t z : subset)
                if (dist(cov.center(y), cov.center(z)) < 2.0 * (ry + cov.radius(z))) clear = false;
            if (clear) subset.push_back(y);
        }
        const auto nu = intermediary_packing(mu, cov, subset, c.k, c.a);
        const auto r = intermediary_checks(mu, cov, subset, nu, c.a);
        o.doc["result"] = {{"packing", to_json(nu)}, {"checks", to_json(r)}};
        o.pass = r.all_pass();
        o.failure = first_failure(r.checks);
    } else if (rep == "ahlfors") {
        UpperAhlforsParams p;
        p.k = c.k;
        p.M = c.M;
        p.b = c.b;
        p.eps_bar = c.eps_bar;
        p.sample_count = c.sample_count;
        p.seed = c.seed;
        p.j_min = c.j_min;
        p.j_max = c.j_max;
        p.jobs = c.jobs;
        const CoveringPair cov = c.covering.empty() ? CoveringPair::support_of(mu) : read_covering(c, mu.dim(), nullptr);
        const auto r = upper_ahlfors_check(mu, cov, p, consts);
        o.doc["result"] = to_json(r);
        o.pass = r.all_pass();
        o.failure = first_failure(r.checks);
    } else if (rep == "three-way") {
        ThreeWayParams p;
        p.k = c.k;
        p.M = c.M;
        p.epsilon = c.epsilon;
        p.s_lo = c.s_lo;
        p.s_hi = c.s_hi;
        p.chain.eps_bar = c.eps_bar;
        p.chain.gamma = c.gamma;
        p.chain.rho = c.rho;
        p.jobs = c.jobs;
        const auto r = decompose_three_way(mu, p, consts);
        o.doc["result"] = to_json(r);
        o.pass = r.all_pass();
        o.failure = first_failure(r.checks);
    } else if (rep == "cover") {
        RectCoverParams p;
        p.k = c.k;
        p.epsilon = c.epsilon;
        p.max_iters = c.max_iters;
        p.a = c.a;
        p.b = c.b;
        p.s_lo = c.s_lo;
        p.s_hi = c.s_hi;
        p.jobs = c.jobs;
        const auto r = rectifiable_cover(mu, p, consts);
        o.doc["result"] = to_json(r);
        o.pass = r.gate_passed;
        o.failure = r.message;
    } else {
        throw InputError("unknown --report '" + rep + "'");
    }
    return o;
}

Outcome run_verify(RunConfig& c) {
    PointMeasure mu;
    if (c.input.empty()) {
        MeasureBuilder b(2);
        b.add(Vec{-1.0, 0.0}, 1.0);
        b.add(Vec{1.0, 0.0}, 1.0);
        b.add(Vec{0.0, 1.0}, 1.0);
        mu = std::move(b).build();
        if (c.r == 1.0) c.r = 2.0;
    } else {
        mu = read_input(c);
    }
    const double r = c.r;
    if (c.check != "all" && c.check != "beta" && c.check != "minkowski")
        throw InputError("unknown --check '" + c.check + "'");
    Outcome o;
    json checks = json::array();
    if (c.check == "all" || c.check == "beta") {
        if (mu.dim() > 3) throw InputError("beta oracle supports n <= 3");
        const Ball ball{Vec(mu.dim(), 0.0), r};
        const double eig = best_plane(mu, ball, c.k).beta_sq;
        const double orc = beta_oracle(mu, ball, c.k, c.resolution);
        const double rel = orc > 0.0 ? (orc - eig) / orc : std::abs(orc - eig);
        const bool pass = eig <= orc * (1.0 + 1e-9) + 1e-15 && rel <= 0.01;
        checks.push_back({{"name", "beta_eigen_vs_oracle"},
                          {"ball_radius", r},
                          {"eigen", eig},
                          {"oracle", orc},
                          {"relative_gap", rel},
                          {"tolerance", 0.01},
                          {"pass", pass}});
        if (!pass) {
            o.pass = false;
            o.failure = "beta_eigen_vs_oracle: relative gap " + format_number(rel) + " > 0.01";
        }
    }
    if (c.check == "all" || c.check == "minkowski") {
        std::vector<Vec> pts;
        for (std::size_t i = 0; i < mu.size(); i += std::max<std::size_t>(c.stride, 1)) pts.push_back(to_vec(mu.point(i)));
        const double step = c.step > 0.0 ? c.step : r / 4.0;
        const Ball dom{Vec(mu.dim(), 0.0), c.radius};
        const double fast = minkowski_volume(pts, r, dom, step);
        const double brute = grid_minkowski(pts, r, dom, step);
        const bool pass = std::abs(fast - brute) <= 1e-12 * std::max(1.0, brute);
        checks.push_back({{"name", "minkowski_index_vs_scan"},
                          {"r", r},
                          {"step", step},
                          {"indexed", fast},
                          {"scan", brute},
                          {"pass", pass}});
        if (!pass) {
            o.pass = false;
            o.failure = "minkowski_index_vs_scan: " + format_number(fast) + " != " + format_number(brute);
        }
    }
    o.doc["checks"] = checks;
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    const auto t0 = std::chrono::steady_clock::now();
    RunConfig cfg;
    auto fields = fields_of(cfg);
    std::string config_path;

    CLI::App app{"corona: beta numbers, corona decompositions and density reports on finite measures"};
    app.require_subcommand(1);
    std::map<std::string, std::map<std::string, CLI::Option*>> opts;
    for (const auto& [name, names] : kCommandFields) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "flat JSON config; command-line flags take precedence");
        for (const auto& fname : names)
            for (Field& f : fields)
                if (f.name == fname) {
                    CLI::Option* opt = f.name == "main-mode" || f.name == "include-trees"
                                           ? sub->add_flag("--" + f.name, *std::get<bool*>(f.ref), f.help)
                                           : register_field(sub, f);
                    opts[name][fname] = opt;
                }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitPass : kExitInput;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        std::set<std::string> given;
        for (const auto& [fname, opt] : opts[command])
            if (opt->count() > 0) given.insert(fname);
        if (!config_path.empty()) {
            const json file = load_json(config_path, "config file");
            if (!file.is_object()) throw InputError("config file must hold a flat JSON object");
            for (const auto& item : file.items()) {
                const Field* f = nullptr;
                for (const Field& g : fields)
                    if (g.name == item.key()) f = &g;
                if (!f) throw InputError("config file: unknown field '" + item.key() + "'");
                const auto& allowed = kCommandFields.at(command);
                if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) continue;
                if (given.count(item.key())) continue;
                assign_from_json(*f, item.value());
                given.insert(item.key());
            }
        }
        if (cfg.jobs < 1) throw InputError("--jobs must be at least 1");

        Outcome o;
        if (command == "generate")
            o = run_generate(cfg, given);
        else if (command == "beta")
            o = run_beta(cfg);
        else if (command == "decompose")
            o = run_decompose(cfg);
        else if (command == "density")
            o = run_density(cfg);
        else
            o = run_verify(cfg);

        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!o.csv.empty()) {
            write_output(cfg, o.csv, seconds);
        } else {
            json doc{{"command", command}, {"config", echo_config(command, cfg)}};
            for (auto& [key, v] : o.doc.items()) doc[key] = v;
            doc["all_pass"] = o.pass;
            write_output(cfg, doc.dump(2) + "\n", seconds);
        }
        if (!o.pass) {
            std::cerr << "bound failure: " << o.failure << '\n';
            return kExitBound;
        }
        return kExitPass;
    } catch (const BudgetExceeded& e) {
        std::cerr << "budget exceeded: " << e.what() << '\n';
        return kExitInput;
    } catch (const Error& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kExitInput;
    } catch (const json::exception& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kExitInput;
    }
}
