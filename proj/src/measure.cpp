#include "corona/measure.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>

#include <json.hpp>

namespace corona {

namespace {

constexpr std::uint64_t kPrimes[] = {73856093ULL,   19349663ULL,   83492791ULL,  2654435761ULL,
                                     2246822519ULL, 3266489917ULL, 668265263ULL, 374761393ULL};

double default_cell(std::size_t n, const std::vector<double>& coords) {
    const std::size_t count = n == 0 ? 0 : coords.size() / n;
    if (count == 0) return 1.0;
    double extent = 0.0;
    for (std::size_t d = 0; d < n; ++d) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (std::size_t i = 0; i < count; ++i) {
            lo = std::min(lo, coords[i * n + d]);
            hi = std::max(hi, coords[i * n + d]);
        }
        extent = std::max(extent, hi - lo);
    }
    if (extent <= 0.0) return 1.0;
    return 2.0 * extent / std::max(1.0, std::pow(double(count), 1.0 / double(n)));
}

}  // namespace

PointSet::PointSet(std::size_t n, std::vector<double> coords, double cell)
    : n_(n), coords_(std::move(coords)) {
    if (n_ == 0) throw DimensionMismatch("point set needs ambient dimension >= 1");
    if (coords_.size() % n_ != 0) throw DimensionMismatch("coordinate count is not a multiple of n");
    cell_ = cell > 0.0 ? cell : default_cell(n_, coords_);
    for (std::size_t i = 0; i < size(); ++i) bucket(i);
}

std::uint64_t PointSet::key_of(const std::int64_t* idx) const {
    std::uint64_t h = 1469598103934665603ULL;
    for (std::size_t d = 0; d < n_; ++d)
        h = (h ^ (static_cast<std::uint64_t>(idx[d]) * kPrimes[d % 8])) * 1099511628211ULL;
    return h;
}

void PointSet::bucket(std::size_t i) {
    std::int64_t idx[16];
    std::vector<std::int64_t> big;
    std::int64_t* p = idx;
    if (n_ > 16) {
        big.resize(n_);
        p = big.data();
    }
    for (std::size_t d = 0; d < n_; ++d)
        p[d] = static_cast<std::int64_t>(std::floor(coords_[i * n_ + d] / cell_));
    grid_[key_of(p)].push_back(static_cast<std::uint32_t>(i));
}

std::size_t PointSet::insert(VecView p) {
    require_dim(p.size(), n_, "PointSet::insert");
    coords_.insert(coords_.end(), p.begin(), p.end());
    const std::size_t i = size() - 1;
    bucket(i);
    return i;
}

std::vector<std::size_t> PointSet::query_bruteforce(VecView c, double r) const {
    std::vector<std::size_t> out;
    const double r2 = r * r;
    for (std::size_t i = 0; i < size(); ++i)
        if (dist_sq(point(i), c) < r2) out.push_back(i);
    return out;
}

void PointSet::query(VecView c, double r, std::vector<std::size_t>& out) const {
    out.clear();
    if (size() == 0 || !(r > 0.0)) return;
    require_dim(c.size(), n_, "PointSet::query");
    const double pad = r * (1.0 + 1e-12) + 1e-300;
    std::vector<std::int64_t> lo(n_), hi(n_), cur(n_);
    double cells = 1.0;
    for (std::size_t d = 0; d < n_; ++d) {
        const double a = std::floor((c[d] - pad) / cell_), b = std::floor((c[d] + pad) / cell_);
        cells *= (b - a + 1.0);
        if (!(cells <= double(size())) || !(cells <= double(grid_.size())) || !std::isfinite(cells)) {
            out = query_bruteforce(c, r);
            return;
        }
        lo[d] = static_cast<std::int64_t>(a);
        hi[d] = static_cast<std::int64_t>(b);
    }
    const double r2 = r * r;
    cur = lo;
    for (;;) {
        auto it = grid_.find(key_of(cur.data()));
        if (it != grid_.end())
            for (std::uint32_t i : it->second)
                if (dist_sq(point(i), c) < r2) out.push_back(i);
        std::size_t d = 0;
        while (d < n_ && cur[d] == hi[d]) {
            cur[d] = lo[d];
            ++d;
        }
        if (d == n_) break;
        ++cur[d];
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
}

std::vector<std::size_t> PointSet::query(VecView c, double r) const {
    std::vector<std::size_t> out;
    query(c, r, out);
    return out;
}

bool PointSet::any_within(VecView c, double r) const {
    return first_within(c, r).has_value();
}

std::optional<std::size_t> PointSet::first_within(VecView c, double r) const {
    std::vector<std::size_t> out;
    query(c, r, out);
    if (out.empty()) return std::nullopt;
    return out.front();
}

double PointSet::nearest_distance(VecView c) const {
    if (size() == 0) return std::numeric_limits<double>::infinity();
    std::vector<std::size_t> out;
    for (double r = cell_; r < 1e300; r *= 4.0) {
        query(c, r, out);
        if (!out.empty()) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t i : out) best = std::min(best, dist_sq(point(i), c));
            return std::sqrt(best);
        }
        if (out.empty() && r > 1e12 * cell_) break;
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < size(); ++i) best = std::min(best, dist_sq(point(i), c));
    return std::sqrt(best);
}

PointMeasure::PointMeasure(std::size_t n, std::vector<double> coords, std::vector<double> weights,
                           std::vector<std::string> labels, double cell)
    : points_(n, std::move(coords), cell), weights_(std::move(weights)), labels_(std::move(labels)) {
    if (points_.size() != weights_.size())
        throw DimensionMismatch("atom and weight counts differ");
    if (!labels_.empty() && labels_.size() != weights_.size())
        throw DimensionMismatch("label count differs from atom count");
    for (double w : weights_)
        if (!(w >= 0.0) || !std::isfinite(w)) throw InputError("atom weights must be finite and nonnegative");
    for (double x : points_.coords())
        if (!std::isfinite(x)) throw InputError("atom coordinates must be finite");
}

double PointMeasure::total_mass() const {
    double s = 0.0;
    for (double w : weights_) s += w;
    return s;
}

std::vector<std::size_t> PointMeasure::ball_indices(const Ball& b) const {
    if (empty()) return {};
    require_dim(b.dim(), dim(), "ball query");
    return points_.query(b.center, b.radius);
}

double PointMeasure::mass_of(const std::vector<std::size_t>& indices) const {
    double s = 0.0;
    for (std::size_t i : indices) s += weights_[i];
    return s;
}

double PointMeasure::ball_mass(const Ball& b) const {
    return mass_of(ball_indices(b));
}

double PointMeasure::ball_mass_bruteforce(const Ball& b) const {
    if (empty()) return 0.0;
    return mass_of(points_.query_bruteforce(b.center, b.radius));
}

PointMeasure PointMeasure::restrict(const std::vector<std::size_t>& indices) const {
    std::vector<double> coords, w;
    std::vector<std::string> labels;
    coords.reserve(indices.size() * dim());
    for (std::size_t i : indices) {
        const VecView p = point(i);
        coords.insert(coords.end(), p.begin(), p.end());
        w.push_back(weights_[i]);
        if (!labels_.empty()) labels.push_back(labels_[i]);
    }
    return PointMeasure(dim(), std::move(coords), std::move(w), std::move(labels));
}

PointMeasure PointMeasure::restrict(const std::function<bool(std::size_t)>& keep) const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < size(); ++i)
        if (keep(i)) idx.push_back(i);
    return restrict(idx);
}

void MeasureBuilder::add(VecView p, double w, std::string label) {
    require_dim(p.size(), n_, "MeasureBuilder::add");
    coords_.insert(coords_.end(), p.begin(), p.end());
    weights_.push_back(w);
    if (!label.empty()) labelled_ = true;
    labels_.push_back(std::move(label));
}

void MeasureBuilder::append(const PointMeasure& mu) {
    for (std::size_t i = 0; i < mu.size(); ++i)
        add(mu.point(i), mu.weight(i), mu.labels().empty() ? std::string{} : mu.labels()[i]);
}

PointMeasure MeasureBuilder::build(double cell) && {
    if (!labelled_) labels_.clear();
    return PointMeasure(n_, std::move(coords_), std::move(weights_), std::move(labels_), cell);
}

double ball_mass(const PointMeasure& mu, const Ball& b) { return mu.ball_mass(b); }

Vec center_of_mass(const PointMeasure& mu, const Ball& b) {
    const auto idx = mu.ball_indices(b);
    double m = 0.0;
    Vec c(mu.dim(), 0.0);
    for (std::size_t i : idx) {
        m += mu.weight(i);
        axpy(mu.weight(i), mu.point(i), c);
    }
    if (!(m > 0.0)) throw ZeroMassError("center of mass of a ball with zero mass");
    for (double& x : c) x /= m;
    return c;
}

PointMeasure rescale(const PointMeasure& mu, VecView x, double r, int k) {
    if (!(r > 0.0)) throw PreconditionError("rescale needs r > 0");
    require_dim(x.size(), mu.dim(), "rescale");
    std::vector<double> coords;
    std::vector<double> w;
    coords.reserve(mu.size() * mu.dim());
    const double f = std::pow(r, -k);
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const VecView p = mu.point(i);
        for (std::size_t d = 0; d < mu.dim(); ++d) coords.push_back((p[d] - x[d]) / r);
        w.push_back(mu.weight(i) * f);
    }
    return PointMeasure(mu.dim(), std::move(coords), std::move(w), mu.labels());
}

double min_positive_spacing(const PointMeasure& mu) {
    const PointSet& ps = mu.points();
    if (ps.size() < 2) return std::numeric_limits<double>::infinity();
    std::vector<std::size_t> out;
    double radius = ps.cell();
    for (int round = 0; round < 64; ++round) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < ps.size(); ++i) {
            ps.query(ps.point(i), radius, out);
            for (std::size_t j : out) {
                if (j == i) continue;
                const double d = dist(ps.point(i), ps.point(j));
                if (d > 0.0) best = std::min(best, d);
            }
        }
        if (std::isfinite(best)) return best;
        radius *= 4.0;
    }
    return std::numeric_limits<double>::infinity();
}

CoveringPair::CoveringPair(std::size_t n, std::vector<double> centers, std::vector<double> radii,
                           double max_radius)
    : centers_(n, std::move(centers)), radii_(std::move(radii)), max_radius_(max_radius) {
    if (centers_.size() != radii_.size()) throw DimensionMismatch("center and radius counts differ");
    std::vector<double> plus_coords;
    for (std::size_t i = 0; i < radii_.size(); ++i) {
        if (!(radii_[i] >= 0.0)) throw InputError("covering radii must be nonnegative");
        if (radii_[i] > max_radius_ * (1.0 + tolerances().geometric))
            throw InputError("covering radius exceeds the configured maximum");
        if (radii_[i] > 0.0) {
            plus_.push_back(i);
            const VecView c = centers_.point(i);
            plus_coords.insert(plus_coords.end(), c.begin(), c.end());
            plus_max_ = std::max(plus_max_, radii_[i]);
        }
    }
    plus_set_ = PointSet(n, std::move(plus_coords), plus_max_ > 0.0 ? plus_max_ : 0.0);
}

CoveringPair CoveringPair::support_of(const PointMeasure& mu) {
    return CoveringPair(mu.dim(), mu.points().coords(), std::vector<double>(mu.size(), 0.0));
}

void CoveringPair::check_covers(const PointMeasure& mu) const {
    require_dim(mu.dim(), dim(), "covering pair");
    const double tol = tolerances().geometric;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        if (mu.weight(i) <= 0.0) continue;
        if (!centers_.any_within(mu.point(i), tol))
            throw PreconditionError("covering pair misses atom " + std::to_string(i) + " of the measure");
    }
}

std::optional<std::size_t> CoveringPair::hitting_original_ball(VecView x, double r, double rho) const {
    if (plus_.empty()) return std::nullopt;
    const double upper = r / rho;
    if (plus_max_ <= r) return std::nullopt;
    const double reach = std::min(upper, plus_max_) + 2.0 * r;
    std::vector<std::size_t> cand;
    plus_set_.query(x, reach, cand);
    for (std::size_t j : cand) {
        const std::size_t i = plus_[j];
        const double ry = radii_[i];
        if (!(ry > r && ry <= upper)) continue;
        if (dist(x, centers_.point(i)) < ry + 2.0 * r) return i;
    }
    return std::nullopt;
}

double CoveringPair::radius_at(VecView x) const {
    auto i = centers_.first_within(x, tolerances().geometric);
    return i ? radii_[*i] : 0.0;
}

double packing_number(const PackingMeasure& pm) {
    double s = 0.0;
    for (double w : pm.hausdorff_weights) s += w;
    for (double r : pm.dirac_radii) s += std::pow(r, pm.k);
    return s;
}

double minkowski_volume(const PointSet& samples, double r, const Ball& domain, double grid_step) {
    if (!(grid_step > 0.0) || grid_step > r / 4.0 * (1.0 + 1e-12))
        throw PreconditionError("minkowski_volume: grid step must be at most r/4");
    if (samples.size() == 0) return 0.0;
    const std::size_t n = domain.dim();
    const long m = static_cast<long>(std::ceil(2.0 * domain.radius / grid_step));
    std::vector<long> idx(n, 0);
    Vec c(n);
    long count = 0;
    for (;;) {
        for (std::size_t d = 0; d < n; ++d)
            c[d] = domain.center[d] - domain.radius + (idx[d] + 0.5) * grid_step;
        if (in_ball(c, domain) && samples.any_within(c, r)) ++count;
        std::size_t d = 0;
        while (d < n && ++idx[d] == m) idx[d++] = 0;
        if (d == n) break;
    }
    return double(count) * std::pow(grid_step, double(n));
}

double minkowski_volume(const std::vector<Vec>& samples, double r, const Ball& domain, double grid_step) {
    std::vector<double> coords;
    for (const Vec& s : samples) coords.insert(coords.end(), s.begin(), s.end());
    if (samples.empty()) {
        if (!(grid_step > 0.0) || grid_step > r / 4.0 * (1.0 + 1e-12))
            throw PreconditionError("minkowski_volume: grid step must be at most r/4");
        return 0.0;
    }
    return minkowski_volume(PointSet(domain.dim(), std::move(coords), r), r, domain, grid_step);
}

std::string format_number(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
        out.push_back(cell);
    }
    return out;
}

double parse_double(const std::string& s, std::size_t line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw InputError("line " + std::to_string(line) + ": cannot parse number '" + s + "'");
    }
}

}  // namespace

PointMeasure read_measure_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw InputError("empty CSV input");
    const auto header = split_csv(line);
    if (header.size() < 2 || header.back() != "weight")
        throw InputError("CSV header must be x1,...,xn,weight");
    const std::size_t n = header.size() - 1;
    for (std::size_t d = 0; d < n; ++d)
        if (header[d] != "x" + std::to_string(d + 1)) throw InputError("CSV header must be x1,...,xn,weight");
    MeasureBuilder b(n);
    std::size_t lineno = 1;
    Vec p(n);
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto cells = split_csv(line);
        if (cells.size() != n + 1)
            throw InputError("line " + std::to_string(lineno) + ": expected " + std::to_string(n + 1) + " fields");
        for (std::size_t d = 0; d < n; ++d) p[d] = parse_double(cells[d], lineno);
        b.add(p, parse_double(cells[n], lineno));
    }
    return std::move(b).build();
}

PointMeasure read_measure_json(std::istream& in) {
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw InputError(std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_array()) throw InputError("JSON measure must be an array of atoms");
    if (j.empty()) throw InputError("JSON measure has no atoms; dimension unknown");
    std::size_t n = 0;
    std::unique_ptr<MeasureBuilder> b;
    for (const auto& atom : j) {
        if (!atom.is_object() || !atom.contains("position") || !atom.contains("weight"))
            throw InputError("each atom needs position and weight");
        const auto& pos = atom["position"];
        if (!pos.is_array() || pos.empty()) throw InputError("atom position must be a nonempty array");
        if (!b) {
            n = pos.size();
            b = std::make_unique<MeasureBuilder>(n);
        }
        if (pos.size() != n) throw InputError("atoms have inconsistent dimensions");
        Vec p;
        for (const auto& v : pos) {
            if (!v.is_number()) throw InputError("atom coordinates must be numbers");
            p.push_back(v.get<double>());
        }
        if (!atom["weight"].is_number()) throw InputError("atom weight must be a number");
        std::string label = atom.contains("label") && atom["label"].is_string() ? atom["label"].get<std::string>() : "";
        b->add(p, atom["weight"].get<double>(), std::move(label));
    }
    return std::move(*b).build();
}

PointMeasure read_measure_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    const bool json = path.size() >= 5 && path.substr(path.size() - 5) == ".json";
    return json ? read_measure_json(in) : read_measure_csv(in);
}

void write_measure_csv(std::ostream& out, const PointMeasure& mu) {
    for (std::size_t d = 0; d < mu.dim(); ++d) out << 'x' << (d + 1) << ',';
    out << "weight\n";
    for (std::size_t i = 0; i < mu.size(); ++i) {
        for (double x : mu.point(i)) out << format_number(x) << ',';
        out << format_number(mu.weight(i)) << '\n';
    }
}

void write_measure_json(std::ostream& out, const PointMeasure& mu) {
    // Hand-rolled so numbers keep the fixed 17-digit form.
    out << "[";
    for (std::size_t i = 0; i < mu.size(); ++i) {
        out << (i ? ",\n " : "\n ") << "{\"position\":[";
        const VecView p = mu.point(i);
        for (std::size_t d = 0; d < p.size(); ++d) out << (d ? "," : "") << format_number(p[d]);
        out << "],\"weight\":" << format_number(mu.weight(i));
        if (!mu.labels().empty() && !mu.labels()[i].empty())
            out << ",\"label\":" << nlohmann::json(mu.labels()[i]).dump();
        out << "}";
    }
    out << "\n]\n";
}

void write_measure_file(const std::string& path, const PointMeasure& mu) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    const bool json = path.size() >= 5 && path.substr(path.size() - 5) == ".json";
    if (json)
        write_measure_json(out, mu);
    else
        write_measure_csv(out, mu);
}

}  // namespace corona
