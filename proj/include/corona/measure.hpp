#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "corona/core.hpp"

namespace corona {

/// Points in R^n with uniform-grid bucketing. Ball queries return indices in
/// increasing order and agree exactly with a brute-force scan.
class PointSet {
public:
    PointSet() = default;
    PointSet(std::size_t n, std::vector<double> coords, double cell = 0.0);

    std::size_t dim() const { return n_; }
    std::size_t size() const { return n_ == 0 ? 0 : coords_.size() / n_; }
    VecView point(std::size_t i) const { return {coords_.data() + i * n_, n_}; }
    const std::vector<double>& coords() const { return coords_; }
    double cell() const { return cell_; }

    std::size_t insert(VecView p);

    /// Indices with |p - c| < r, ascending.
    void query(VecView c, double r, std::vector<std::size_t>& out) const;
    std::vector<std::size_t> query(VecView c, double r) const;
    std::vector<std::size_t> query_bruteforce(VecView c, double r) const;
    bool any_within(VecView c, double r) const;
    /// Lowest index within distance r, if any.
    std::optional<std::size_t> first_within(VecView c, double r) const;
    /// Distance to the nearest point (brute force beyond the local cells); +inf when empty.
    double nearest_distance(VecView c) const;

private:
    std::uint64_t key_of(const std::int64_t* cellidx) const;
    void bucket(std::size_t i);

    std::size_t n_ = 0;
    double cell_ = 1.0;
    std::vector<double> coords_;
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> grid_;
};

/// Finite weighted point measure. Immutable after construction.
class PointMeasure {
public:
    PointMeasure() = default;
    PointMeasure(std::size_t n, std::vector<double> coords, std::vector<double> weights,
                 std::vector<std::string> labels = {}, double cell = 0.0);

    std::size_t dim() const { return points_.dim(); }
    std::size_t size() const { return weights_.size(); }
    bool empty() const { return weights_.empty(); }
    VecView point(std::size_t i) const { return points_.point(i); }
    double weight(std::size_t i) const { return weights_[i]; }
    const std::vector<double>& weights() const { return weights_; }
    const std::vector<std::string>& labels() const { return labels_; }
    const PointSet& points() const { return points_; }
    double total_mass() const;

    std::vector<std::size_t> ball_indices(const Ball& b) const;
    double ball_mass(const Ball& b) const;
    double ball_mass_bruteforce(const Ball& b) const;
    double mass_of(const std::vector<std::size_t>& indices) const;

    /// mu restricted to the listed atoms (kept in the given order).
    PointMeasure restrict(const std::vector<std::size_t>& indices) const;
    PointMeasure restrict(const std::function<bool(std::size_t)>& keep) const;

private:
    PointSet points_;
    std::vector<double> weights_;
    std::vector<std::string> labels_;
};

/// Accumulates atoms, then freezes them into a PointMeasure.
class MeasureBuilder {
public:
    explicit MeasureBuilder(std::size_t n) : n_(n) {}
    void add(VecView p, double w, std::string label = {});
    void append(const PointMeasure& mu);
    PointMeasure build(double cell = 0.0) &&;
    std::size_t size() const { return weights_.size(); }

private:
    std::size_t n_;
    std::vector<double> coords_;
    std::vector<double> weights_;
    std::vector<std::string> labels_;
    bool labelled_ = false;
};

double ball_mass(const PointMeasure& mu, const Ball& b);

/// Weighted mean of the atoms in the ball. Throws ZeroMassError on an empty ball.
Vec center_of_mass(const PointMeasure& mu, const Ball& b);

/// mu_{x,r}(A) = r^{-k} mu(x + rA).
PointMeasure rescale(const PointMeasure& mu, VecView x, double r, int k);

/// Smallest positive distance between two atoms; +inf for fewer than two distinct atoms.
double min_positive_spacing(const PointMeasure& mu);

/// Center set C = C_+ ∪ C_0 with radius function r_x.
class CoveringPair {
public:
    CoveringPair() = default;
    CoveringPair(std::size_t n, std::vector<double> centers, std::vector<double> radii,
                 double max_radius = 1.0);

    /// C = C_0 = atoms of mu.
    static CoveringPair support_of(const PointMeasure& mu);
    /// Checks that every atom of positive weight lies within tolerance of a center.
    void check_covers(const PointMeasure& mu) const;

    std::size_t size() const { return radii_.size(); }
    std::size_t dim() const { return centers_.dim(); }
    VecView center(std::size_t i) const { return centers_.point(i); }
    double radius(std::size_t i) const { return radii_[i]; }
    const std::vector<double>& radii() const { return radii_; }
    const PointSet& centers() const { return centers_; }
    double max_radius() const { return max_radius_; }

    /// Indices of C_+ (r_x > 0), ascending.
    const std::vector<std::size_t>& plus() const { return plus_; }
    const PointSet& plus_centers() const { return plus_set_; }

    /// Lowest-index y in C_+ with x in B_{r_y + 2r}(y) and r < r_y <= r / rho.
    std::optional<std::size_t> hitting_original_ball(VecView x, double r, double rho) const;
    /// Radius at a center equal to x (0 when x is not a center).
    double radius_at(VecView x) const;

private:
    PointSet centers_;
    std::vector<double> radii_;
    double max_radius_ = 1.0;
    std::vector<std::size_t> plus_;
    PointSet plus_set_;
    double plus_max_ = 0.0;
};

struct PackingMeasure {
    int k = 1;
    std::vector<Vec> hausdorff_points;
    std::vector<double> hausdorff_weights;
    std::vector<Vec> dirac_centers;
    std::vector<double> dirac_radii;  // weight r^k
};

double packing_number(const PackingMeasure& pm);

/// Grid-counted |B_r(S) ∩ domain|. Throws PreconditionError when grid_step > r/4.
double minkowski_volume(const PointSet& samples, double r, const Ball& domain, double grid_step);
double minkowski_volume(const std::vector<Vec>& samples, double r, const Ball& domain, double grid_step);

// CSV: header x1,...,xn,weight. JSON: [{"position":[...],"weight":w}].
PointMeasure read_measure_csv(std::istream& in);
PointMeasure read_measure_json(std::istream& in);
PointMeasure read_measure_file(const std::string& path);
void write_measure_csv(std::ostream& out, const PointMeasure& mu);
void write_measure_json(std::ostream& out, const PointMeasure& mu);
void write_measure_file(const std::string& path, const PointMeasure& mu);

/// Fixed 17-significant-digit rendering used by every writer.
std::string format_number(double x);

}  // namespace corona
