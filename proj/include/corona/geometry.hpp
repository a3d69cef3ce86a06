#pragma once

#include <optional>
#include <vector>

#include "corona/core.hpp"

namespace corona {

/// Affine k-plane: base point plus an orthonormal k-frame.
class AffinePlane {
public:
    AffinePlane() = default;

    /// Orthonormalizes `directions` by modified Gram-Schmidt with a second pass.
    /// Throws RankDeficient when the directions are dependent.
    static AffinePlane from_directions(Vec base, const std::vector<Vec>& directions);

    /// Trusts the caller's frame; only checks orthonormality.
    static AffinePlane from_frame(Vec base, std::vector<Vec> frame);

    const Vec& base() const { return base_; }
    const std::vector<Vec>& frame() const { return frame_; }
    std::size_t k() const { return frame_.size(); }
    std::size_t dim() const { return base_.size(); }

    /// Coordinates of p(x - base) in the frame.
    Vec coordinates(VecView x) const;
    /// base + sum c_i e_i.
    Vec embed(VecView coords) const;
    /// Component of x - base orthogonal to the frame.
    Vec normal_part(VecView x) const;

private:
    Vec base_;
    std::vector<Vec> frame_;
};

Vec project(const AffinePlane& plane, VecView x);
double plane_distance(VecView x, const AffinePlane& plane);

/// Orthonormal basis of span(vectors), dropping directions whose residual falls
/// below `drop_tol` after two Gram-Schmidt passes.
std::vector<Vec> orthonormalize(const std::vector<Vec>& vectors, double drop_tol);

/// Hausdorff distance between the unit disks of the linear parts of two
/// k-planes. Sampled on the unit sphere of each plane at angular step 2pi/256,
/// then refined around the best samples.
double grassmann_distance(const AffinePlane& a, const AffinePlane& b);

/// True iff each p_i lies at distance >= rho from the affine span of p_0..p_{i-1}.
bool general_position(const std::vector<Vec>& points, double rho);

/// Sampled Hausdorff distance between the slices plane_a ∩ ball and plane_b ∩ ball.
/// Returns +inf when exactly one slice is empty and 0 when both are.
double slice_hausdorff(const AffinePlane& a, const AffinePlane& b, const Ball& ball,
                       int samples_per_axis = 48);

struct GraphNorm {
    bool graphical = false;
    double height = 0.0;  // sup |f| / r
    double slope = 0.0;   // max secant slope
    std::size_t samples = 0;

    double c1() const { return height + slope; }
};

/// Graph-norm estimate of the samples in `ball` viewed over `plane`.
/// `scale` defaults to the ball radius. Throws on an empty sample set.
GraphNorm verify_graphical(const std::vector<Vec>& samples, const AffinePlane& plane,
                           const Ball& ball, std::optional<double> scale = std::nullopt);

}  // namespace corona
