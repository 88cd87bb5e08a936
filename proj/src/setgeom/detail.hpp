#ifndef SETREACH_SETGEOM_DETAIL_HPP_
#define SETREACH_SETGEOM_DETAIL_HPP_

#include "setreach/setgeom.hpp"

#include <vector>

namespace setreach::detail
{

template<class... Ts>
struct overloaded : Ts...
{
    using Ts::operator()...;
};
template<class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

inline double slack(double offset, double tol) { return tol * std::max(1.0, std::abs(offset)); }

/// Affine-hull-aware hull of a point cloud in dimension <= 3.
struct HullResult
{
    std::vector<Eigen::Index> vertices; // indices into the input columns
    Matrix normals;                     // facet rows (unit), full-dimensional lift
    Vector offsets;
};

HullResult hull_low_dim(const Matrix& points);

/// Candidate vertices of a zonotope (exact extreme points for dim 2,
/// 2^order enumeration otherwise). Returns false when too many.
bool zonotope_vertices(const Zonotope& z, Matrix& out);

/// Exact H-form of a full-dimensional zonotope in dim 2 or 3.
bool zonotope_hrep(const Zonotope& z, Matrix& normals, Vector& offsets);

} // namespace setreach::detail

#endif
