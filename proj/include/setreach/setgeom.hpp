#ifndef SETREACH_SETGEOM_HPP_
#define SETREACH_SETGEOM_HPP_

#include "setreach/numkernel.hpp"

#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace setreach
{

// Boundary slack for membership, containment and emptiness. Applied as
// tol * max(1, |offset|) so large-magnitude sets keep a relative margin.
inline constexpr double kSetTolerance = 1e-9;

// Largest dimension for which exact V <-> H conversion is attempted.
inline constexpr Eigen::Index kExactConversionDim = 3;

class GeometryError : public std::runtime_error
{
    public:
        explicit GeometryError(const std::string& what) : std::runtime_error(what) {}
};

// A containment / intersection query that cannot be answered soundly for
// the given representations.
class UnsupportedCheck : public std::runtime_error
{
    public:
        explicit UnsupportedCheck(const std::string& what) : std::runtime_error(what) {}
};

struct EmptySet
{
    Eigen::Index dim = 0;
};

/// Axis-aligned box [lo, hi].
class Box
{
    public:
        Box(Vector lo, Vector hi);

        const Vector& lo() const { return lo_; }
        const Vector& hi() const { return hi_; }
        Eigen::Index dim() const { return lo_.size(); }
        Vector center() const { return 0.5 * (lo_ + hi_); }
        Vector radius() const { return 0.5 * (hi_ - lo_); }

    private:
        Vector lo_;
        Vector hi_;
};

/**
 * Conjunction of halfspaces a_i . x <= b_i.
 *
 * Normals are stored with unit Euclidean norm and shared between polytopes
 * built over the same template, so a flowpipe of k template hulls stores the
 * direction matrix once.
 */
class HPolytope
{
    public:
        HPolytope(const Matrix& normals, const Vector& offsets);

        // Caller guarantees rows of *normals have unit norm.
        static HPolytope from_unit_normals(std::shared_ptr<const Matrix> normals, Vector offsets);

        const Matrix& normals() const { return *normals_; }
        const std::shared_ptr<const Matrix>& shared_normals() const { return normals_; }
        const Vector& offsets() const { return offsets_; }
        Eigen::Index dim() const { return normals_->cols(); }
        Eigen::Index size() const { return offsets_.size(); }

    private:
        HPolytope() = default;

        std::shared_ptr<const Matrix> normals_;
        Vector offsets_;
};

/// Convex hull of the columns of `vertices`. Redundant points are allowed.
class VPolytope
{
    public:
        explicit VPolytope(Matrix vertices);
        explicit VPolytope(const std::vector<Vector>& vertices);

        const Matrix& vertices() const { return vertices_; }
        Eigen::Index dim() const { return vertices_.rows(); }
        Eigen::Index size() const { return vertices_.cols(); }

    private:
        Matrix vertices_;
};

/// {c + G a : |a|_inf <= 1}, generators are the columns of G.
class Zonotope
{
    public:
        Zonotope(Vector center, Matrix generators);

        const Vector& center() const { return center_; }
        const Matrix& generators() const { return generators_; }
        Eigen::Index dim() const { return center_.size(); }
        Eigen::Index order() const { return generators_.cols(); }

    private:
        Vector center_;
        Matrix generators_;
};

using SetRep = std::variant<EmptySet, Box, HPolytope, VPolytope, Zonotope>;

// Shared, immutable list of template directions (one unit direction per row).
using Template = std::shared_ptr<const Matrix>;

struct SupportResult
{
    double value = 0.0;
    Vector witness; // empty when value is +inf
};

Eigen::Index dim(const SetRep& s);
std::string tag_name(const SetRep& s);

/// Box from corners; returns EmptySet when some lo_i > hi_i.
SetRep make_box(const Vector& lo, const Vector& hi);
SetRep singleton(const Vector& x);

// --- templates ------------------------------------------------------------

Template make_template(const Matrix& directions);
Template axis_template(Eigen::Index n);
/// Axes plus all +-e_i +- e_j diagonals.
Template octagonal_template(Eigen::Index n);
/// Octagonal for n <= 4, axis-only above.
Template default_template(Eigen::Index n);

// --- core operations ------------------------------------------------------

bool member(const SetRep& s, const Vector& x, double tol = kSetTolerance);

/// Image under a (possibly non-square) matrix. *over_approx is set when
/// the result had to be template-approximated (singular map on an H-form).
SetRep linear_map(const Matrix& A, const SetRep& s, bool* over_approx = nullptr);
SetRep translate(const SetRep& s, const Vector& offset);

SetRep minkowski_sum(const SetRep& a, const SetRep& b, bool* over_approx = nullptr);

/// Exact intersection. Boxes stay boxes; everything else becomes an
/// H-polytope with concatenated (possibly redundant) rows.
SetRep intersect(const SetRep& a, const SetRep& b);

SupportResult support(const SetRep& s, const Vector& d);
double support_value(const SetRep& s, const Vector& d);
/// Support values for every row of `directions`.
Vector support_values(const SetRep& s, const Matrix& directions);

/// P subset of Q. Throws UnsupportedCheck when Q cannot be put in H-form.
bool contains_set(const SetRep& Q, const SetRep& P, double tol = kSetTolerance);

/// P subset of the union of Q. Exact for box unions (successive set
/// difference); otherwise the sound one-sided test "P inside a single member".
bool contains_set(std::span<const SetRep> Q, const SetRep& P, double tol = kSetTolerance);

/// Counterclockwise hull without collinear points (monotone chain).
VPolytope convex_hull_2d(const std::vector<Vector>& points);
VPolytope convex_hull_2d(const Matrix& points);

HPolytope vrep_to_hrep(const VPolytope& p, bool* over_approx = nullptr);
VPolytope hrep_to_vrep(const HPolytope& p);

HPolytope template_hull(const SetRep& s, const Template& directions);

/// s plus the infinity-norm ball of radius eps.
SetRep bloat(const SetRep& s, double eps);

bool is_empty(const SetRep& s);

// --- conversions and helpers ---------------------------------------------

Box bounding_box(const SetRep& s);
std::optional<Box> as_box(const SetRep& s);

/// Drops non-extreme vertices (exact for dimension <= 3; identity above).
VPolytope reduce_vertices(const VPolytope& p);

VPolytope to_vpolytope(const SetRep& s, bool* over_approx = nullptr);
HPolytope to_hpolytope(const SetRep& s, bool* over_approx = nullptr);

/// conv(a u b).
SetRep convex_hull_union(const SetRep& a, const SetRep& b, const Template& fallback, bool* over_approx = nullptr);

/// Exact projection onto coordinates (i, j), as a counterclockwise polygon.
VPolytope project_2d(const SetRep& s, Eigen::Index i, Eigen::Index j);

/// Random point of a nonempty bounded set (not uniform for V/H forms).
Vector sample_point(const SetRep& s, std::mt19937_64& rng);

} // namespace setreach

#endif
