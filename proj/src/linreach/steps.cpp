#include "detail.hpp"

#include <Eigen/LU>

namespace setreach
{

namespace
{

double rho(const SetRep& s, const Vector& d) { return d.isZero(0.0) ? 0.0 : support_value(s, d); }

} // namespace

LazyReachSet::LazyReachSet(SetRep X0, Matrix A, std::optional<SetRep> U, Template tracked)
{
    const auto n = A.rows();
    if (A.cols() != n)
        throw DimensionError("LazyReachSet: A must be square");
    if (setreach::dim(X0) != n)
        throw DimensionError("LazyReachSet: X0 dimension differs from A");
    if (U && setreach::dim(*U) != n)
        throw DimensionError("LazyReachSet: input set dimension differs from A");
    if (!tracked || tracked->rows() == 0)
        throw GeometryError("LazyReachSet: empty template");
    if (tracked->cols() != n)
        throw DimensionError("LazyReachSet: template dimension differs from A");
    X0_ = std::make_shared<const SetRep>(std::move(X0));
    A_ = std::make_shared<const Matrix>(std::move(A));
    if (U)
        U_ = std::make_shared<const SetRep>(std::move(*U));
    tracked_ = std::move(tracked);
    R_ = *tracked_;
    accum_ = Vector::Zero(tracked_->rows());
}

double LazyReachSet::support(const Vector& d) const
{
    if (d.size() != dim())
        throw DimensionError("LazyReachSet::support: direction dimension mismatch");
    double value = 0.0;
    Vector e = d;
    for (std::size_t i = 0; i < k_; ++i)
    {
        if (U_)
            value += rho(*U_, e);
        e = A_->transpose() * e;
    }
    return value + rho(*X0_, e);
}

Vector LazyReachSet::tracked_support() const { return support_values(*X0_, R_) + accum_; }

void LazyReachSet::advance()
{
    if (U_)
        accum_ += support_values(*U_, R_);
    R_ = R_ * *A_;
    ++k_;
    if (!R_.allFinite() || !accum_.allFinite())
        throw GeometryError("LazyReachSet: overflow at step " + std::to_string(k_));
}

LazyReachSet lazy_advance(const LazyReachSet& S)
{
    LazyReachSet next = S;
    next.advance();
    return next;
}

HPolytope concretize(const LazyReachSet& S, const Template& directions)
{
    if (!directions || directions->rows() == 0)
        throw GeometryError("concretize: empty template");
    if (directions->cols() != S.dim())
        throw DimensionError("concretize: template dimension mismatch");
    const Matrix& T = *S.tracked();
    if (directions == S.tracked()
        || (directions->rows() == T.rows() && directions->cols() == T.cols() && *directions == T))
        return HPolytope::from_unit_normals(directions, S.tracked_support());
    Vector off(directions->rows());
    for (Eigen::Index i = 0; i < directions->rows(); ++i)
        off(i) = S.support(directions->row(i).transpose());
    return HPolytope::from_unit_normals(directions, off);
}

SetRep step_autonomous(const SetRep& P, const Matrix& A) { return linear_map(A, P); }

VPolytope step_input_vertex_candidates(const VPolytope& P, const VPolytope& V, const Matrix& A, const Matrix& B)
{
    if (A.cols() != P.dim() || B.cols() != V.dim() || A.rows() != B.rows())
        throw DimensionError("step_input_vertices: dimension mismatch");
    const Matrix AP = A * P.vertices();
    const Matrix BV = B * V.vertices();
    Matrix out(A.rows(), AP.cols() * BV.cols());
    Eigen::Index col = 0;
    for (Eigen::Index i = 0; i < AP.cols(); ++i)
        for (Eigen::Index j = 0; j < BV.cols(); ++j)
            out.col(col++) = AP.col(i) + BV.col(j);
    return VPolytope(std::move(out));
}

VPolytope step_input_vertices(const VPolytope& P, const VPolytope& V, const Matrix& A, const Matrix& B)
{
    return reduce_vertices(step_input_vertex_candidates(P, V, A, B));
}

namespace detail
{

// A P + U by facet pushing, given Ainv = A^{-1}.
HPolytope push_facets(const HPolytope& P, const std::optional<SetRep>& U, const Matrix& Ainv)
{
    Matrix normals = P.normals() * Ainv;
    Vector offsets = P.offsets();
    for (Eigen::Index i = 0; i < normals.rows(); ++i)
    {
        const double s = normals.row(i).norm();
        normals.row(i) /= s;
        offsets(i) /= s;
        if (U)
            offsets(i) += support_value(*U, normals.row(i).transpose());
    }
    return HPolytope::from_unit_normals(std::make_shared<const Matrix>(std::move(normals)), std::move(offsets));
}

// Template hull of A P + U for singular A.
HPolytope template_step(const SetRep& P, const std::optional<SetRep>& U, const Matrix& A, const Template& T)
{
    const Matrix pulled = (*T) * A;
    Vector off = support_values(P, pulled);
    if (U)
        off += support_values(*U, *T);
    return HPolytope::from_unit_normals(T, off);
}

} // namespace detail

HPolytope step_input_facets(const HPolytope& P, const SetRep& V, const Matrix& A, const Matrix& B,
    const Template& fallback, bool* over_approx)
{
    if (A.rows() != A.cols() || A.cols() != P.dim() || B.rows() != A.rows() || B.cols() != dim(V))
        throw DimensionError("step_input_facets: dimension mismatch");
    const std::optional<SetRep> U = linear_map(B, V, over_approx);
    Eigen::FullPivLU<Matrix> lu(A);
    if (lu.isInvertible())
        return detail::push_facets(P, U, lu.inverse());
    if (over_approx)
        *over_approx = true;
    return detail::template_step(P, U, A, fallback ? fallback : default_template(A.rows()));
}

} // namespace setreach
