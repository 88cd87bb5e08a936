#include "detail.hpp"

#include <cmath>
#include <limits>

namespace setreach
{

using detail::overloaded;

namespace
{

void require_same_dim(const SetRep& a, const SetRep& b, const char* op)
{
    if (dim(a) != dim(b))
        throw DimensionError(std::string(op) + ": dimensions " + std::to_string(dim(a)) + " and "
                             + std::to_string(dim(b)) + " differ");
}

// Square matrix with at most one nonzero per row and per column.
bool is_scaled_permutation(const Matrix& A)
{
    if (A.rows() != A.cols())
        return false;
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        if ((A.row(i).array() != 0.0).count() > 1 || (A.col(i).array() != 0.0).count() > 1)
            return false;
    return true;
}

Zonotope box_as_zonotope(const Box& b) { return Zonotope(b.center(), Matrix(b.radius().asDiagonal())); }

bool is_bounded_hpolytope(const HPolytope& p)
{
    const auto n = p.dim();
    for (Eigen::Index i = 0; i < n; ++i)
        for (double sgn : {1.0, -1.0})
            if (!std::isfinite(support(p, sgn * Vector::Unit(n, i)).value))
                return false;
    return true;
}

SetRep minkowski_template(const SetRep& a, const SetRep& b, bool* over_approx)
{
    if (over_approx)
        *over_approx = true;
    const Template T = default_template(dim(a));
    return HPolytope::from_unit_normals(T, support_values(a, *T) + support_values(b, *T));
}

VPolytope vertex_sum(const VPolytope& a, const VPolytope& b)
{
    const auto n = a.dim();
    Matrix out(n, a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i)
        for (Eigen::Index j = 0; j < b.size(); ++j)
            out.col(i * b.size() + j) = a.vertices().col(i) + b.vertices().col(j);
    return reduce_vertices(VPolytope(std::move(out)));
}

// V-form of a set for exact Minkowski sums, or nullopt when unavailable.
std::optional<VPolytope> exact_vertices(const SetRep& s)
{
    if (const auto* v = std::get_if<VPolytope>(&s))
        return *v;
    if (const auto* b = std::get_if<Box>(&s))
    {
        if (b->dim() <= 10)
            return to_vpolytope(*b);
        return std::nullopt;
    }
    if (const auto* z = std::get_if<Zonotope>(&s))
    {
        Matrix pts;
        if (z->order() <= 10 || z->dim() == 2)
            if (detail::zonotope_vertices(*z, pts))
                return reduce_vertices(VPolytope(std::move(pts)));
        return std::nullopt;
    }
    if (const auto* h = std::get_if<HPolytope>(&s))
    {
        if (h->dim() <= kExactConversionDim && is_bounded_hpolytope(*h))
            return hrep_to_vrep(*h);
    }
    return std::nullopt;
}

} // namespace

SetRep linear_map(const Matrix& A, const SetRep& s, bool* over_approx)
{
    if (A.cols() != dim(s))
        throw DimensionError("linear_map: matrix has " + std::to_string(A.cols()) + " columns, set has dimension "
                             + std::to_string(dim(s)));
    const auto out_dim = A.rows();
    return std::visit(
        overloaded{[&](const EmptySet&) -> SetRep { return EmptySet{out_dim}; },
            [&](const Box& b) -> SetRep {
                if (is_scaled_permutation(A))
                {
                    const Vector c = A * b.center();
                    const Vector r = A.cwiseAbs() * b.radius();
                    return Box(c - r, c + r);
                }
                return Zonotope(A * b.center(), A * b.radius().asDiagonal());
            },
            [&](const Zonotope& z) -> SetRep { return Zonotope(A * z.center(), A * z.generators()); },
            [&](const VPolytope& v) -> SetRep { return VPolytope(Matrix(A * v.vertices())); },
            [&](const HPolytope& p) -> SetRep {
                if (A.rows() == A.cols())
                {
                    Eigen::FullPivLU<Matrix> lu(A);
                    if (lu.isInvertible())
                    {
                        // {Ax : a.x <= b} = {y : (A^{-T} a).y <= b}
                        const Matrix inv = lu.inverse();
                        return HPolytope(p.normals() * inv, p.offsets());
                    }
                }
                if (over_approx)
                    *over_approx = true;
                const Template T = default_template(out_dim);
                const Matrix pulled = (*T) * A; // rows: (A^T d)^T
                Vector off(T->rows());
                for (Eigen::Index i = 0; i < T->rows(); ++i)
                {
                    const Vector d = pulled.row(i).transpose();
                    off(i) = d.norm() == 0.0 ? 0.0 : support_value(p, d);
                }
                return HPolytope::from_unit_normals(T, off);
            }},
        s);
}

SetRep translate(const SetRep& s, const Vector& offset)
{
    if (offset.size() != dim(s))
        throw DimensionError("translate: offset dimension mismatch");
    return std::visit(overloaded{[](const EmptySet& e) -> SetRep { return e; },
                          [&](const Box& b) -> SetRep { return Box(b.lo() + offset, b.hi() + offset); },
                          [&](const Zonotope& z) -> SetRep { return Zonotope(z.center() + offset, z.generators()); },
                          [&](const VPolytope& v) -> SetRep { return VPolytope(Matrix(v.vertices().colwise() + offset)); },
                          [&](const HPolytope& p) -> SetRep {
                              return HPolytope::from_unit_normals(p.shared_normals(), p.offsets() + p.normals() * offset);
                          }},
        s);
}

SetRep minkowski_sum(const SetRep& a, const SetRep& b, bool* over_approx)
{
    require_same_dim(a, b, "minkowski_sum");
    if (std::holds_alternative<EmptySet>(a) || std::holds_alternative<EmptySet>(b))
        return EmptySet{dim(a)};
    if (std::holds_alternative<HPolytope>(a) && is_empty(a))
        return EmptySet{dim(a)};
    if (std::holds_alternative<HPolytope>(b) && is_empty(b))
        return EmptySet{dim(a)};

    const auto* ba = std::get_if<Box>(&a);
    const auto* bb = std::get_if<Box>(&b);
    if (ba && bb)
        return Box(ba->lo() + bb->lo(), ba->hi() + bb->hi());

    const auto* za = std::get_if<Zonotope>(&a);
    const auto* zb = std::get_if<Zonotope>(&b);
    if ((za || ba) && (zb || bb))
    {
        const Zonotope lhs = za ? *za : box_as_zonotope(*ba);
        const Zonotope rhs = zb ? *zb : box_as_zonotope(*bb);
        Matrix G(lhs.dim(), lhs.order() + rhs.order());
        G << lhs.generators(), rhs.generators();
        return Zonotope(lhs.center() + rhs.center(), std::move(G));
    }

    // A box or singleton added to an H-form shifts every facet by its support.
    const auto* ha = std::get_if<HPolytope>(&a);
    const auto* hb = std::get_if<HPolytope>(&b);
    if ((ha && bb) || (hb && ba))
    {
        const HPolytope& p = ha ? *ha : *hb;
        const Box& box = bb ? *bb : *ba;
        if ((box.radius().array() == 0.0).all())
            return translate(p, box.lo());
    }

    const auto va = exact_vertices(a);
    const auto vb = exact_vertices(b);
    if (va && vb && (va->size() * vb->size() <= 200000))
        return vertex_sum(*va, *vb);
    return minkowski_template(a, b, over_approx);
}

SetRep intersect(const SetRep& a, const SetRep& b)
{
    require_same_dim(a, b, "intersect");
    if (std::holds_alternative<EmptySet>(a) || std::holds_alternative<EmptySet>(b))
        return EmptySet{dim(a)};
    const auto* ba = std::get_if<Box>(&a);
    const auto* bb = std::get_if<Box>(&b);
    if (ba && bb)
        return make_box(ba->lo().cwiseMax(bb->lo()), ba->hi().cwiseMin(bb->hi()));

    auto as_h = [](const SetRep& s) -> HPolytope {
        if (std::holds_alternative<VPolytope>(s) || std::holds_alternative<Zonotope>(s))
        {
            if (dim(s) > kExactConversionDim)
                throw UnsupportedCheck("intersect: " + tag_name(s) + " operand above dimension 3 has no exact H-form");
            bool approx = false;
            HPolytope h = to_hpolytope(s, &approx);
            if (approx)
                throw UnsupportedCheck("intersect: no exact H-form for " + tag_name(s));
            return h;
        }
        return to_hpolytope(s);
    };
    const HPolytope ha = as_h(a);
    const HPolytope hb = as_h(b);
    if (ha.shared_normals() == hb.shared_normals())
        return HPolytope::from_unit_normals(ha.shared_normals(), ha.offsets().cwiseMin(hb.offsets()));
    Matrix N(ha.size() + hb.size(), ha.dim());
    N << ha.normals(), hb.normals();
    Vector off(ha.size() + hb.size());
    off << ha.offsets(), hb.offsets();
    return HPolytope::from_unit_normals(std::make_shared<const Matrix>(std::move(N)), std::move(off));
}

SetRep bloat(const SetRep& s, double eps)
{
    if (!(eps >= 0.0) || !std::isfinite(eps))
        throw std::invalid_argument("bloat: radius must be finite and nonnegative");
    if (eps == 0.0)
        return s;
    const auto n = dim(s);
    return std::visit(
        overloaded{[](const EmptySet& e) -> SetRep { return e; },
            [&](const Box& b) -> SetRep { return Box(b.lo().array() - eps, b.hi().array() + eps); },
            [&](const Zonotope& z) -> SetRep {
                Matrix G(n, z.order() + n);
                G << z.generators(), eps * Matrix::Identity(n, n);
                return Zonotope(z.center(), std::move(G));
            },
            [&](const HPolytope& p) -> SetRep {
                const Vector grow = eps * p.normals().cwiseAbs().rowwise().sum();
                return HPolytope::from_unit_normals(p.shared_normals(), p.offsets() + grow);
            },
            [&](const VPolytope& v) -> SetRep {
                const SetRep ball = Box(Vector::Constant(n, -eps), Vector::Constant(n, eps));
                return minkowski_sum(v, ball);
            }},
        s);
}

SetRep convex_hull_union(const SetRep& a, const SetRep& b, const Template& fallback, bool* over_approx)
{
    require_same_dim(a, b, "convex_hull_union");
    if (is_empty(a))
        return b;
    if (is_empty(b))
        return a;
    const auto va = exact_vertices(a);
    const auto vb = exact_vertices(b);
    if (va && vb)
    {
        Matrix pts(va->dim(), va->size() + vb->size());
        pts << va->vertices(), vb->vertices();
        return reduce_vertices(VPolytope(std::move(pts)));
    }
    if (over_approx)
        *over_approx = true;
    const Template T = fallback ? fallback : default_template(dim(a));
    return HPolytope::from_unit_normals(T, support_values(a, *T).cwiseMax(support_values(b, *T)));
}

bool contains_set(const SetRep& Q, const SetRep& P, double tol)
{
    require_same_dim(Q, P, "contains_set");
    if (is_empty(P))
        return true;
    if (std::holds_alternative<EmptySet>(Q))
        return false;

    HPolytope facets = [&]() -> HPolytope {
        if (std::holds_alternative<Box>(Q) || std::holds_alternative<HPolytope>(Q))
            return to_hpolytope(Q);
        if (dim(Q) > kExactConversionDim)
            throw UnsupportedCheck("contains_set: container " + tag_name(Q) + " of dimension "
                                   + std::to_string(dim(Q)) + " has no exact H-form");
        bool approx = false;
        HPolytope h = to_hpolytope(Q, &approx);
        if (approx)
            throw UnsupportedCheck("contains_set: container " + tag_name(Q) + " has no exact H-form");
        return h;
    }();
    if (is_empty(facets))
        return false;

    // Cheap path for template hulls over the same directions.
    if (const auto* hp = std::get_if<HPolytope>(&P); hp && hp->shared_normals() == facets.shared_normals())
    {
        bool dominated = true;
        for (Eigen::Index i = 0; i < hp->size() && dominated; ++i)
            dominated = hp->offsets()(i) <= facets.offsets()(i) + detail::slack(facets.offsets()(i), tol);
        if (dominated)
            return true;
    }

    const Vector values = support_values(P, facets.normals());
    for (Eigen::Index i = 0; i < facets.size(); ++i)
        if (!(values(i) <= facets.offsets()(i) + detail::slack(facets.offsets()(i), tol)))
            return false;
    return true;
}

namespace
{

// Remove `cut` from `piece`, appending up to 2n leftover boxes.
void box_difference(const Box& piece, const Box& cut, std::vector<Box>& out, double tol)
{
    const auto n = piece.dim();
    Vector lo = piece.lo();
    Vector hi = piece.hi();
    for (Eigen::Index i = 0; i < n; ++i)
        if (cut.hi()(i) < lo(i) - tol || cut.lo()(i) > hi(i) + tol)
        {
            out.push_back(piece);
            return;
        }
    for (Eigen::Index i = 0; i < n; ++i)
    {
        if (cut.lo()(i) > lo(i) + detail::slack(lo(i), tol))
        {
            Vector h = hi;
            h(i) = cut.lo()(i);
            out.emplace_back(lo, h);
            lo(i) = cut.lo()(i);
        }
        if (cut.hi()(i) < hi(i) - detail::slack(hi(i), tol))
        {
            Vector l = lo;
            l(i) = cut.hi()(i);
            out.emplace_back(l, hi);
            hi(i) = cut.hi()(i);
        }
    }
}

} // namespace

bool contains_set(std::span<const SetRep> Q, const SetRep& P, double tol)
{
    for (const auto& q : Q)
        require_same_dim(q, P, "contains_set");
    if (is_empty(P))
        return true;
    if (Q.empty())
        return false;

    // Sifting through a union of boxes.
    std::vector<Box> boxes;
    bool all_boxes = true;
    for (const auto& q : Q)
    {
        if (is_empty(q))
            continue;
        auto b = as_box(q);
        if (!b)
        {
            all_boxes = false;
            break;
        }
        boxes.push_back(*b);
    }
    const auto pbox = as_box(P);
    if (all_boxes && pbox)
    {
        std::vector<Box> pieces{*pbox};
        for (const auto& cut : boxes)
        {
            std::vector<Box> next;
            for (const auto& piece : pieces)
                box_difference(piece, cut, next, tol);
            pieces.swap(next);
            if (pieces.empty())
                return true;
            if (pieces.size() > 100000)
                break;
        }
        return pieces.empty();
    }

    for (const auto& q : Q)
        if (contains_set(q, P, tol))
            return true;
    return false;
}

} // namespace setreach
