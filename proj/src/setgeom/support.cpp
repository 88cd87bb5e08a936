#include "detail.hpp"

#include <cmath>
#include <limits>

namespace setreach
{

using detail::overloaded;

namespace
{

void check_direction(const SetRep& s, const Vector& d)
{
    if (d.size() != dim(s))
        throw DimensionError("support: direction has " + std::to_string(d.size()) + " entries, set has dimension "
                             + std::to_string(dim(s)));
    if (d.norm() == 0.0)
        throw GeometryError("support: zero direction");
}

bool lex_less(const Vector& a, const Vector& b)
{
    for (Eigen::Index i = 0; i < a.size(); ++i)
    {
        if (a(i) < b(i))
            return true;
        if (a(i) > b(i))
            return false;
    }
    return false;
}

} // namespace

SupportResult support(const SetRep& s, const Vector& d)
{
    check_direction(s, d);
    return std::visit(
        overloaded{[](const EmptySet&) -> SupportResult { throw GeometryError("support: empty set"); },
            [&](const Box& b) {
                SupportResult r;
                r.witness.resize(b.dim());
                for (Eigen::Index i = 0; i < b.dim(); ++i)
                    r.witness(i) = d(i) > 0.0 ? b.hi()(i) : b.lo()(i);
                r.value = d.dot(r.witness);
                return r;
            },
            [&](const Zonotope& z) {
                SupportResult r;
                const Vector proj = z.generators().transpose() * d;
                Vector alpha(proj.size());
                for (Eigen::Index i = 0; i < proj.size(); ++i)
                    alpha(i) = proj(i) > 0.0 ? 1.0 : (proj(i) < 0.0 ? -1.0 : 0.0);
                r.witness = z.center() + z.generators() * alpha;
                r.value = d.dot(z.center()) + proj.cwiseAbs().sum();
                return r;
            },
            [&](const VPolytope& v) {
                const Vector values = v.vertices().transpose() * d;
                Eigen::Index best = 0;
                for (Eigen::Index k = 1; k < values.size(); ++k)
                {
                    if (values(k) > values(best)
                        || (values(k) == values(best) && lex_less(v.vertices().col(k), v.vertices().col(best))))
                        best = k;
                }
                return SupportResult{values(best), v.vertices().col(best)};
            },
            [&](const HPolytope& p) {
                const LpResult lp = lp_max({d, p.normals(), p.offsets()});
                if (lp.status == LpStatus::Infeasible)
                    throw GeometryError("support: empty H-polytope");
                if (lp.status == LpStatus::Unbounded)
                    return SupportResult{std::numeric_limits<double>::infinity(), Vector()};
                return SupportResult{lp.value, lp.argmax};
            }},
        s);
}

double support_value(const SetRep& s, const Vector& d)
{
    if (const auto* b = std::get_if<Box>(&s))
    {
        check_direction(s, d);
        return d.dot(b->center()) + d.cwiseAbs().dot(b->radius());
    }
    if (const auto* z = std::get_if<Zonotope>(&s))
    {
        check_direction(s, d);
        return d.dot(z->center()) + (z->generators().transpose() * d).cwiseAbs().sum();
    }
    return support(s, d).value;
}

Vector support_values(const SetRep& s, const Matrix& directions)
{
    if (directions.cols() != dim(s))
        throw DimensionError("support_values: direction dimension mismatch");
    if (const auto* b = std::get_if<Box>(&s))
        return directions * b->center() + directions.cwiseAbs() * b->radius();
    if (const auto* z = std::get_if<Zonotope>(&s))
        return directions * z->center() + (directions * z->generators()).cwiseAbs().rowwise().sum();
    if (const auto* v = std::get_if<VPolytope>(&s))
        return (directions * v->vertices()).rowwise().maxCoeff();
    if (std::holds_alternative<EmptySet>(s))
        throw GeometryError("support: empty set");
    // Zero rows get 0, the support of any nonempty set in direction 0.
    Vector out(directions.rows());
    for (Eigen::Index i = 0; i < directions.rows(); ++i)
        out(i) = directions.row(i).isZero(0.0) ? 0.0 : support_value(s, directions.row(i).transpose());
    return out;
}

HPolytope template_hull(const SetRep& s, const Template& directions)
{
    if (!directions || directions->rows() == 0)
        throw GeometryError("template_hull: empty direction list");
    if (std::holds_alternative<EmptySet>(s))
        throw GeometryError("template_hull: empty set");
    return HPolytope::from_unit_normals(directions, support_values(s, *directions));
}

bool member(const SetRep& s, const Vector& x, double tol)
{
    if (x.size() != dim(s))
        throw DimensionError("member: point has " + std::to_string(x.size()) + " entries, set has dimension "
                             + std::to_string(dim(s)));
    return std::visit(
        overloaded{[](const EmptySet&) { return false; },
            [&](const Box& b) {
                for (Eigen::Index i = 0; i < x.size(); ++i)
                    if (x(i) > b.hi()(i) + detail::slack(b.hi()(i), tol)
                        || x(i) < b.lo()(i) - detail::slack(b.lo()(i), tol))
                        return false;
                return true;
            },
            [&](const HPolytope& p) {
                const Vector lhs = p.normals() * x;
                for (Eigen::Index i = 0; i < lhs.size(); ++i)
                    if (lhs(i) > p.offsets()(i) + detail::slack(p.offsets()(i), tol))
                        return false;
                return true;
            },
            [&](const Zonotope& z) {
                // exists a in [-1,1]^g with G a = x - c
                const auto n = z.dim();
                const auto g = z.order();
                const Vector rhs = x - z.center();
                if (g == 0)
                    return (rhs.cwiseAbs().array() <= tol * std::max(1.0, x.cwiseAbs().maxCoeff())).all();
                Matrix A(2 * n + 2 * g, g);
                Vector b(2 * n + 2 * g);
                A.topRows(n) = z.generators();
                A.middleRows(n, n) = -z.generators();
                A.middleRows(2 * n, g) = Matrix::Identity(g, g);
                A.bottomRows(g) = -Matrix::Identity(g, g);
                for (Eigen::Index i = 0; i < n; ++i)
                {
                    const double sl = detail::slack(x(i), tol);
                    b(i) = rhs(i) + sl;
                    b(n + i) = -rhs(i) + sl;
                }
                b.tail(2 * g).setOnes();
                return lp_feasible(A, b);
            },
            [&](const VPolytope& v) {
                // exists lambda >= 0, sum lambda = 1, V lambda = x
                const auto n = v.dim();
                const auto k = v.size();
                Matrix A(2 * n + 2 + k, k);
                Vector b(2 * n + 2 + k);
                A.topRows(n) = v.vertices();
                A.middleRows(n, n) = -v.vertices();
                for (Eigen::Index i = 0; i < n; ++i)
                {
                    const double sl = detail::slack(x(i), tol);
                    b(i) = x(i) + sl;
                    b(n + i) = -x(i) + sl;
                }
                A.row(2 * n).setOnes();
                b(2 * n) = 1.0 + tol;
                A.row(2 * n + 1).setConstant(-1.0);
                b(2 * n + 1) = -1.0 + tol;
                A.bottomRows(k) = -Matrix::Identity(k, k);
                b.tail(k).setZero();
                return lp_feasible(A, b);
            }},
        s);
}

} // namespace setreach
