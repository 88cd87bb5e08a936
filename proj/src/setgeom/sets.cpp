#include "detail.hpp"

#include <cmath>
#include <limits>

namespace setreach
{

using detail::overloaded;

Box::Box(Vector lo, Vector hi) : lo_(std::move(lo)), hi_(std::move(hi))
{
    if (lo_.size() != hi_.size())
        throw DimensionError("Box: corner dimensions differ");
    if (!lo_.allFinite() || !hi_.allFinite())
        throw GeometryError("Box: non-finite corner");
    for (Eigen::Index i = 0; i < lo_.size(); ++i)
        if (lo_(i) > hi_(i))
            throw GeometryError("Box: lower corner exceeds upper corner in coordinate " + std::to_string(i));
}

HPolytope::HPolytope(const Matrix& normals, const Vector& offsets)
{
    if (normals.rows() != offsets.size())
        throw DimensionError("HPolytope: " + std::to_string(normals.rows()) + " normals but "
                             + std::to_string(offsets.size()) + " offsets");
    if (!normals.allFinite() || offsets.hasNaN())
        throw GeometryError("HPolytope: non-finite coefficients");

    const auto n = normals.cols();
    std::vector<Eigen::Index> keep;
    bool contradiction = false;
    for (Eigen::Index i = 0; i < normals.rows(); ++i)
    {
        if (offsets(i) == std::numeric_limits<double>::infinity())
            continue;
        if (normals.row(i).norm() == 0.0)
        {
            if (offsets(i) < 0.0)
                contradiction = true;
            continue;
        }
        keep.push_back(i);
    }

    const auto rows = static_cast<Eigen::Index>(keep.size()) + (contradiction && n > 0 ? 2 : 0);
    Matrix N(rows, n);
    offsets_.resize(rows);
    for (std::size_t k = 0; k < keep.size(); ++k)
    {
        const auto i = keep[k];
        const double norm = normals.row(i).norm();
        N.row(static_cast<Eigen::Index>(k)) = normals.row(i) / norm;
        offsets_(static_cast<Eigen::Index>(k)) = offsets(i) / norm;
    }
    if (contradiction && n > 0)
    {
        // 0.x <= b < 0 has no unit-normal form; encode as e1.x <= -1 and -e1.x <= -1.
        const auto k = static_cast<Eigen::Index>(keep.size());
        N.row(k) = Vector::Unit(n, 0).transpose();
        N.row(k + 1) = -Vector::Unit(n, 0).transpose();
        offsets_(k) = -1.0;
        offsets_(k + 1) = -1.0;
    }
    normals_ = std::make_shared<const Matrix>(std::move(N));
}

HPolytope HPolytope::from_unit_normals(std::shared_ptr<const Matrix> normals, Vector offsets)
{
    if (!normals || normals->rows() != offsets.size())
        throw DimensionError("HPolytope: normals/offsets mismatch");
    HPolytope p;
    p.normals_ = std::move(normals);
    p.offsets_ = std::move(offsets);
    return p;
}

VPolytope::VPolytope(Matrix vertices) : vertices_(std::move(vertices))
{
    if (vertices_.cols() == 0)
        throw GeometryError("VPolytope: empty vertex list");
    if (!vertices_.allFinite())
        throw GeometryError("VPolytope: non-finite vertex");
}

VPolytope::VPolytope(const std::vector<Vector>& vertices)
{
    if (vertices.empty())
        throw GeometryError("VPolytope: empty vertex list");
    const auto n = vertices.front().size();
    vertices_.resize(n, static_cast<Eigen::Index>(vertices.size()));
    for (std::size_t k = 0; k < vertices.size(); ++k)
    {
        if (vertices[k].size() != n)
            throw DimensionError("VPolytope: vertices of differing dimension");
        vertices_.col(static_cast<Eigen::Index>(k)) = vertices[k];
    }
    if (!vertices_.allFinite())
        throw GeometryError("VPolytope: non-finite vertex");
}

Zonotope::Zonotope(Vector center, Matrix generators) : center_(std::move(center)), generators_(std::move(generators))
{
    if (generators_.cols() == 0)
        generators_.resize(center_.size(), 0);
    if (generators_.rows() != center_.size())
        throw DimensionError("Zonotope: generator rows " + std::to_string(generators_.rows())
                             + " differ from center dimension " + std::to_string(center_.size()));
    if (!center_.allFinite() || !generators_.allFinite())
        throw GeometryError("Zonotope: non-finite entries");
}

Eigen::Index dim(const SetRep& s)
{
    return std::visit(overloaded{[](const EmptySet& e) { return e.dim; }, [](const auto& x) { return x.dim(); }}, s);
}

std::string tag_name(const SetRep& s)
{
    return std::visit(overloaded{[](const EmptySet&) { return std::string("empty"); },
                          [](const Box&) { return std::string("box"); },
                          [](const HPolytope&) { return std::string("hpolytope"); },
                          [](const VPolytope&) { return std::string("vpolytope"); },
                          [](const Zonotope&) { return std::string("zonotope"); }},
        s);
}

SetRep make_box(const Vector& lo, const Vector& hi)
{
    if (lo.size() != hi.size())
        throw DimensionError("make_box: corner dimensions differ");
    for (Eigen::Index i = 0; i < lo.size(); ++i)
        if (lo(i) > hi(i))
            return EmptySet{lo.size()};
    return Box(lo, hi);
}

SetRep singleton(const Vector& x) { return Box(x, x); }

Template make_template(const Matrix& directions)
{
    if (directions.rows() == 0)
        throw GeometryError("template: empty direction list");
    Matrix D = directions;
    for (Eigen::Index i = 0; i < D.rows(); ++i)
    {
        const double norm = D.row(i).norm();
        if (norm == 0.0 || !std::isfinite(norm))
            throw GeometryError("template: zero or non-finite direction at row " + std::to_string(i));
        D.row(i) /= norm;
    }
    return std::make_shared<const Matrix>(std::move(D));
}

Template axis_template(Eigen::Index n)
{
    Matrix D(2 * n, n);
    D.topRows(n) = Matrix::Identity(n, n);
    D.bottomRows(n) = -Matrix::Identity(n, n);
    return std::make_shared<const Matrix>(std::move(D));
}

Template octagonal_template(Eigen::Index n)
{
    const Eigen::Index diagonals = 2 * n * (n - 1);
    Matrix D = Matrix::Zero(2 * n + diagonals, n);
    D.topRows(n) = Matrix::Identity(n, n);
    D.middleRows(n, n) = -Matrix::Identity(n, n);
    Eigen::Index row = 2 * n;
    const double h = 1.0 / std::sqrt(2.0);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            for (double si : {1.0, -1.0})
                for (double sj : {1.0, -1.0})
                {
                    D(row, i) = si * h;
                    D(row, j) = sj * h;
                    ++row;
                }
    return std::make_shared<const Matrix>(std::move(D));
}

Template default_template(Eigen::Index n) { return n <= 4 ? octagonal_template(n) : axis_template(n); }

bool is_empty(const SetRep& s)
{
    return std::visit(overloaded{[](const EmptySet&) { return true; },
                          [](const HPolytope& p) {
                              Vector b = p.offsets();
                              for (Eigen::Index i = 0; i < b.size(); ++i)
                                  b(i) += kSetTolerance * std::max(1.0, std::abs(b(i)));
                              return !lp_feasible(p.normals(), b);
                          },
                          [](const auto&) { return false; }},
        s);
}

Box bounding_box(const SetRep& s)
{
    if (const auto* b = std::get_if<Box>(&s))
        return *b;
    if (std::holds_alternative<EmptySet>(s))
        throw GeometryError("bounding_box: empty set");
    const auto n = dim(s);
    Vector lo(n), hi(n);
    for (Eigen::Index i = 0; i < n; ++i)
    {
        hi(i) = support_value(s, Vector::Unit(n, i));
        lo(i) = -support_value(s, -Vector::Unit(n, i));
    }
    if (!hi.allFinite() || !lo.allFinite())
        throw GeometryError("bounding_box: unbounded set");
    // Guard against rounding inversions on flat sets.
    for (Eigen::Index i = 0; i < n; ++i)
        if (lo(i) > hi(i))
            lo(i) = hi(i) = 0.5 * (lo(i) + hi(i));
    return Box(lo, hi);
}

std::optional<Box> as_box(const SetRep& s)
{
    if (const auto* b = std::get_if<Box>(&s))
        return *b;
    const auto* p = std::get_if<HPolytope>(&s);
    if (!p)
        return std::nullopt;
    const auto n = p->dim();
    Vector lo = Vector::Constant(n, -std::numeric_limits<double>::infinity());
    Vector hi = Vector::Constant(n, std::numeric_limits<double>::infinity());
    for (Eigen::Index r = 0; r < p->size(); ++r)
    {
        Eigen::Index axis = -1;
        for (Eigen::Index j = 0; j < n; ++j)
        {
            if (p->normals()(r, j) == 0.0)
                continue;
            if (axis >= 0)
                return std::nullopt;
            axis = j;
        }
        if (axis < 0)
            return std::nullopt;
        const double a = p->normals()(r, axis);
        const double bound = p->offsets()(r) / a;
        if (a > 0)
            hi(axis) = std::min(hi(axis), bound);
        else
            lo(axis) = std::max(lo(axis), bound);
    }
    if (!lo.allFinite() || !hi.allFinite())
        return std::nullopt;
    for (Eigen::Index i = 0; i < n; ++i)
        if (lo(i) > hi(i))
            return std::nullopt;
    return Box(lo, hi);
}

Vector sample_point(const SetRep& s, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    return std::visit(
        overloaded{[](const EmptySet&) -> Vector { throw GeometryError("sample_point: empty set"); },
            [&](const Box& b) -> Vector {
                Vector x(b.dim());
                for (Eigen::Index i = 0; i < b.dim(); ++i)
                    x(i) = b.lo()(i) + unit(rng) * (b.hi()(i) - b.lo()(i));
                return x;
            },
            [&](const Zonotope& z) -> Vector {
                Vector a(z.order());
                for (Eigen::Index i = 0; i < a.size(); ++i)
                    a(i) = 2.0 * unit(rng) - 1.0;
                return z.center() + z.generators() * a;
            },
            [&](const VPolytope& v) -> Vector {
                // Mix a random vertex with a random convex combination so that
                // corners are hit with positive probability.
                std::exponential_distribution<double> expo(1.0);
                Vector w(v.size());
                for (Eigen::Index i = 0; i < w.size(); ++i)
                    w(i) = expo(rng);
                w /= w.sum();
                std::uniform_int_distribution<Eigen::Index> pick(0, v.size() - 1);
                const double t = unit(rng);
                Vector x = v.vertices() * w;
                return t < 0.2 ? Vector(v.vertices().col(pick(rng))) : x;
            },
            [&](const HPolytope& p) -> Vector {
                const Box bb = bounding_box(p);
                for (int attempt = 0; attempt < 20000; ++attempt)
                {
                    Vector x = sample_point(bb, rng);
                    if (member(p, x, 0.0))
                        return x;
                }
                // Thin polytopes: fall back to an extreme point in a random direction.
                std::normal_distribution<double> gauss;
                Vector d(p.dim());
                for (Eigen::Index i = 0; i < d.size(); ++i)
                    d(i) = gauss(rng);
                return support(p, d).witness;
            }},
        s);
}

} // namespace setreach
