#include "detail.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include <boost/multiprecision/cpp_int.hpp>

namespace setreach
{

using detail::overloaded;

namespace
{

double cross2(const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b)
{
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

// Monotone chain on 2D points; returns indices in counterclockwise order.
std::vector<Eigen::Index> monotone_chain(const std::vector<Eigen::Vector2d>& pts)
{
    const auto count = static_cast<Eigen::Index>(pts.size());
    std::vector<Eigen::Index> order(pts.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return pts[a].x() < pts[b].x() || (pts[a].x() == pts[b].x() && pts[a].y() < pts[b].y());
    });
    // Drop exact duplicates.
    order.erase(std::unique(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return pts[a] == pts[b]; }),
        order.end());
    if (order.size() <= 1 || count == 0)
        return order;

    double scale = 0.0;
    for (const auto& p : pts)
        scale = std::max(scale, p.cwiseAbs().maxCoeff());
    const double eps = 1e-13 * std::max(1.0, scale * scale);

    std::vector<Eigen::Index> hull(2 * order.size());
    std::size_t k = 0;
    for (auto idx : order)
    {
        while (k >= 2 && cross2(pts[hull[k - 2]], pts[hull[k - 1]], pts[idx]) <= eps)
            --k;
        hull[k++] = idx;
    }
    const std::size_t lower = k + 1;
    for (auto it = order.rbegin() + 1; it != order.rend(); ++it)
    {
        while (k >= lower && cross2(pts[hull[k - 2]], pts[hull[k - 1]], pts[*it]) <= eps)
            --k;
        hull[k++] = *it;
    }
    hull.resize(k - 1);
    if (hull.size() == 2 && pts[hull[0]] == pts[hull[1]])
        hull.resize(1);
    return hull;
}

// Sign of det[b - a, c - a, p - a]: floating-point filter, exact rational fallback.
int orient3d(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c, const Eigen::Vector3d& p)
{
    const Eigen::Vector3d u = b - a, v = c - a, w = p - a;
    const double det = u.cross(v).dot(w);
    const double perm = (std::abs(u.y() * v.z()) + std::abs(u.z() * v.y())) * std::abs(w.x())
        + (std::abs(u.z() * v.x()) + std::abs(u.x() * v.z())) * std::abs(w.y())
        + (std::abs(u.x() * v.y()) + std::abs(u.y() * v.x())) * std::abs(w.z());
    const double bound = 1e-14 * perm;
    if (det > bound)
        return 1;
    if (det < -bound)
        return -1;
    using Q = boost::multiprecision::cpp_rational;
    const Q ux = Q(b.x()) - Q(a.x()), uy = Q(b.y()) - Q(a.y()), uz = Q(b.z()) - Q(a.z());
    const Q vx = Q(c.x()) - Q(a.x()), vy = Q(c.y()) - Q(a.y()), vz = Q(c.z()) - Q(a.z());
    const Q wx = Q(p.x()) - Q(a.x()), wy = Q(p.y()) - Q(a.y()), wz = Q(p.z()) - Q(a.z());
    const Q e = (uy * vz - uz * vy) * wx + (uz * vx - ux * vz) * wy + (ux * vy - uy * vx) * wz;
    return e > 0 ? 1 : (e < 0 ? -1 : 0);
}

// Triangulated 3D hull of points with affine rank 3. Face (a, b, c) is
// oriented so that orient3d(a, b, c, x) < 0 for interior x.
struct Hull3
{
    struct Face
    {
        int a, b, c;
        bool alive = true;
    };

    static std::vector<Face> build(const std::vector<Eigen::Vector3d>& pts)
    {
        std::vector<int> order(pts.size());
        std::iota(order.begin(), order.end(), 0);
        std::mt19937 rng(1);
        for (int attempt = 0; attempt < 4; ++attempt)
        {
            std::vector<Face> faces;
            if (incremental(pts, order, faces))
                return faces;
            std::shuffle(order.begin(), order.end(), rng);
        }
        return brute_force(pts);
    }

    // Every triple whose plane supports the point set. O(count^4); only a fallback.
    static std::vector<Face> brute_force(const std::vector<Eigen::Vector3d>& pts)
    {
        const int count = static_cast<int>(pts.size());
        std::vector<Face> out;
        for (int i = 0; i < count; ++i)
            for (int j = i + 1; j < count; ++j)
                for (int k = j + 1; k < count; ++k)
                {
                    bool below = true, above = true;
                    for (int q = 0; q < count && (below || above); ++q)
                    {
                        const int o = orient3d(pts[i], pts[j], pts[k], pts[q]);
                        below = below && o <= 0;
                        above = above && o >= 0;
                    }
                    if (below && !above)
                        out.push_back({i, j, k, true});
                    else if (above && !below)
                        out.push_back({i, k, j, true});
                }
        return out;
    }

    // False when the triangulation became inconsistent (degenerate input).
    static bool incremental(const std::vector<Eigen::Vector3d>& pts, const std::vector<int>& order,
        std::vector<Face>& result)
    {
        const int count = static_cast<int>(pts.size());

        // Initial tetrahedron from extreme points.
        int i0 = 0;
        for (int i = 1; i < count; ++i)
            if (pts[i].x() < pts[i0].x())
                i0 = i;
        int i1 = i0;
        double best = -1.0;
        for (int i = 0; i < count; ++i)
            if ((pts[i] - pts[i0]).norm() > best)
            {
                best = (pts[i] - pts[i0]).norm();
                i1 = i;
            }
        int i2 = i0;
        best = -1.0;
        const Eigen::Vector3d dir = (pts[i1] - pts[i0]).normalized();
        for (int i = 0; i < count; ++i)
        {
            const double dist = (pts[i] - pts[i0]).cross(dir).norm();
            if (dist > best)
            {
                best = dist;
                i2 = i;
            }
        }
        int i3 = i0;
        best = -1.0;
        const Eigen::Vector3d pn = (pts[i1] - pts[i0]).cross(pts[i2] - pts[i0]).normalized();
        for (int i = 0; i < count; ++i)
        {
            const double dist = std::abs(pn.dot(pts[i] - pts[i0]));
            if (dist > best)
            {
                best = dist;
                i3 = i;
            }
        }
        const int o = orient3d(pts[i0], pts[i1], pts[i2], pts[i3]);
        if (o == 0)
            return false;
        if (o > 0)
            std::swap(i1, i2);

        std::vector<Face> faces;
        std::map<std::pair<int, int>, int> edge_owner;
        auto push = [&](int a, int b, int c) {
            faces.push_back({a, b, c, true});
            const int id = static_cast<int>(faces.size()) - 1;
            edge_owner[{a, b}] = id;
            edge_owner[{b, c}] = id;
            edge_owner[{c, a}] = id;
        };
        // (i0, i1, i2) has i3 on its negative side.
        push(i0, i1, i2);
        push(i0, i3, i1);
        push(i1, i3, i2);
        push(i0, i2, i3);
        auto twin = [&](int a, int b) {
            auto it = edge_owner.find({b, a});
            return it == edge_owner.end() || !faces[static_cast<std::size_t>(it->second)].alive ? -1 : it->second;
        };
        auto sees = [&](int f, int p) {
            const Face& fc = faces[static_cast<std::size_t>(f)];
            return orient3d(pts[fc.a], pts[fc.b], pts[fc.c], pts[p]) > 0;
        };

        for (int p : order)
        {
            if (p == i0 || p == i1 || p == i2 || p == i3)
                continue;
            int seed = -1;
            for (int f = 0; f < static_cast<int>(faces.size()) && seed < 0; ++f)
                if (faces[f].alive && sees(f, p))
                    seed = f;
            if (seed < 0)
                continue;

            std::vector<bool> is_visible(faces.size(), false);
            std::vector<int> visible{seed};
            is_visible[static_cast<std::size_t>(seed)] = true;
            std::vector<std::pair<int, int>> horizon;
            for (std::size_t q = 0; q < visible.size(); ++q)
            {
                const Face f = faces[static_cast<std::size_t>(visible[q])];
                const int v[3] = {f.a, f.b, f.c};
                for (int e = 0; e < 3; ++e)
                {
                    const int g = twin(v[e], v[(e + 1) % 3]);
                    if (g < 0)
                        return false;
                    if (!is_visible[static_cast<std::size_t>(g)] && sees(g, p))
                    {
                        is_visible[static_cast<std::size_t>(g)] = true;
                        visible.push_back(g);
                    }
                }
            }
            for (int f : visible)
            {
                const Face& fv = faces[static_cast<std::size_t>(f)];
                const int v[3] = {fv.a, fv.b, fv.c};
                for (int e = 0; e < 3; ++e)
                    if (!is_visible[static_cast<std::size_t>(twin(v[e], v[(e + 1) % 3]))])
                        horizon.emplace_back(v[e], v[(e + 1) % 3]);
            }
            // The horizon must be one simple cycle.
            std::map<int, int> next;
            for (const auto& [a, b] : horizon)
                if (!next.emplace(a, b).second)
                    return false;
            if (horizon.size() < 3)
                return false;
            int at = horizon.front().first;
            std::size_t steps = 0;
            do
            {
                auto it = next.find(at);
                if (it == next.end())
                    return false;
                at = it->second;
                ++steps;
            } while (at != horizon.front().first && steps <= horizon.size());
            if (steps != horizon.size())
                return false;

            for (int f : visible)
            {
                faces[static_cast<std::size_t>(f)].alive = false;
                const Face& fv = faces[static_cast<std::size_t>(f)];
                const int v[3] = {fv.a, fv.b, fv.c};
                for (int e = 0; e < 3; ++e)
                {
                    auto it = edge_owner.find({v[e], v[(e + 1) % 3]});
                    if (it != edge_owner.end() && it->second == f)
                        edge_owner.erase(it);
                }
            }
            for (const auto& [a, b] : horizon)
                push(a, b, p);
        }
        for (const auto& f : faces)
            if (f.alive)
                result.push_back(f);
        return true;
    }
};

// Appends a (unit normal, offset) row unless an equivalent one exists.
void push_unique_row(std::vector<Vector>& normals, std::vector<double>& offsets, const Vector& a, double b)
{
    for (std::size_t k = 0; k < normals.size(); ++k)
        if ((normals[k] - a).norm() < 1e-9 && std::abs(offsets[k] - b) <= 1e-9 * std::max(1.0, std::abs(b)))
            return;
    normals.push_back(a);
    offsets.push_back(b);
}

} // namespace

namespace detail
{

HullResult hull_low_dim(const Matrix& points)
{
    const auto n = points.rows();
    const auto count = points.cols();
    if (count == 0)
        throw GeometryError("hull: empty point set");
    if (n > kExactConversionDim)
        throw GeometryError("hull: dimension above exact-conversion limit");

    const Vector mean = points.rowwise().mean();
    const Matrix centered = points.colwise() - mean;
    const double scale = std::max(1.0, points.cwiseAbs().maxCoeff());

    Eigen::JacobiSVD<Matrix> svd(centered, Eigen::ComputeFullU);
    const Vector sigma = svd.singularValues();
    Eigen::Index rank = 0;
    const double sigma_tol = 1e-10 * scale * std::sqrt(static_cast<double>(count));
    for (Eigen::Index i = 0; i < sigma.size(); ++i)
        if (sigma(i) > sigma_tol)
            ++rank;
    const Matrix U = svd.matrixU();
    const Matrix basis = U.leftCols(rank);
    const Matrix coords = basis.transpose() * centered; // rank x count

    HullResult out;
    std::vector<Vector> rows;
    std::vector<double> offs;

    if (rank == 0)
    {
        out.vertices.push_back(0);
    }
    else if (rank == 1)
    {
        Eigen::Index lo = 0, hi = 0;
        for (Eigen::Index k = 1; k < count; ++k)
        {
            if (coords(0, k) < coords(0, lo))
                lo = k;
            if (coords(0, k) > coords(0, hi))
                hi = k;
        }
        out.vertices = {lo, hi};
        const Vector u = basis.col(0);
        push_unique_row(rows, offs, u, u.dot(points.col(hi)));
        push_unique_row(rows, offs, -u, -u.dot(points.col(lo)));
    }
    else if (rank == 2)
    {
        std::vector<Eigen::Vector2d> pts(static_cast<std::size_t>(count));
        for (Eigen::Index k = 0; k < count; ++k)
            pts[static_cast<std::size_t>(k)] = coords.col(k);
        out.vertices = monotone_chain(pts);
        const auto m = out.vertices.size();
        for (std::size_t k = 0; k < m; ++k)
        {
            const auto& a = pts[static_cast<std::size_t>(out.vertices[k])];
            const auto& b = pts[static_cast<std::size_t>(out.vertices[(k + 1) % m])];
            Eigen::Vector2d outward(b.y() - a.y(), a.x() - b.x());
            const double len = outward.norm();
            if (len == 0.0)
                continue;
            outward /= len;
            const Vector lifted = basis * outward;
            push_unique_row(rows, offs, lifted, lifted.dot(points.col(out.vertices[k])));
        }
    }
    else
    {
        std::vector<Eigen::Vector3d> pts(static_cast<std::size_t>(count));
        for (Eigen::Index k = 0; k < count; ++k)
            pts[static_cast<std::size_t>(k)] = coords.col(k);
        const auto faces = Hull3::build(pts);
        std::vector<bool> used(static_cast<std::size_t>(count), false);
        for (const auto& f : faces)
        {
            used[f.a] = used[f.b] = used[f.c] = true;
            const Eigen::Vector3d e1 = pts[f.b] - pts[f.a], e2 = pts[f.c] - pts[f.a];
            Eigen::Vector3d nrm = e1.cross(e2);
            const double len = nrm.norm();
            // Sliver triangles carry no reliable plane; their neighbors bound the set.
            if (!(len > 1e-12 * e1.norm() * e2.norm()))
                continue;
            nrm /= len;
            const Vector lifted = basis * nrm;
            // Offset from all points, so rounding in the normal cannot cut any off.
            push_unique_row(rows, offs, lifted, (lifted.transpose() * points).maxCoeff());
        }
        for (Eigen::Index k = 0; k < count; ++k)
            if (used[static_cast<std::size_t>(k)])
                out.vertices.push_back(k);
    }

    // Equalities for the orthogonal complement of the affine hull.
    for (Eigen::Index j = rank; j < n; ++j)
    {
        const Vector u = U.col(j);
        const double level = u.dot(mean);
        push_unique_row(rows, offs, u, level);
        push_unique_row(rows, offs, -u, -level);
    }

    out.normals.resize(static_cast<Eigen::Index>(rows.size()), n);
    out.offsets.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k)
    {
        out.normals.row(static_cast<Eigen::Index>(k)) = rows[k].transpose();
        out.offsets(static_cast<Eigen::Index>(k)) = offs[k];
    }
    // Facet offsets from a single vertex can sit slightly inside other
    // near-coplanar points; lift each offset to the true maximum.
    if (out.normals.rows() > 0)
        out.offsets = out.offsets.cwiseMax((out.normals * points).rowwise().maxCoeff());
    return out;
}

bool zonotope_vertices(const Zonotope& z, Matrix& out)
{
    const auto n = z.dim();
    // Drop zero generators.
    std::vector<Vector> gens;
    for (Eigen::Index k = 0; k < z.order(); ++k)
        if (z.generators().col(k).cwiseAbs().maxCoeff() > 0.0)
            gens.push_back(z.generators().col(k));

    if (gens.empty())
    {
        out = z.center();
        return true;
    }
    if (n == 2)
    {
        // Orient to the upper half plane, sort by angle, walk the boundary.
        for (auto& g : gens)
            if (g(1) < 0.0 || (g(1) == 0.0 && g(0) < 0.0))
                g = -g;
        std::sort(gens.begin(), gens.end(),
            [](const Vector& a, const Vector& b) { return std::atan2(a(1), a(0)) < std::atan2(b(1), b(0)); });
        Vector p = z.center();
        for (const auto& g : gens)
            p -= g;
        const auto m = static_cast<Eigen::Index>(gens.size());
        out.resize(2, 2 * m);
        for (Eigen::Index k = 0; k < m; ++k)
        {
            out.col(k) = p;
            p += 2.0 * gens[static_cast<std::size_t>(k)];
        }
        for (Eigen::Index k = 0; k < m; ++k)
        {
            out.col(m + k) = p;
            p -= 2.0 * gens[static_cast<std::size_t>(k)];
        }
        return true;
    }
    const auto g = static_cast<Eigen::Index>(gens.size());
    if (g > 14)
        return false;
    const Eigen::Index combos = Eigen::Index(1) << g;
    out.resize(n, combos);
    for (Eigen::Index mask = 0; mask < combos; ++mask)
    {
        Vector p = z.center();
        for (Eigen::Index k = 0; k < g; ++k)
            p += ((mask >> k) & 1 ? 1.0 : -1.0) * gens[static_cast<std::size_t>(k)];
        out.col(mask) = p;
    }
    return true;
}

bool zonotope_hrep(const Zonotope& z, Matrix& normals, Vector& offsets)
{
    const auto n = z.dim();
    if (n != 2 && n != 3)
        return false;
    const Matrix& G = z.generators();
    if (G.cols() == 0 || Eigen::FullPivLU<Matrix>(G).rank() < n)
        return false;

    std::vector<Vector> rows;
    std::vector<double> offs;
    auto add = [&](Vector a) {
        const double len = a.norm();
        if (len < 1e-12 * std::max(1.0, G.cwiseAbs().maxCoeff()))
            return;
        a /= len;
        const double off = a.dot(z.center()) + (G.transpose() * a).cwiseAbs().sum();
        push_unique_row(rows, offs, a, off);
        push_unique_row(rows, offs, -a, -a.dot(z.center()) + (G.transpose() * a).cwiseAbs().sum());
    };
    if (n == 2)
    {
        for (Eigen::Index i = 0; i < G.cols(); ++i)
            add(Eigen::Vector2d(-G(1, i), G(0, i)));
    }
    else
    {
        for (Eigen::Index i = 0; i < G.cols(); ++i)
            for (Eigen::Index j = i + 1; j < G.cols(); ++j)
            {
                const Eigen::Vector3d gi = G.col(i);
                const Eigen::Vector3d gj = G.col(j);
                add(gi.cross(gj));
            }
    }
    normals.resize(static_cast<Eigen::Index>(rows.size()), n);
    offsets.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k)
    {
        normals.row(static_cast<Eigen::Index>(k)) = rows[k].transpose();
        offsets(static_cast<Eigen::Index>(k)) = offs[k];
    }
    return true;
}

} // namespace detail

VPolytope convex_hull_2d(const Matrix& points)
{
    if (points.cols() == 0)
        throw GeometryError("convex_hull_2d: empty input");
    if (points.rows() != 2)
        throw DimensionError("convex_hull_2d: points must be 2-dimensional");
    std::vector<Eigen::Vector2d> pts(static_cast<std::size_t>(points.cols()));
    for (Eigen::Index k = 0; k < points.cols(); ++k)
        pts[static_cast<std::size_t>(k)] = points.col(k);
    const auto idx = monotone_chain(pts);
    Matrix out(2, static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k)
        out.col(static_cast<Eigen::Index>(k)) = points.col(idx[k]);
    return VPolytope(std::move(out));
}

VPolytope convex_hull_2d(const std::vector<Vector>& points)
{
    if (points.empty())
        throw GeometryError("convex_hull_2d: empty input");
    return convex_hull_2d(VPolytope(points).vertices());
}

VPolytope reduce_vertices(const VPolytope& p)
{
    if (p.dim() > kExactConversionDim || p.size() <= 1)
        return p;
    if (p.dim() == 2)
        return convex_hull_2d(p.vertices());
    const auto hull = detail::hull_low_dim(p.vertices());
    Matrix out(p.dim(), static_cast<Eigen::Index>(hull.vertices.size()));
    for (std::size_t k = 0; k < hull.vertices.size(); ++k)
        out.col(static_cast<Eigen::Index>(k)) = p.vertices().col(hull.vertices[k]);
    return VPolytope(std::move(out));
}

HPolytope vrep_to_hrep(const VPolytope& p, bool* over_approx)
{
    if (p.dim() <= kExactConversionDim)
    {
        const auto hull = detail::hull_low_dim(p.vertices());
        return HPolytope(hull.normals, hull.offsets);
    }
    if (over_approx)
        *over_approx = true;
    return template_hull(p, default_template(p.dim()));
}

VPolytope hrep_to_vrep(const HPolytope& p)
{
    const auto n = p.dim();
    if (n > kExactConversionDim)
        throw GeometryError("hrep_to_vrep: exact vertex enumeration limited to dimension <= 3, got "
                            + std::to_string(n));
    if (n == 0)
        throw DimensionError("hrep_to_vrep: zero-dimensional polytope");
    if (is_empty(p))
        throw GeometryError("hrep_to_vrep: empty polytope");
    for (Eigen::Index i = 0; i < n; ++i)
        for (double sgn : {1.0, -1.0})
            if (!std::isfinite(support(p, sgn * Vector::Unit(n, i)).value))
                throw GeometryError("hrep_to_vrep: unbounded polytope");

    const Matrix& A = p.normals();
    const Vector& b = p.offsets();
    const auto m = p.size();
    std::vector<Vector> found;
    std::vector<Eigen::Index> pick(static_cast<std::size_t>(n));

    auto feasible = [&](const Vector& x) {
        const Vector lhs = A * x;
        for (Eigen::Index i = 0; i < m; ++i)
            if (lhs(i) > b(i) + 1e-7 * std::max(1.0, std::abs(b(i))))
                return false;
        return true;
    };
    auto visit = [&](auto&& self, Eigen::Index start, Eigen::Index depth) -> void {
        if (depth == n)
        {
            Matrix M(n, n);
            Vector rhs(n);
            for (Eigen::Index k = 0; k < n; ++k)
            {
                M.row(k) = A.row(pick[static_cast<std::size_t>(k)]);
                rhs(k) = b(pick[static_cast<std::size_t>(k)]);
            }
            Eigen::FullPivLU<Matrix> lu(M);
            if (lu.rank() < n || std::abs(lu.determinant()) < 1e-12)
                return;
            const Vector x = lu.solve(rhs);
            if (x.allFinite() && feasible(x))
                found.push_back(x);
            return;
        }
        for (Eigen::Index i = start; i < m; ++i)
        {
            pick[static_cast<std::size_t>(depth)] = i;
            self(self, i + 1, depth + 1);
        }
    };
    visit(visit, 0, 0);
    if (found.empty())
    {
        // Numerically degenerate: fall back to an LP witness.
        found.push_back(support(p, Vector::Unit(n, 0)).witness);
    }
    return reduce_vertices(VPolytope(found));
}

VPolytope to_vpolytope(const SetRep& s, bool* over_approx)
{
    return std::visit(
        overloaded{[](const EmptySet&) -> VPolytope { throw GeometryError("to_vpolytope: empty set"); },
            [](const VPolytope& v) { return v; },
            [](const Box& b) {
                const auto n = b.dim();
                if (n > 16)
                    throw GeometryError("to_vpolytope: box dimension too large for corner enumeration");
                const Eigen::Index count = Eigen::Index(1) << n;
                Matrix corners(n, count);
                for (Eigen::Index mask = 0; mask < count; ++mask)
                    for (Eigen::Index i = 0; i < n; ++i)
                        corners(i, mask) = (mask >> i) & 1 ? b.hi()(i) : b.lo()(i);
                return reduce_vertices(VPolytope(std::move(corners)));
            },
            [&](const Zonotope& z) {
                Matrix pts;
                if (!detail::zonotope_vertices(z, pts))
                {
                    if (z.dim() > kExactConversionDim)
                        throw GeometryError("to_vpolytope: zonotope too large for vertex enumeration");
                    if (over_approx)
                        *over_approx = true;
                    return hrep_to_vrep(template_hull(z, default_template(z.dim())));
                }
                return reduce_vertices(VPolytope(std::move(pts)));
            },
            [](const HPolytope& p) { return hrep_to_vrep(p); }},
        s);
}

HPolytope to_hpolytope(const SetRep& s, bool* over_approx)
{
    return std::visit(
        overloaded{[](const EmptySet& e) -> HPolytope {
                       Matrix N = Matrix::Zero(2, e.dim);
                       if (e.dim == 0)
                           throw GeometryError("to_hpolytope: zero-dimensional empty set");
                       N(0, 0) = 1.0;
                       N(1, 0) = -1.0;
                       return HPolytope(N, Vector::Constant(2, -1.0));
                   },
            [](const HPolytope& p) { return p; },
            [](const Box& b) {
                const auto n = b.dim();
                Vector off(2 * n);
                off.head(n) = b.hi();
                off.tail(n) = -b.lo();
                return HPolytope::from_unit_normals(axis_template(n), off);
            },
            [&](const VPolytope& v) { return vrep_to_hrep(v, over_approx); },
            [&](const Zonotope& z) {
                Matrix N;
                Vector off;
                if (detail::zonotope_hrep(z, N, off))
                    return HPolytope(N, off);
                if (z.dim() <= kExactConversionDim)
                {
                    Matrix pts;
                    if (detail::zonotope_vertices(z, pts))
                        return vrep_to_hrep(VPolytope(std::move(pts)));
                }
                if (over_approx)
                    *over_approx = true;
                return template_hull(z, default_template(z.dim()));
            }},
        s);
}

VPolytope project_2d(const SetRep& s, Eigen::Index i, Eigen::Index j)
{
    const auto n = dim(s);
    if (i < 0 || j < 0 || i >= n || j >= n || i == j)
        throw DimensionError("project_2d: invalid coordinate pair");
    if (is_empty(s))
        throw GeometryError("project_2d: empty set");

    auto lift = [&](const Eigen::Vector2d& u) {
        Vector d = Vector::Zero(n);
        d(i) = u.x();
        d(j) = u.y();
        return d;
    };
    std::vector<Vector> pts;
    auto add_witness = [&](const Eigen::Vector2d& u) {
        const SupportResult r = support(s, lift(u));
        if (!std::isfinite(r.value))
            throw GeometryError("project_2d: unbounded set");
        pts.push_back(Eigen::Vector2d(r.witness(i), r.witness(j)));
    };
    for (int k = 0; k < 8; ++k)
    {
        const double ang = k * M_PI / 4.0;
        add_witness(Eigen::Vector2d(std::cos(ang), std::sin(ang)));
    }

    // Refine along outward edge normals until every edge is supporting.
    VPolytope hull = convex_hull_2d(pts);
    for (int round = 0; round < 64; ++round)
    {
        bool grew = false;
        const auto& V = hull.vertices();
        const auto m = V.cols();
        if (m < 3)
            break;
        for (Eigen::Index k = 0; k < m; ++k)
        {
            const Eigen::Vector2d a = V.col(k);
            const Eigen::Vector2d b = V.col((k + 1) % m);
            Eigen::Vector2d u(b.y() - a.y(), a.x() - b.x());
            if (u.norm() == 0.0)
                continue;
            u.normalize();
            const SupportResult r = support(s, lift(u));
            if (r.value > u.dot(a) + 1e-10 * std::max(1.0, std::abs(r.value)))
            {
                pts.push_back(Eigen::Vector2d(r.witness(i), r.witness(j)));
                grew = true;
            }
        }
        if (!grew)
            break;
        hull = convex_hull_2d(pts);
    }
    return hull;
}

} // namespace setreach
