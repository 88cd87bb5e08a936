#include "setreach/linreach.hpp"

#include <cmath>
#include <stdexcept>

namespace setreach
{

void LinearSystem::validate() const
{
    const auto n = A.rows();
    if (n == 0 || A.cols() != n)
        throw DimensionError("A must be square and nonempty, got " + std::to_string(A.rows()) + "x"
                             + std::to_string(A.cols()));
    if (!A.allFinite())
        throw GeometryError("A has non-finite entries");
    if (B.has_value() != V.has_value())
        throw GeometryError("B and V must be given together");
    if (B)
    {
        if (B->rows() != n)
            throw DimensionError("B has " + std::to_string(B->rows()) + " rows, A has " + std::to_string(n));
        if (!B->allFinite())
            throw GeometryError("B has non-finite entries");
        if (setreach::dim(*V) != B->cols())
            throw DimensionError("V has dimension " + std::to_string(setreach::dim(*V)) + ", B has "
                                 + std::to_string(B->cols()) + " columns");
        if (is_empty(*V))
            throw GeometryError("V is empty");
        bounding_box(*V); // throws when unbounded
    }
    if (c)
    {
        if (c->size() != n)
            throw DimensionError("c has " + std::to_string(c->size()) + " entries, A has " + std::to_string(n));
        if (!c->allFinite())
            throw GeometryError("c has non-finite entries");
    }
    if (setreach::dim(X0) != n)
        throw DimensionError("X0 has dimension " + std::to_string(setreach::dim(X0)) + ", A has " + std::to_string(n));
    if (is_empty(X0))
        throw GeometryError("X0 is empty");
    bounding_box(X0);
}

std::optional<SetRep> input_set(const LinearSystem& sys, bool* over_approx)
{
    std::optional<SetRep> U;
    if (sys.B)
        U = linear_map(*sys.B, *sys.V, over_approx);
    if (sys.c)
        U = U ? translate(*U, *sys.c) : singleton(*sys.c);
    return U;
}

void ReachConfig::validate() const
{
    if (!(r > 0.0) || !std::isfinite(r))
        throw std::invalid_argument("time step r must be positive, got " + std::to_string(r));
    if (!(L >= 0.0) || !std::isfinite(L))
        throw std::invalid_argument("horizon L must be a nonnegative number");
    if (mode == Termination::BadSet && !bad_set)
        throw std::invalid_argument("bad_set mode needs a bad set");
}

std::string to_string(Strategy s)
{
    switch (s)
    {
        case Strategy::Vertices: return "vertices";
        case Strategy::Facets: return "facets";
        case Strategy::Lazy: return "lazy";
    }
    return "?";
}

std::string to_string(BloatPolicy p)
{
    switch (p)
    {
        case BloatPolicy::SmallR: return "small_r";
        case BloatPolicy::OnceHull: return "once_hull";
        case BloatPolicy::ErrorBall: return "error_ball";
    }
    return "?";
}

std::string to_string(Termination t)
{
    switch (t)
    {
        case Termination::Bounded: return "bounded";
        case Termination::BadSet: return "bad_set";
        case Termination::Fixpoint: return "fixpoint";
    }
    return "?";
}

std::string to_string(FlowStatus s)
{
    switch (s)
    {
        case FlowStatus::Completed: return "completed";
        case FlowStatus::BadReached: return "bad_reached";
        case FlowStatus::Fixpoint: return "fixpoint";
        case FlowStatus::Horizon: return "horizon";
        case FlowStatus::Incomplete: return "incomplete";
        case FlowStatus::Stalled: return "stalled";
    }
    return "?";
}

Matrix input_gain(const Matrix& A, double r)
{
    if (A.rows() != A.cols())
        throw DimensionError("input_gain: A must be square");
    const auto n = A.rows();
    // exp([[A, I], [0, 0]] r) = [[e^{Ar}, int_0^r e^{As} ds], [0, I]]
    Matrix M = Matrix::Zero(2 * n, 2 * n);
    M.topLeftCorner(n, n) = A;
    M.topRightCorner(n, n) = Matrix::Identity(n, n);
    return mat_exp(M, r).topRightCorner(n, n);
}

SimTrace simulate(const LinearSystem& sys, const Vector& x0, const std::vector<Vector>& zeta, double r)
{
    const auto n = sys.dim();
    if (x0.size() != n)
        throw DimensionError("simulate: x0 has dimension " + std::to_string(x0.size()));
    Matrix Ad = sys.A;
    Matrix gain = Matrix::Identity(n, n);
    if (sys.time_kind == TimeKind::Continuous)
    {
        if (!(r > 0.0))
            throw std::invalid_argument("simulate: continuous system needs r > 0");
        Ad = mat_exp(sys.A, r);
        gain = input_gain(sys.A, r);
    }
    const Vector drift = sys.c ? Vector(gain * *sys.c) : Vector::Zero(n);
    Matrix Bd;
    if (sys.B)
        Bd = gain * *sys.B;

    SimTrace trace;
    trace.zeta = zeta;
    trace.xi.reserve(zeta.size() + 1);
    trace.xi.push_back(x0);
    for (std::size_t k = 0; k < zeta.size(); ++k)
    {
        Vector next = Ad * trace.xi.back() + drift;
        if (sys.B)
        {
            if (zeta[k].size() != sys.B->cols())
                throw DimensionError("simulate: input " + std::to_string(k) + " has wrong dimension");
            if (!member(*sys.V, zeta[k]))
                throw std::invalid_argument("simulate: input " + std::to_string(k) + " is outside V");
            next += Bd * zeta[k];
        }
        else if (zeta[k].size() != 0)
            throw DimensionError("simulate: autonomous system takes empty inputs");
        trace.xi.push_back(std::move(next));
    }
    return trace;
}

} // namespace setreach
