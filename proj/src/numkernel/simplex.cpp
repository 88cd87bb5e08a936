#include "setreach/numkernel.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace setreach
{

namespace
{

constexpr double kPivotTol = 1e-11;
constexpr int kMaxPivots = 200000;

// Dense tableau over the split problem
//   A u - A w + s = b,  u, w, s >= 0   (plus artificials for rows with b < 0)
// Columns: [u (n) | w (n) | s (m) | art (k)] followed by the rhs column.
class Tableau
{
    public:
        Tableau(const Matrix& A, const Vector& b)
            : m_(A.rows()), n_(A.cols())
        {
            std::vector<Eigen::Index> negative;
            for (Eigen::Index i = 0; i < m_; ++i)
                if (b(i) < 0.0)
                    negative.push_back(i);
            n_art_ = static_cast<Eigen::Index>(negative.size());
            cols_ = 2 * n_ + m_ + n_art_;
            T_ = Matrix::Zero(m_ + 1, cols_ + 1);
            basis_.assign(static_cast<std::size_t>(m_), 0);

            Eigen::Index art = 0;
            for (Eigen::Index i = 0; i < m_; ++i)
            {
                const double sign = b(i) < 0.0 ? -1.0 : 1.0;
                T_.row(i).segment(0, n_) = sign * A.row(i);
                T_.row(i).segment(n_, n_) = -sign * A.row(i);
                T_(i, 2 * n_ + i) = sign;
                T_(i, cols_) = sign * b(i);
                if (sign < 0.0)
                {
                    const Eigen::Index col = 2 * n_ + m_ + art++;
                    T_(i, col) = 1.0;
                    basis_[static_cast<std::size_t>(i)] = col;
                }
                else
                {
                    basis_[static_cast<std::size_t>(i)] = 2 * n_ + i;
                }
            }
            allowed_.assign(static_cast<std::size_t>(cols_), true);
        }

        // Returns false when the relaxed problem is infeasible.
        bool phase_one()
        {
            if (n_art_ == 0)
                return true;
            Vector cost = Vector::Zero(cols_);
            cost.tail(n_art_).setConstant(-1.0);
            set_objective(cost);
            if (!iterate())
                return false; // cannot be unbounded; treat defensively as failure
            if (T_(m_, cols_) < -kLpTolerance * scale_hint())
                return false;

            // Drive artificials out of the basis.
            for (Eigen::Index i = 0; i < m_; ++i)
            {
                if (!is_artificial(basis_[static_cast<std::size_t>(i)]))
                    continue;
                Eigen::Index pivot_col = -1;
                for (Eigen::Index j = 0; j < 2 * n_ + m_; ++j)
                    if (std::abs(T_(i, j)) > kPivotTol)
                    {
                        pivot_col = j;
                        break;
                    }
                if (pivot_col >= 0)
                    pivot(i, pivot_col);
                // Otherwise the row is redundant; the artificial stays basic at level zero.
            }
            for (Eigen::Index j = 2 * n_ + m_; j < cols_; ++j)
                allowed_[static_cast<std::size_t>(j)] = false;
            return true;
        }

        // Returns false when unbounded.
        bool phase_two(const Vector& c)
        {
            Vector cost = Vector::Zero(cols_);
            cost.segment(0, n_) = c;
            cost.segment(n_, n_) = -c;
            set_objective(cost);
            return iterate();
        }

        Vector solution() const
        {
            Vector x = Vector::Zero(n_);
            for (Eigen::Index i = 0; i < m_; ++i)
            {
                const Eigen::Index col = basis_[static_cast<std::size_t>(i)];
                if (col < n_)
                    x(col) += T_(i, cols_);
                else if (col < 2 * n_)
                    x(col - n_) -= T_(i, cols_);
            }
            return x;
        }

        // True when some nonbasic column could enter without changing the
        // objective, i.e. the optimum may not be unique.
        bool has_alternative_optimum() const
        {
            std::vector<bool> basic(static_cast<std::size_t>(cols_), false);
            for (auto col : basis_)
                basic[static_cast<std::size_t>(col)] = true;
            for (Eigen::Index j = 0; j < 2 * n_ + m_; ++j)
            {
                if (basic[static_cast<std::size_t>(j)])
                    continue;
                if (j < 2 * n_)
                {
                    const Eigen::Index twin = j < n_ ? j + n_ : j - n_;
                    if (basic[static_cast<std::size_t>(twin)])
                        continue;
                }
                if (std::abs(T_(m_, j)) <= kLpTolerance)
                    return true;
            }
            return false;
        }

    private:
        bool is_artificial(Eigen::Index col) const { return col >= 2 * n_ + m_; }

        double scale_hint() const { return std::max(1.0, T_.col(cols_).head(m_).cwiseAbs().maxCoeff()); }

        void set_objective(const Vector& cost)
        {
            T_.row(m_).setZero();
            T_.row(m_).head(cols_) = -cost.transpose();
            for (Eigen::Index i = 0; i < m_; ++i)
            {
                const double cb = cost(basis_[static_cast<std::size_t>(i)]);
                if (cb != 0.0)
                    T_.row(m_) += cb * T_.row(i);
            }
        }

        void pivot(Eigen::Index row, Eigen::Index col)
        {
            T_.row(row) /= T_(row, col);
            for (Eigen::Index i = 0; i <= m_; ++i)
            {
                if (i == row)
                    continue;
                const double f = T_(i, col);
                if (f != 0.0)
                    T_.row(i) -= f * T_.row(row);
            }
            basis_[static_cast<std::size_t>(row)] = col;
        }

        // Bland's rule. Returns false on unboundedness.
        bool iterate()
        {
            for (int it = 0; it < kMaxPivots; ++it)
            {
                Eigen::Index enter = -1;
                for (Eigen::Index j = 0; j < cols_; ++j)
                    if (allowed_[static_cast<std::size_t>(j)] && T_(m_, j) < -kLpTolerance)
                    {
                        enter = j;
                        break;
                    }
                if (enter < 0)
                    return true;

                Eigen::Index leave = -1;
                double best = std::numeric_limits<double>::infinity();
                for (Eigen::Index i = 0; i < m_; ++i)
                {
                    const double a = T_(i, enter);
                    if (a <= kPivotTol)
                        continue;
                    const double ratio = std::max(0.0, T_(i, cols_)) / a;
                    if (ratio < best - 1e-14
                        || (std::abs(ratio - best) <= 1e-14 && leave >= 0
                            && basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)]))
                    {
                        best = ratio;
                        leave = i;
                    }
                }
                if (leave < 0)
                    return false;
                pivot(leave, enter);
            }
            throw std::runtime_error("lp_max: pivot limit exceeded");
        }

        Eigen::Index m_;
        Eigen::Index n_;
        Eigen::Index n_art_ = 0;
        Eigen::Index cols_ = 0;
        Matrix T_;
        std::vector<Eigen::Index> basis_;
        std::vector<bool> allowed_;
};

struct Core
{
    LpResult result;
    bool alternative = false;
};

// Row-normalizes, drops trivial rows and runs both phases.
Core solve_core(const Vector& c, const Matrix& A, const Vector& b)
{
    Core out;
    const auto n = A.cols();

    std::vector<Eigen::Index> keep;
    Vector scale(A.rows());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
    {
        const double mx = A.row(i).cwiseAbs().maxCoeff();
        if (mx == 0.0 || A.cols() == 0)
        {
            if (b(i) < -kLpTolerance)
            {
                out.result.status = LpStatus::Infeasible;
                return out;
            }
            continue;
        }
        scale(i) = mx;
        keep.push_back(i);
    }

    Matrix As(static_cast<Eigen::Index>(keep.size()), n);
    Vector bs(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k)
    {
        const auto i = keep[k];
        As.row(static_cast<Eigen::Index>(k)) = A.row(i) / scale(i);
        bs(static_cast<Eigen::Index>(k)) = b(i) / scale(i);
    }

    Tableau tab(As, bs);
    if (!tab.phase_one())
    {
        out.result.status = LpStatus::Infeasible;
        return out;
    }
    if (!tab.phase_two(c))
    {
        out.result.status = LpStatus::Unbounded;
        return out;
    }
    out.result.status = LpStatus::Optimal;
    out.result.argmax = tab.solution();
    out.result.value = c.dot(out.result.argmax);
    out.alternative = tab.has_alternative_optimum();
    return out;
}

void check_shape(const LpProblem& prob)
{
    if (prob.constraints.rows() != prob.bounds.size())
        throw DimensionError("lp_max: constraint matrix has " + std::to_string(prob.constraints.rows())
                             + " rows but bound vector has " + std::to_string(prob.bounds.size()));
    if (prob.constraints.cols() != prob.objective.size())
        throw DimensionError("lp_max: constraint matrix has " + std::to_string(prob.constraints.cols())
                             + " columns but objective has " + std::to_string(prob.objective.size()));
}

} // namespace

LpResult lp_max(const LpProblem& prob)
{
    check_shape(prob);
    const auto n = prob.objective.size();
    Core core = solve_core(prob.objective, prob.constraints, prob.bounds);
    if (!core.result.optimal() || !core.alternative || n == 0)
        return core.result;

    // Lexicographic refinement over the optimal face.
    const double value = core.result.value;
    const double tau = 1e-3 * kLpTolerance * std::max(1.0, std::abs(value));
    const auto m = prob.constraints.rows();
    Vector best = core.result.argmax;
    for (Eigen::Index i = 0; i < n; ++i)
    {
        const Eigen::Index extra = 1 + 2 * i;
        Matrix A(m + extra, n);
        Vector b(m + extra);
        A.topRows(m) = prob.constraints;
        b.head(m) = prob.bounds;
        A.row(m) = -prob.objective.transpose();
        b(m) = -value + tau;
        for (Eigen::Index j = 0; j < i; ++j)
        {
            const double slack = 1e-3 * kLpTolerance * std::max(1.0, std::abs(best(j)));
            A.row(m + 1 + 2 * j) = Vector::Unit(n, j).transpose();
            b(m + 1 + 2 * j) = best(j) + slack;
            A.row(m + 2 + 2 * j) = -Vector::Unit(n, j).transpose();
            b(m + 2 + 2 * j) = -best(j) + slack;
        }
        Core step = solve_core(-Vector::Unit(n, i), A, b);
        if (!step.result.optimal())
            break;
        best = step.result.argmax;
        if (!step.alternative)
            break;
    }
    core.result.argmax = best;
    return core.result;
}

bool lp_feasible(const Matrix& A, const Vector& b)
{
    if (A.rows() != b.size())
        throw DimensionError("lp_feasible: shape mismatch");
    const Core core = solve_core(Vector::Zero(A.cols()), A, b);
    return core.result.status != LpStatus::Infeasible;
}

} // namespace setreach
