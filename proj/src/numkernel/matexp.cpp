#include "setreach/numkernel.hpp"

#include <array>
#include <cmath>

namespace setreach
{

namespace
{

// Backward-error thresholds on the 1-norm for the [m/m] Pade approximants
// (Higham 2005).
constexpr std::array<double, 4> kTheta = {1.495585217958292e-2, 2.539398330063230e-1,
    9.504178996162932e-1, 2.097847961257068e0};
constexpr double kTheta13 = 5.371920351148152e0;

constexpr std::array<double, 4> kB3 = {120., 60., 12., 1.};
constexpr std::array<double, 6> kB5 = {30240., 15120., 3360., 420., 30., 1.};
constexpr std::array<double, 8> kB7 = {17297280., 8648640., 1995840., 277200., 25200., 1512., 56., 1.};
constexpr std::array<double, 10> kB9 = {17643225600., 8821612800., 2075673600., 302702400., 30270240.,
    2162160., 110880., 3960., 90., 1.};
constexpr std::array<double, 14> kB13 = {64764752532480000., 32382376266240000., 7771770303897600.,
    1187353796428800., 129060195264000., 10559470521600., 670442572800., 33522128640., 1323241920.,
    40840800., 960960., 16380., 182., 1.};

template<std::size_t N>
Matrix pade_low(const Matrix& A, const std::array<double, N>& b)
{
    const auto n = A.rows();
    const Matrix I = Matrix::Identity(n, n);
    const Matrix A2 = A * A;
    Matrix even = b[0] * I;
    Matrix odd = b[1] * I;
    Matrix power = I;
    for (std::size_t k = 2; k + 1 < N; k += 2)
    {
        power = power * A2;
        even += b[k] * power;
        odd += b[k + 1] * power;
    }
    const Matrix U = A * odd;
    return (even - U).partialPivLu().solve(even + U);
}

Matrix pade13(const Matrix& A)
{
    const auto& b = kB13;
    const auto n = A.rows();
    const Matrix I = Matrix::Identity(n, n);
    const Matrix A2 = A * A;
    const Matrix A4 = A2 * A2;
    const Matrix A6 = A4 * A2;
    const Matrix U = A * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 + b[5] * A4 + b[3] * A2
                            + b[1] * I);
    const Matrix V = A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 + b[2] * A2
                     + b[0] * I;
    return (V - U).partialPivLu().solve(V + U);
}

} // namespace

Matrix mat_exp(const Matrix& A, double r)
{
    if (A.rows() != A.cols())
        throw DimensionError("mat_exp: matrix is " + std::to_string(A.rows()) + "x"
                             + std::to_string(A.cols()) + ", expected square");
    if (!std::isfinite(r))
        throw std::invalid_argument("mat_exp: non-finite time step");

    const auto n = A.rows();
    if (r == 0.0 || n == 0)
        return Matrix::Identity(n, n);

    const Matrix M = A * r;
    const double norm1 = M.cwiseAbs().colwise().sum().maxCoeff();
    if (norm1 == 0.0)
        return Matrix::Identity(n, n);

    if (norm1 <= kTheta[0])
        return pade_low(M, kB3);
    if (norm1 <= kTheta[1])
        return pade_low(M, kB5);
    if (norm1 <= kTheta[2])
        return pade_low(M, kB7);
    if (norm1 <= kTheta[3])
        return pade_low(M, kB9);

    int squarings = 0;
    if (norm1 > kTheta13)
        squarings = static_cast<int>(std::ceil(std::log2(norm1 / kTheta13)));
    Matrix E = pade13(M / std::ldexp(1.0, squarings));
    for (int i = 0; i < squarings; ++i)
        E = E * E;
    return E;
}

Vector mat_apply(const Matrix& A, const Vector& x)
{
    if (A.cols() != x.size())
        throw DimensionError("mat_apply: matrix has " + std::to_string(A.cols()) + " columns, vector has "
                             + std::to_string(x.size()) + " entries");
    return A * x;
}

double norm_inf(const Matrix& A)
{
    if (A.size() == 0)
        return 0.0;
    return A.cwiseAbs().rowwise().sum().maxCoeff();
}

bool all_finite(const Vector& v) { return v.allFinite(); }
bool all_finite(const Matrix& m) { return m.allFinite(); }

} // namespace setreach
