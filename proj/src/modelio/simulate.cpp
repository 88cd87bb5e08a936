#include "json_util.hpp"

#include "setreach/numkernel.hpp"

#include <cmath>

namespace setreach
{

namespace
{

constexpr int kSubsteps = 20;       // flow substeps per period in hybrid runs
constexpr double kJumpRate = 5.0; // optional jumps per unit time while some guard is enabled

Vector input_of(const std::optional<Matrix>& B, const std::optional<SetRep>& V, const std::optional<Vector>& c,
    Eigen::Index n, std::mt19937_64& rng)
{
    Vector u = c ? *c : Vector(Vector::Zero(n));
    if (B)
        u += *B * sample_point(*V, rng);
    return u;
}

Trace simulate_linear(const LinearSystem& sys, const ReachConfig& cfg, std::mt19937_64& rng)
{
    const std::size_t N = horizon_steps(sys, cfg);
    const Vector x0 = sample_point(sys.X0, rng);
    std::vector<Vector> zeta(N, Vector(0));
    if (sys.B)
        for (auto& z : zeta)
            z = sample_point(*sys.V, rng);
    const SimTrace s = simulate(sys, x0, zeta, cfg.r);
    const double dt = sys.time_kind == TimeKind::Discrete ? 1.0 : cfg.r;
    Trace tr;
    for (std::size_t k = 0; k < s.xi.size(); ++k)
        tr.push_back({static_cast<double>(k) * dt, s.xi[k], ""});
    return tr;
}

std::vector<std::size_t> enabled(const HybridAutomaton& H, std::size_t q, const Vector& x)
{
    std::vector<std::size_t> out;
    for (std::size_t t = 0; t < H.transitions.size(); ++t)
        if (H.transitions[t].source == q && member(H.transitions[t].guard, x))
            out.push_back(t);
    return out;
}

Vector jump(const Transition& t, const Vector& x) { return t.reset ? Vector(t.reset->M * x + t.reset->c) : x; }

std::size_t pick(const std::vector<std::size_t>& v, std::mt19937_64& rng)
{
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

Trace simulate_hybrid_discrete(const HybridAutomaton& H, const HybridConfig& cfg, std::mt19937_64& rng)
{
    Trace tr;
    const auto n = H.dim();
    std::size_t q = H.initial_mode;
    Vector x = sample_point(H.initial, rng);
    std::size_t jumps = 0;
    const auto N = static_cast<std::size_t>(std::ceil(cfg.reach.L));
    std::bernoulli_distribution coin(0.3);
    for (std::size_t k = 0;; ++k)
    {
        if (!member(H.modes[q].invariant, x))
            break;
        tr.push_back({static_cast<double>(k), x, H.modes[q].name});
        const auto en = enabled(H, q, x);
        if (!en.empty() && jumps < cfg.jump_depth && coin(rng))
        {
            const Transition& t = H.transitions[pick(en, rng)];
            x = jump(t, x);
            q = t.target;
            ++jumps;
            if (!member(H.modes[q].invariant, x))
                break;
            tr.push_back({static_cast<double>(k), x, H.modes[q].name});
        }
        if (k >= N)
            break;
        const Dynamics& d = H.modes[q].dynamics;
        x = d.A * x + input_of(d.B, d.V, d.c, n, rng);
    }
    return tr;
}

// Exact affine flow over [0, h] with the input held at u.
Vector flow(const Matrix& A, const Vector& x, const Vector& u, double h)
{
    if (h <= 0.0)
        return x;
    return mat_exp(A, h) * x + input_gain(A, h) * u;
}

Trace simulate_hybrid_continuous(const HybridAutomaton& H, const HybridConfig& cfg, std::mt19937_64& rng)
{
    Trace tr;
    const auto n = H.dim();
    const double r = cfg.reach.r;
    const double L = cfg.reach.L;
    const double h = r / kSubsteps;
    std::size_t q = H.initial_mode;
    Vector x = sample_point(H.initial, rng);
    if (!member(H.modes[q].invariant, x))
        return tr;
    tr.push_back({0.0, x, H.modes[q].name});
    std::size_t jumps = 0;
    std::bernoulli_distribution coin(1.0 - std::exp(-kJumpRate * h));
    double t = 0.0;
    long period = -1;
    std::size_t input_mode = q;
    Vector u;

    // Returns false when the run is blocked.
    auto take_jump = [&](const std::vector<std::size_t>& en) {
        const Transition& tj = H.transitions[pick(en, rng)];
        x = jump(tj, x);
        q = tj.target;
        ++jumps;
        if (!member(H.modes[q].invariant, x))
            return false;
        tr.push_back({t, x, H.modes[q].name});
        return true;
    };

    while (t < L - 1e-12)
    {
        const long p = static_cast<long>(std::floor(t / r + 1e-9));
        if (p != period || input_mode != q)
        {
            const Dynamics& d = H.modes[q].dynamics;
            u = input_of(d.B, d.V, d.c, n, rng);
            period = p;
            input_mode = q;
        }
        std::vector<std::size_t> en = jumps < cfg.jump_depth ? enabled(H, q, x) : std::vector<std::size_t>{};
        if (!en.empty() && coin(rng))
        {
            if (!take_jump(en))
                break;
            continue;
        }
        const Matrix& A = H.modes[q].dynamics.A;
        const double period_end = static_cast<double>(p + 1) * r;
        const double te = std::min({t + h, period_end, L});
        const Vector xn = flow(A, x, u, te - t);
        if (member(H.modes[q].invariant, xn))
        {
            t = te;
            x = xn;
            if (std::abs(t / r - std::round(t / r)) < 1e-9 || t >= L - 1e-12)
                tr.push_back({t, x, H.modes[q].name});
            continue;
        }
        // Last instant inside the invariant, then a forced jump.
        double lo = 0.0, hi = te - t;
        for (int it = 0; it < 60 && hi - lo > 1e-14; ++it)
        {
            const double mid = 0.5 * (lo + hi);
            (member(H.modes[q].invariant, flow(A, x, u, mid)) ? lo : hi) = mid;
        }
        x = flow(A, x, u, lo);
        t += lo;
        tr.push_back({t, x, H.modes[q].name});
        en = jumps < cfg.jump_depth ? enabled(H, q, x) : std::vector<std::size_t>{};
        if (en.empty() || !take_jump(en))
            break;
    }
    return tr;
}

Trace simulate_nonlinear(const NonlinearModel& nl, const ReachConfig& cfg, std::mt19937_64& rng)
{
    const NonlinearSystem sys = nl.system();
    const auto N = static_cast<std::size_t>(std::ceil(cfg.L / cfg.r - 1e-9));
    constexpr int sub = 100;
    const double dt = cfg.r / sub;
    const bool bounded = nl.method == HybridizationMethod::Static;
    Vector x = sample_point(nl.X0, rng);
    Trace tr;
    for (std::size_t k = 0;; ++k)
    {
        if (!all_finite(x) || (bounded && locate_cell(*nl.region, nl.cells, x) < 0))
            break;
        tr.push_back({static_cast<double>(k) * cfg.r, x, ""});
        if (k >= N)
            break;
        for (int s = 0; s < sub; ++s)
        {
            const Vector k1 = sys.f(x);
            const Vector k2 = sys.f(x + 0.5 * dt * k1);
            const Vector k3 = sys.f(x + 0.5 * dt * k2);
            const Vector k4 = sys.f(x + dt * k3);
            x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
    }
    return tr;
}

} // namespace

std::vector<Trace> simulate_model(const ModelFile& m, std::size_t runs, std::uint64_t seed)
{
    std::vector<Trace> out;
    out.reserve(runs);
    for (std::size_t i = 0; i < runs; ++i)
    {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
            static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i >> 32)};
        std::mt19937_64 rng(seq);
        switch (m.kind)
        {
            case ModelKind::LinearDiscrete:
            case ModelKind::LinearContinuous: out.push_back(simulate_linear(m.linear, m.reach(), rng)); break;
            case ModelKind::Hybrid:
                out.push_back(m.hybrid.time_kind == TimeKind::Discrete
                        ? simulate_hybrid_discrete(m.hybrid, m.hybrid_cfg, rng)
                        : simulate_hybrid_continuous(m.hybrid, m.hybrid_cfg, rng));
                break;
            case ModelKind::Nonlinear: out.push_back(simulate_nonlinear(*m.nonlinear, m.reach(), rng)); break;
        }
    }
    return out;
}

std::string traces_to_json(const std::vector<Trace>& traces)
{
    using jsonio::json;
    json root;
    root["schema"] = kTracesSchema;
    json arr = json::array();
    for (const Trace& tr : traces)
    {
        json pts = json::array();
        for (const TracePoint& p : tr)
        {
            json jp;
            jp["t"] = p.t;
            jp["x"] = jsonio::vector_json(p.x);
            if (!p.mode.empty())
                jp["mode"] = p.mode;
            pts.push_back(std::move(jp));
        }
        arr.push_back(std::move(pts));
    }
    root["traces"] = std::move(arr);
    return jsonio::dump17(root);
}

} // namespace setreach
