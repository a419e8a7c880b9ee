#ifndef FREDHIER_HIERARCHY_HPP
#define FREDHIER_HIERARCHY_HPP

#include <cmath>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "operator.hpp"

namespace fredhier {

struct HierarchyGrids {
    QuadratureGrid halfline;
    std::optional<QuadratureGrid> t;
    bool identical(const HierarchyGrids& o) const {
        if (!halfline.identical(o.halfline) || t.has_value() != o.t.has_value()) return false;
        return !t || t->identical(*o.t);
    }
};

// Homogeneous tables use a single Gauss-Legendre panel of halfline_nodes;
// inhomogeneous ones use panels of fixed node density, since rows with very
// negative t see A(t + s + y) oscillate over a long stretch of y.
struct GridOptions {
    int halfline_nodes = 120;
    double panel_len = 2.0;
    int per_panel = 20;     // 16 leaves ~1e-12 in the Fermi invariants from the oscillating far-left rows
    double stretch = 1.0;  // window scale factor (1.2 = +20%)
};

inline KernelFunction effective_kernel(const KernelFunction& f, const MeasureSpec& sig) {
    KernelFunction k = f;
    if (sig.point_mass()) k.amplitude *= std::sqrt(sig.gamma);
    return k;
}

// Default windows; s_ref is the most negative s the grids will be used at.
inline HierarchyGrids default_grids(const KernelFunction& f, const MeasureSpec& sig, double s_ref,
                                    const GridOptions& opt = {}) {
    HierarchyGrids g;
    const KernelFunction k = effective_kernel(f, sig);
    if (sig.point_mass()) {
        g.halfline = halfline_grid(k, s_ref, opt.halfline_nodes, 1e-18, opt.stretch);
        return g;
    }
    const PanelOptions po{opt.panel_len, opt.per_panel, opt.stretch};
    g.t = t_grid_for(k, sig, s_ref, po);
    // A(t + s + y) must decay in y for every t down to the t-grid's lower edge
    const double L = (std::max(decay_cutoff(k, 1e-18) - s_ref, 1.0) + sig.center - g.t->lower) * opt.stretch;
    g.halfline = panel_grid({0.0, L}, opt.panel_len, opt.per_panel);
    g.halfline.kind = GridKind::HalfLineTruncated;
    return g;
}

// {q_p, u_p} at fixed s. Homogeneous tables are the 1-point case t = {0} with
// unit contraction weight; inhomogeneous ones live on the t-grid with
// contraction weights omega_k = sigma'(t_k) v_k.
//   q_p(t)     = A^(p)(t + s) + Int A^(p)(t + s + y) g(y) dy,  (I - K_2) g = K_2(., 0)
//   u_p(t, t') = Int Int A^(p)(t + s + y) (I - K_2)^{-1}(y, z) A(z + t' + s)
struct HierarchyTable {
    double s = 0.0;
    int p_max = 0;
    bool homogeneous = true;
    KernelFunction kernel;
    MeasureSpec sigma;
    HierarchyGrids grids;
    Vec t;
    Vec omega;
    std::vector<Vec> q;
    std::vector<Mat> u;
    double log_det = 0.0;  // log Det(I - K_2)
    double det = 1.0;

    int points() const { return static_cast<int>(t.size()); }
    // <a, b>_sigma' = sum_k a_k omega_k b_k
    double pair(const Vec& a, const Vec& b) const { return (a.array() * omega.array() * b.array()).sum(); }
};

inline int supported_depth(const KernelFunction&) { return kMaxDerivative - 1; }

inline HierarchyTable compute_table(const KernelFunction& f, const MeasureSpec& sig, double s, int p_max,
                                    const HierarchyGrids& grids) {
    if (p_max < 0) throw Error(Errc::BadArgument, "p_max must be non-negative");
    if (p_max > supported_depth(f))
        throw Error(Errc::DerivativeDepthExceeded, "p_max exceeds the profile's derivative depth");
    HierarchyTable T;
    T.s = s;
    T.p_max = p_max;
    T.kernel = f;
    T.sigma = sig;
    T.grids = grids;
    T.homogeneous = sig.point_mass();
    const KernelFunction k = effective_kernel(f, sig);
    const QuadratureGrid& hx = grids.halfline;
    const int n = hx.size();

    if (T.homogeneous) {
        T.t = Vec::Zero(1);
        T.omega = Vec::Ones(1);
        T.q.assign(p_max + 1, Vec::Zero(1));
        T.u.assign(p_max + 1, Mat::Zero(1, 1));
        if (k.amplitude == 0.0) return T;
        const DiscreteOperator A = discretize_As(k, s, hx);
        const DiscreteOperator K{hx, A.entries * A.entries, "K_s"};
        const std::vector<Mat> a = sample_shifted(k, p_max, hx, {s});
        std::array<double, kMaxDerivative + 1> at{};
        eval_upto(k, p_max, s, at.data());
        auto lu = detail::factor(K);
        T.det = lu.determinant();
        T.log_det = std::log(std::abs(T.det));
        const Vec g = lu.solve(Vec(A.entries * a[0].col(0)));
        const Vec r0 = lu.solve(Vec(a[0].col(0)));
        for (int p = 0; p <= p_max; ++p) {
            T.q[p](0) = at[p] + a[p].col(0).dot(g);
            T.u[p](0, 0) = a[p].col(0).dot(r0);
        }
        return T;
    }

    if (f.family == Family::HigherAiry && f.n >= 2)
        throw Error(Errc::DivergentIntegral,
                    "the order-n>=2 profile grows like exp(c|x|^{(2n+1)/2n}) at -infinity; "
                    "no Fermi weight makes A_s^T sigma A_s finite");
    if (!grids.t) throw Error(Errc::BadArgument, "inhomogeneous table needs a t-grid");
    const QuadratureGrid& tg = *grids.t;
    const int m = tg.size();
    T.t = Vec::Map(tg.nodes.data(), m);
    T.omega.resize(m);
    Vec sv(m);
    for (int j = 0; j < m; ++j) {
        T.omega[j] = sig.density(tg.nodes[j]) * tg.weights[j];
        sv[j] = sig.sigma(tg.nodes[j]) * tg.weights[j];
    }
    T.q.assign(p_max + 1, Vec::Zero(m));
    T.u.assign(p_max + 1, Mat::Zero(m, m));
    if (k.amplitude == 0.0 || sig.gamma == 0.0) return T;
    check_truncation(k, s, hx);
    if (envelope(k)(s + tg.upper) > 1e-8)
        throw Error(Errc::TruncationTooTight, "t-grid upper edge too short for the profile decay");
    std::vector<double> shifts(tg.nodes);
    for (double& v : shifts) v += s;
    const std::vector<Mat> B = sample_shifted(k, p_max, hx, shifts);  // n x m
    Mat c(m, p_max + 1);
    {
        std::array<double, kMaxDerivative + 1> buf{};
        for (int j = 0; j < m; ++j) {
            eval_upto(k, p_max, tg.nodes[j] + s, buf.data());
            for (int p = 0; p <= p_max; ++p) c(j, p) = buf[p];
        }
    }
    Mat K2 = B[0] * sv.asDiagonal() * B[0].transpose();
    K2 = 0.5 * (K2 + K2.transpose());
    const DiscreteOperator K{hx, K2, "K_2"};
    auto lu = detail::factor(K);
    T.det = lu.determinant();
    T.log_det = std::log(std::abs(T.det));
    const Vec kt = B[0] * sv.asDiagonal() * c.col(0);
    const Vec g = lu.solve(kt);
    const Mat RB0 = lu.solve(B[0]);
    (void)n;
    for (int p = 0; p <= p_max; ++p) {
        T.q[p] = c.col(p) + B[p].transpose() * g;
        T.u[p] = B[p].transpose() * RB0;
    }
    return T;
}

inline HierarchyTable compute_table(const KernelFunction& f, const MeasureSpec& sig, double s, int p_max,
                                    const GridOptions& opt = {}) {
    return compute_table(f, sig, s, p_max, default_grids(f, sig, s, opt));
}

// Algebraic s-derivatives of q_p and u_p by repeated use of
//   q_p' = q_{p+1} - u_p sigma' q_0,   u_p' = -q_p q_0^T.
class HierarchyJets {
public:
    explicit HierarchyJets(const HierarchyTable& t) : T_(t) {}

    const Vec& dq(int p, int j) {
        auto key = std::make_pair(p, j);
        if (auto it = q_.find(key); it != q_.end()) return it->second;
        Vec v;
        if (j == 0) {
            if (p > T_.p_max) throw Error(Errc::InsufficientDepth, "table depth too small for derivative");
            v = T_.q[p];
        } else {
            v = dq(p + 1, j - 1);
            for (int a = 0; a <= j - 1; ++a) {
                const Vec w = T_.omega.cwiseProduct(dq(0, j - 1 - a));
                v -= binom(j - 1, a) * (du(p, a) * w);
            }
        }
        return q_.emplace(key, std::move(v)).first->second;
    }

    const Mat& du(int p, int a) {
        auto key = std::make_pair(p, a);
        if (auto it = u_.find(key); it != u_.end()) return it->second;
        Mat v;
        if (a == 0) {
            if (p > T_.p_max) throw Error(Errc::InsufficientDepth, "table depth too small for derivative");
            v = T_.u[p];
        } else {
            v = Mat::Zero(T_.points(), T_.points());
            for (int b = 0; b <= a - 1; ++b) v -= binom(a - 1, b) * dq(p, b) * dq(0, a - 1 - b).transpose();
        }
        return u_.emplace(key, std::move(v)).first->second;
    }

private:
    static double binom(int n, int k) {
        double r = 1.0;
        for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
        return r;
    }
    const HierarchyTable& T_;
    std::map<std::pair<int, int>, Vec> q_;
    std::map<std::pair<int, int>, Mat> u_;
};

inline void require_same_grids(const HierarchyTable& a, const HierarchyTable& b) {
    if (!a.grids.identical(b.grids) || a.p_max != b.p_max || a.homogeneous != b.homogeneous)
        throw Error(Errc::GridMismatch, "tables were built on different grids");
}

// max over p < p_max of the central-difference defect of the recursion.
inline double recursion_residual(const HierarchyTable& lo, const HierarchyTable& mid,
                                 const HierarchyTable& hi, double h) {
    require_same_grids(lo, mid);
    require_same_grids(mid, hi);
    double r = 0.0;
    const Vec w0 = mid.omega.cwiseProduct(mid.q[0]);
    for (int p = 0; p < mid.p_max; ++p) {
        const Vec fq = (hi.q[p] - lo.q[p]) / (2 * h);
        const Mat fu = (hi.u[p] - lo.u[p]) / (2 * h);
        r = std::max(r, (fq - (mid.q[p + 1] - mid.u[p] * w0)).cwiseAbs().maxCoeff());
        r = std::max(r, (fu + mid.q[p] * mid.q[0].transpose()).cwiseAbs().maxCoeff());
    }
    return r;
}

// sum_k (-1)^{k+1} [u_{N-k} sigma' u_k^T - q_{N-k} q_k^T], k = 0..kmax
inline Mat invariant_sum(const HierarchyTable& T, int N, int kmax) {
    Mat acc = Mat::Zero(T.points(), T.points());
    for (int k = 0; k <= kmax; ++k) {
        const double sg = (k % 2 == 0) ? -1.0 : 1.0;
        acc += sg * (T.u[N - k] * T.omega.asDiagonal() * T.u[k].transpose() - T.q[N - k] * T.q[k].transpose());
    }
    return acc;
}

struct InvariantNorms {
    double I = 0.0;
    double J = 0.0;
};

// Homogeneous: I_n = u_{2n+1} + 1/2 sum_{k=0}^{2n} (-1)^{k+1}[u_k u_{2n-k} - q_k q_{2n-k}].
// Inhomogeneous: I_n = u_{2n+1} + u_{2n+1}^T + sum_{k=0}^{2n} (...),
//                J_n = u_{2n} - u_{2n}^T + sum_{k=0}^{2n-1} (...), both in max-norm.
inline InvariantNorms flow_invariant(const HierarchyTable& T, int n) {
    if (T.p_max < 2 * n + 1) throw Error(Errc::InsufficientDepth, "flow invariant needs p_max >= 2n+1");
    InvariantNorms r;
    if (T.homogeneous) {
        r.I = std::abs(T.u[2 * n + 1](0, 0) + 0.5 * invariant_sum(T, 2 * n, 2 * n)(0, 0));
        return r;
    }
    const Mat I = T.u[2 * n + 1] + T.u[2 * n + 1].transpose() + invariant_sum(T, 2 * n, 2 * n);
    Mat J = T.u[2 * n] - T.u[2 * n].transpose();
    if (n > 0) J += invariant_sum(T, 2 * n, 2 * n - 1);
    r.I = I.cwiseAbs().maxCoeff();
    r.J = J.cwiseAbs().maxCoeff();
    return r;
}

// Defect of q_{2n} = (s + X) q_0 - sum_l (u^T_{2n-1-2l} sigma' q_{2l} - u^T_{2n-2-2l} sigma' q_{2l+1}).
inline Vec closure_defect(const HierarchyTable& T, int n) {
    if (!T.kernel.airy_type() || T.kernel.n != n)
        throw Error(Errc::WrongKernelFamily, "closure of order n needs a profile with A^(2n) = x A");
    if (T.p_max < 2 * n) throw Error(Errc::InsufficientDepth, "closure needs p_max >= 2n");
    Vec rhs = (T.s + T.t.array()).matrix().cwiseProduct(T.q[0]);
    for (int l = 0; l <= n - 1; ++l) {
        rhs -= T.u[2 * n - 1 - 2 * l].transpose() * T.omega.cwiseProduct(T.q[2 * l]);
        if (2 * n - 2 - 2 * l >= 0)
            rhs += T.u[2 * n - 2 - 2 * l].transpose() * T.omega.cwiseProduct(T.q[2 * l + 1]);
    }
    return T.q[2 * n] - rhs;
}

inline double closure_residual(const HierarchyTable& T, int n) {
    return closure_defect(T, n).cwiseAbs().maxCoeff();
}

// d/ds log Det(I - K_2) = Tr(sigma' u_0); d^2/ds^2 log Det = -q_0^T sigma' q_0.
inline double tau_first(const HierarchyTable& T) { return (T.omega.asDiagonal() * T.u[0]).trace(); }
inline double tau_second(const HierarchyTable& T) { return -T.pair(T.q[0], T.q[0]); }

}  // namespace fredhier

#endif
