#ifndef FREDHIER_ZS_HPP
#define FREDHIER_ZS_HPP

#include <cmath>
#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "hierarchy.hpp"

namespace fredhier {

using Cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;

inline constexpr Cplx kI{0.0, 1.0};

inline Cplx ipow(int k) {
    static const Cplx t[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    return t[((k % 4) + 4) % 4];
}

// X_1..X_P of X(z) = I + sum_p X_p z^{-p}; X[p-1] holds X_p.
struct LaurentStack {
    double s = 0.0;
    int P = 0;
    std::vector<Mat2> X;

    Mat2 partial_sum(Cplx z, int upto = -1) const {
        if (upto < 0) upto = P;
        Mat2 acc = Mat2::Identity();
        Cplx zp = 1.0;
        for (int p = 1; p <= upto; ++p) {
            zp /= z;
            acc += X[p - 1] * zp;
        }
        return acc;
    }
};

inline Mat2 laurent_coefficient(double q, double u, int p) {
    Mat2 m;
    m << ipow(-(p + 1)) * u, ipow(p) * q, ipow(-p) * q, ipow(p + 1) * u;  // (-i)^k = i^{-k}
    return m;
}

// X_{p+1} = [[(-i)^{p+1} u_p, i^p q_p], [(-i)^p q_p, i^{p+1} u_p]]
inline LaurentStack laurent_stack(const HierarchyTable& T, int P) {
    if (!T.homogeneous) throw Error(Errc::BadArgument, "Laurent stack needs a homogeneous table");
    if (P < 1) throw Error(Errc::BadArgument, "P must be positive");
    if (T.p_max < P - 1) throw Error(Errc::InsufficientDepth, "Laurent stack of size P needs p_max >= P-1");
    LaurentStack st;
    st.s = T.s;
    st.P = P;
    for (int p = 0; p < P; ++p) st.X.push_back(laurent_coefficient(T.q[p](0), T.u[p](0, 0), p));
    return st;
}

inline Mat2 adjugate(const Mat2& m) {
    Mat2 a;
    a << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
    return a;
}

// Order-p coefficient of Tr(adj(X) dX/ds) with dX/ds from the algebraic
// s-derivatives; vanishes identically, and for p = 2n+2 it is the
// derivative form of the flow invariant I_n.
inline double conservation_defect(const HierarchyTable& T, int p) {
    if (p < 1) throw Error(Errc::BadArgument, "order must be positive");
    const LaurentStack st = laurent_stack(T, p);
    HierarchyJets J(T);
    std::vector<Mat2> dX;
    for (int k = 0; k < p; ++k) dX.push_back(laurent_coefficient(J.dq(k, 1)(0), J.du(k, 1)(0, 0), k));
    Cplx acc = dX[p - 1].trace();
    for (int l = 1; l <= p - 1; ++l) acc += (adjugate(st.X[l - 1]) * dX[p - l - 1]).trace();
    return std::abs(acc);
}

// Int_R e^{-izu} A(u) du.
//   Gaussian: sqrt(gamma) e^{-z^2/4} for every z.
//   Airy: e^{iz^3/3} closed form off the axis (convergent for Im z > 0);
//         tapered quadrature on the real axis.
namespace detail {
inline Cplx airy_fourier_quadrature(const KernelFunction& f, double z, double W) {
    // the left tail decays like |u|^{-1/4} only, so it is rolled off with an
    // erfc taper centred at -W/2 of width W/16
    const double hi = decay_cutoff(f, 1e-20 * f.amplitude);
    const double c = 0.5 * W, w = W / 16.0;
    const QuadratureGrid g = panel_grid({-W, hi}, 0.5, 16);
    Cplx acc = 0.0;
    for (int k = 0; k < g.size(); ++k) {
        const double u = g.nodes[k];
        const double taper = u < 0 ? 0.5 * std::erfc((-u - c) / w) : 1.0;
        acc += g.weights[k] * taper * eval(f, 0, u) * std::exp(Cplx(0.0, -z * u));
    }
    return acc;
}
}  // namespace detail

inline Cplx fourier_profile(const KernelFunction& f, Cplx z, double window = 80.0) {
    switch (f.family) {
    case Family::Gaussian: return f.amplitude * std::exp(-z * z / 4.0);
    case Family::Airy:
    case Family::HigherAiry:
        if (f.family == Family::HigherAiry && f.n >= 2)
            throw Error(Errc::DivergentIntegral, "profile grows at -infinity; Fourier integral diverges");
        if (z.imag() < 0.0) throw Error(Errc::DivergentIntegral, "Airy Fourier integral diverges for Im z < 0");
        if (z.imag() > 0.0) return f.amplitude * std::exp(kI * z * z * z / 3.0);
        return detail::airy_fourier_quadrature(f, z.real(), window);
    }
    return 0.0;
}

// r(z) = -i Int e^{-izu} A(u) du
inline Cplx reflection_coefficient(const KernelFunction& f, Cplx z, double window = 80.0) {
    return -kI * fourier_profile(f, z, window);
}

enum class RhpBranch { UpperHalf, LowerHalf, BoundaryPlus, BoundaryMinus, Principal };

inline const char* branch_name(RhpBranch b) {
    switch (b) {
    case RhpBranch::UpperHalf: return "upper";
    case RhpBranch::LowerHalf: return "lower";
    case RhpBranch::BoundaryPlus: return "plus";
    case RhpBranch::BoundaryMinus: return "minus";
    case RhpBranch::Principal: return "principal";
    }
    return "?";
}

struct RhpEvaluation {
    Cplx z;
    Mat2 X;
    RhpBranch branch = RhpBranch::UpperHalf;
};

struct ZsOptions {
    int nodes = 120;
    double stretch = 1.0;
};

// Resolvent data at fixed s. With (I - K_s)^{-1} delta = delta + g and
// qh = A_s (delta + g), the bracket entries are
//   <1|e^{-+izX}(I - K)^{-1}|delta> = 1 + Int e^{-+izx} g,
//   <1|e^{-+izX} A_s (I - K)^{-1}|delta> = Int e^{-+izx} qh.
// g = A_s qh and qh = A(. + s) + A_s g give Nystrom interpolants off the nodes.
class ZsSolution {
public:
    ZsSolution(const KernelFunction& f, double s, const QuadratureGrid& grid) : f_(f), s_(s), grid_(grid) {
        const int n = grid.size();
        sw_ = grid.sqrt_weights();
        gt_ = Vec::Zero(n);
        qt_ = Vec::Zero(n);
        if (f.amplitude == 0.0) return;
        const DiscreteOperator A = discretize_As(f, s, grid);
        Vec a0(n);
        for (int i = 0; i < n; ++i) a0[i] = sw_[i] * eval(f, 0, grid.nodes[i] + s);
        const DiscreteOperator K{grid, A.entries * A.entries, "K_s"};
        gt_ = solve(K, Vec(A.entries * a0));
        qt_ = a0 + A.entries * gt_;
        q0_ = eval(f, 0, s) + a0.dot(gt_);
    }

    const QuadratureGrid& grid() const { return grid_; }
    double s() const { return s_; }
    double q0() const { return q0_; }

    struct Brackets {
        Cplx gm, gp;  // 1 + Int e^{-izx} g, 1 + Int e^{izx} g
        Cplx qm, qp;  // Int e^{-izx} qh, Int e^{izx} qh
    };

    Brackets brackets(Cplx z) const {
        if (std::abs(z.imag()) * grid_.upper > 30.0)
            throw Error(Errc::ExponentialOverflow,
                        "|Im z| times the window exceeds 30; shrink |Im z| or the window");
        Brackets b{1.0, 1.0, 0.0, 0.0};
        if (f_.amplitude == 0.0) return b;
        // panels short enough to resolve e^{izx}
        const double h = std::min(1.0, 3.0 / std::max(1.0, std::abs(z.real())));
        const QuadratureGrid fine = panel_grid({0.0, grid_.upper}, h, 20);
        const int n = grid_.size();
        for (int k = 0; k < fine.size(); ++k) {
            const double x = fine.nodes[k];
            double g = 0.0, q = eval(f_, 0, x + s_);
            for (int j = 0; j < n; ++j) {
                const double a = eval(f_, 0, x + grid_.nodes[j] + s_) * sw_[j];
                g += a * qt_[j];
                q += a * gt_[j];
            }
            const Cplx em = std::exp(-kI * z * x), ep = std::exp(kI * z * x);
            const double w = fine.weights[k];
            b.gm += w * em * g;
            b.gp += w * ep * g;
            b.qm += w * em * q;
            b.qp += w * ep * q;
        }
        return b;
    }

    RhpEvaluation evaluate(Cplx z, RhpBranch branch) const {
        const bool real = z.imag() == 0.0;
        switch (branch) {
        case RhpBranch::UpperHalf:
            if (!(z.imag() > 0)) throw Error(Errc::BadArgument, "upper branch needs Im z > 0");
            break;
        case RhpBranch::LowerHalf:
            if (!(z.imag() < 0)) throw Error(Errc::BadArgument, "lower branch needs Im z < 0");
            break;
        case RhpBranch::BoundaryPlus:
        case RhpBranch::BoundaryMinus:
            if (!real) throw Error(Errc::BadArgument, "boundary branches need real z");
            break;
        case RhpBranch::Principal:
            if (z != Cplx(0.0)) throw Error(Errc::BadArgument, "principal value is defined at z = 0 only");
            break;
        }
        const Brackets b = brackets(z);
        Mat2 X;
        X << b.gm, -kI * b.qp, kI * b.qm, b.gp;
        const bool upper = branch == RhpBranch::UpperHalf || branch == RhpBranch::BoundaryPlus;
        const bool lower = branch == RhpBranch::LowerHalf || branch == RhpBranch::BoundaryMinus;
        if (f_.amplitude != 0.0 && upper) {
            const Cplx ah = fourier_profile(f_, z), e = std::exp(kI * z * s_);
            X(0, 0) -= ah * e * b.qp;
            X(1, 0) -= ah * e * kI * b.gp;
        } else if (f_.amplitude != 0.0 && lower) {
            // Int e^{izu} A(u) du = fourier_profile(-z)
            const Cplx ac = fourier_profile(f_, -z), e = std::exp(-kI * z * s_);
            X(0, 1) += kI * ac * e * b.gm;
            X(1, 1) -= ac * e * b.qm;
        }
        return {z, X, branch};
    }

private:
    KernelFunction f_;
    double s_;
    QuadratureGrid grid_;
    Vec sw_, gt_, qt_;
    double q0_ = 0.0;
};

inline QuadratureGrid zs_grid(const KernelFunction& f, double s, const ZsOptions& opt = {}) {
    return halfline_grid(f, s, opt.nodes, 1e-18, opt.stretch);
}

inline RhpBranch interior_branch(Cplx z) {
    if (z.imag() > 0) return RhpBranch::UpperHalf;
    if (z.imag() < 0) return RhpBranch::LowerHalf;
    throw Error(Errc::BadArgument, "real z needs an explicit boundary branch");
}

inline RhpEvaluation evaluate_X(const KernelFunction& f, double s, Cplx z,
                                std::optional<RhpBranch> branch = std::nullopt, const ZsOptions& opt = {}) {
    const ZsSolution sol(f, s, zs_grid(f, s, opt));
    return sol.evaluate(z, branch ? *branch : interior_branch(z));
}

inline Mat2 jump_matrix(Cplx r, double s, double z) {
    Mat2 J;
    const Cplx e = std::exp(kI * s * z);
    J << 1.0 - std::norm(r), -std::conj(r) / e, r * e, 1.0;
    return J;
}

// max |X_+ - X_- J| over entries.
inline double jump_residual(const ZsSolution& sol, const KernelFunction& f, double z) {
    const Mat2 xp = sol.evaluate(z, RhpBranch::BoundaryPlus).X;
    const Mat2 xm = sol.evaluate(z, RhpBranch::BoundaryMinus).X;
    const Cplx r = f.amplitude == 0.0 ? Cplx(0.0) : reflection_coefficient(f, z);
    return (xp - xm * jump_matrix(r, sol.s(), z)).cwiseAbs().maxCoeff();
}

inline double jump_residual(const KernelFunction& f, double s, double z, const ZsOptions& opt = {}) {
    return jump_residual(ZsSolution(f, s, zs_grid(f, s, opt)), f, z);
}

inline Mat2 sigma3() {
    Mat2 m;
    m << 1.0, 0.0, 0.0, -1.0;
    return m;
}

inline Mat2 potential(double q0) {
    Mat2 m;
    m << 0.0, q0, -q0, 0.0;
    return m;
}

struct ZsOdeResidual {
    double direct = 0.0;   // dX/ds = (iz/2)[X, s3] + i Q X
    double inverse = 0.0;  // dX^{-1}/ds = (iz/2)[X^{-1}, s3] - i X^{-1} Q
};

inline ZsOdeResidual zs_ode_residual(const ZsSolution& lo, const ZsSolution& mid, const ZsSolution& hi, Cplx z,
                                     double h) {
    if (!lo.grid().identical(mid.grid()) || !mid.grid().identical(hi.grid()))
        throw Error(Errc::GridMismatch, "ZS residual needs the three evaluations on one grid");
    const RhpBranch br = z.imag() == 0.0 ? RhpBranch::BoundaryPlus : interior_branch(z);
    const Mat2 xl = lo.evaluate(z, br).X, xm = mid.evaluate(z, br).X, xh = hi.evaluate(z, br).X;
    const Mat2 s3 = sigma3(), Q = potential(mid.q0());
    ZsOdeResidual r;
    const Mat2 d = (xh - xl) / (2.0 * h);
    r.direct = (d - (kI * z / 2.0) * (xm * s3 - s3 * xm) - kI * Q * xm).cwiseAbs().maxCoeff();
    const Mat2 il = xl.inverse(), im = xm.inverse(), ih = xh.inverse();
    const Mat2 di = (ih - il) / (2.0 * h);
    r.inverse = (di - (kI * z / 2.0) * (im * s3 - s3 * im) + kI * im * Q).cwiseAbs().maxCoeff();
    return r;
}

inline ZsOdeResidual zs_ode_residual(const KernelFunction& f, double s, Cplx z, double h,
                                     const ZsOptions& opt = {}) {
    const QuadratureGrid g = zs_grid(f, s - h, opt);
    return zs_ode_residual(ZsSolution(f, s - h, g), ZsSolution(f, s, g), ZsSolution(f, s + h, g), z, h);
}

struct LaurentTail {
    std::vector<double> radii;
    std::vector<double> tail;  // |X(z) - partial sum through X_P|
    double slope = 0.0;        // least-squares slope of log tail against log |z|
};

// Tail of the Laurent series along Im z = im.
inline LaurentTail laurent_tail(const KernelFunction& f, double s, int P, const std::vector<double>& radii,
                                double im = 1.0, const ZsOptions& opt = {}) {
    const ZsSolution sol(f, s, zs_grid(f, s, opt));
    const HierarchyTable T = compute_table(f, MeasureSpec::projector(), s, P - 1, GridOptions{opt.nodes, 2.0, 16, opt.stretch});
    const LaurentStack st = laurent_stack(T, P);
    LaurentTail lt;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (double R : radii) {
        const Cplx z(std::sqrt(R * R - im * im), im);
        const Mat2 X = sol.evaluate(z, interior_branch(z)).X;
        const double t = (X - st.partial_sum(z)).cwiseAbs().maxCoeff();
        lt.radii.push_back(R);
        lt.tail.push_back(t);
        const double x = std::log(R), y = std::log(t);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(radii.size());
    lt.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return lt;
}

}  // namespace fredhier

#endif
