#ifndef FREDHIER_PII_HPP
#define FREDHIER_PII_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "hierarchy.hpp"

namespace fredhier {

enum class DerivativeRoute { HierarchyAlgebraic, FiniteDifference };

struct PiiResidualReport {
    int member = 1;
    MeasureSpec sigma;
    std::vector<double> s_samples;
    double residual_max = 0.0;
    DerivativeRoute derivative_route = DerivativeRoute::HierarchyAlgebraic;
    // |q0'' algebraic - q0'' five-point| when the FD route was run (member 1)
    double fd_crosscheck = std::numeric_limits<double>::quiet_NaN();
};

inline void check_member(const KernelFunction& f, int member) {
    if (member != 1 && member != 2) throw Error(Errc::BadArgument, "member must be 1 or 2");
    if (!f.airy_type() || f.n != member)
        throw Error(Errc::WrongKernelFamily, "member m needs the profile with A^(2m) = x A");
}

// Member 1: q0'' - (s+t) q0 - 2 q0 <q0,q0>
// Member 2: q0'''' - [(s+t) q0 + 8 q0' <q0,q0'> + 6 q0 <q0,q0''> - 6 q0 <q0,q0>^2
//                     + 2 q0 <q0',q0'> + 4 q0'' <q0,q0>]
// with <a,b> = a^T sigma' b and all s-derivatives from the recursion.
inline Vec pii_defect(const HierarchyTable& T, int member) {
    check_member(T.kernel, member);
    if (T.p_max < 2 * member) throw Error(Errc::InsufficientDepth, "pii member m needs p_max >= 2m");
    HierarchyJets J(T);
    const Vec& q = J.dq(0, 0);
    const Vec st = (T.s + T.t.array()).matrix();
    if (member == 1) {
        const Vec& q2 = J.dq(0, 2);
        return q2 - st.cwiseProduct(q) - 2.0 * T.pair(q, q) * q;
    }
    const Vec& q1 = J.dq(0, 1);
    const Vec& q2 = J.dq(0, 2);
    const Vec& q4 = J.dq(0, 4);
    const double s00 = T.pair(q, q), s01 = T.pair(q, q1), s02 = T.pair(q, q2), s11 = T.pair(q1, q1);
    const Vec rhs = st.cwiseProduct(q) + 8.0 * s01 * q1 + 6.0 * s02 * q - 6.0 * s00 * s00 * q + 2.0 * s11 * q +
                    4.0 * s00 * q2;
    return q4 - rhs;
}

// Scalar reduction q'''' - s q - 10 q q'^2 - 10 q^2 q'' + 6 q^5 (homogeneous tables).
inline double pii2_reduced_defect(const HierarchyTable& T) {
    if (!T.homogeneous) throw Error(Errc::BadArgument, "reduced form needs a homogeneous table");
    check_member(T.kernel, 2);
    HierarchyJets J(T);
    const double q = J.dq(0, 0)(0), q1 = J.dq(0, 1)(0), q2 = J.dq(0, 2)(0), q4 = J.dq(0, 4)(0);
    return q4 - T.s * q - 10.0 * q * q1 * q1 - 10.0 * q * q * q2 + 6.0 * std::pow(q, 5);
}

inline PiiResidualReport pii_residual(int member, const KernelFunction& f, const MeasureSpec& sig, double s,
                                      const GridOptions& opt = {}, bool with_fd = false) {
    check_member(f, member);
    PiiResidualReport rep;
    rep.member = member;
    rep.sigma = sig;
    rep.s_samples = {s};
    const double h = 1e-2;
    const HierarchyGrids grids = default_grids(f, sig, s - 2 * h, opt);
    const HierarchyTable T = compute_table(f, sig, s, 2 * member, grids);
    rep.residual_max = pii_defect(T, member).cwiseAbs().maxCoeff();
    if (with_fd && member == 1) {
        const HierarchyTable m2 = compute_table(f, sig, s - 2 * h, 0, grids);
        const HierarchyTable m1 = compute_table(f, sig, s - h, 0, grids);
        const HierarchyTable p1 = compute_table(f, sig, s + h, 0, grids);
        const HierarchyTable p2 = compute_table(f, sig, s + 2 * h, 0, grids);
        const Vec fd = (-m2.q[0] + 16.0 * m1.q[0] - 30.0 * T.q[0] + 16.0 * p1.q[0] - p2.q[0]) / (12.0 * h * h);
        HierarchyJets J(T);
        rep.fd_crosscheck = (fd - J.dq(0, 2)).cwiseAbs().maxCoeff();
    }
    return rep;
}

// Five-point FD of q0 in s against the algebraic q0''.
inline double pii_fd_crosscheck(const KernelFunction& f, const MeasureSpec& sig, double s,
                                const GridOptions& opt = {}) {
    return pii_residual(1, f, sig, s, opt, true).fd_crosscheck;
}

// Dormand-Prince 5(4) with step-size control. y' = rhs(x, y); integrates from
// x0 towards each target in order and records the state there.
template <std::size_t N, class Rhs>
std::vector<std::array<double, N>> dopri5(const Rhs& rhs, double x0, std::array<double, N> y,
                                          const std::vector<double>& targets, double atol, double rtol,
                                          double blowup = 1e6) {
    using S = std::array<double, N>;
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                            b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;
    auto axpy = [](const S& base, std::initializer_list<std::pair<double, const S*>> terms, double h) {
        S r = base;
        for (auto& [c, v] : terms)
            for (std::size_t i = 0; i < N; ++i) r[i] += h * c * (*v)[i];
        return r;
    };
    std::vector<S> out;
    double x = x0;
    double h = 1e-3;
    S k1 = rhs(x, y);
    for (double target : targets) {
        const double dir = target >= x ? 1.0 : -1.0;
        while (std::abs(target - x) > 1e-15 * std::max(1.0, std::abs(x))) {
            double step = dir * std::min(std::abs(h), std::abs(target - x));
            S k2 = rhs(x + c2 * step, axpy(y, {{a21, &k1}}, step));
            S k3 = rhs(x + c3 * step, axpy(y, {{a31, &k1}, {a32, &k2}}, step));
            S k4 = rhs(x + c4 * step, axpy(y, {{a41, &k1}, {a42, &k2}, {a43, &k3}}, step));
            S k5 = rhs(x + c5 * step, axpy(y, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}, step));
            S k6 = rhs(x + step, axpy(y, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}, step));
            S yn = axpy(y, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}}, step);
            S k7 = rhs(x + step, yn);
            double err = 0.0;
            for (std::size_t i = 0; i < N; ++i) {
                const double ei = step * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                                          e7 * k7[i]);
                const double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(yn[i]));
                err = std::max(err, std::abs(ei) / sc);
            }
            if (err <= 1.0) {
                x += step;
                y = yn;
                k1 = k7;
                for (double v : y)
                    if (!std::isfinite(v) || std::abs(v) > blowup)
                        throw Error(Errc::BlowUp, "ODE solution left the admissible range near x = " +
                                                      std::to_string(x));
            }
            const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
            h = std::abs(step) * fac;
        }
        x = target;
        out.push_back(y);
    }
    return out;
}

struct HastingsMcLeodSolution {
    double gamma = 1.0;
    double s_start = 8.0;
    std::vector<double> s_grid;  // descending
    std::vector<double> q;
    std::vector<double> dq;
    std::vector<double> f2;      // exp(-Int_s^inf (r - s) q^2)
    double matching_error = 0.0; // size of the neglected nonlinear term at the seed, relative
    double atol = 1e-30, rtol = 1e-12;
};

// q'' = s q + 2 q^3 integrated leftward from s = 8 with seed sqrt(gamma) (Ai, Ai')(8),
// carrying Int_s^inf q^2 and Int_s^inf r q^2 along for F2.
inline HastingsMcLeodSolution hastings_mcleod(double gamma, std::vector<double> s_points) {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw Error(Errc::BadArgument, "gamma must lie in (0,1]");
    HastingsMcLeodSolution sol;
    sol.gamma = gamma;
    const double s0 = sol.s_start;
    std::sort(s_points.begin(), s_points.end(), std::greater<>());
    for (double s : s_points)
        if (s > s0 || s < -8.0) throw Error(Errc::BadArgument, "s outside [-8, 8]");
    const KernelFunction ai = KernelFunction::airy(gamma);
    const double a0 = eval(ai, 0, s0), a1 = eval(ai, 1, s0);
    const double i1 = integrate_adaptive([&](double r) { double a = eval(ai, 0, r); return a * a; }, s0, 30.0,
                                         1e-30, 1e-14);
    const double i2 = integrate_adaptive([&](double r) { double a = eval(ai, 0, r); return r * a * a; }, s0,
                                         30.0, 1e-30, 1e-14);
    sol.matching_error = 2.0 * a0 * a0 / s0;
    auto rhs = [](double s, const std::array<double, 4>& y) {
        return std::array<double, 4>{y[1], s * y[0] + 2.0 * y[0] * y[0] * y[0], -y[0] * y[0], -s * y[0] * y[0]};
    };
    auto states = dopri5<4>(rhs, s0, {a0, a1, i1, i2}, s_points, sol.atol, sol.rtol);
    for (std::size_t k = 0; k < s_points.size(); ++k) {
        const double s = s_points[k];
        sol.s_grid.push_back(s);
        sol.q.push_back(states[k][0]);
        sol.dq.push_back(states[k][1]);
        sol.f2.push_back(std::exp(-(states[k][3] - s * states[k][2])));
    }
    return sol;
}

// F2(s) = exp(-Int_s^inf (r - s) q(r)^2 dr) from the Hastings-McLeod ODE alone.
inline double f2_via_ode(double s, double gamma = 1.0) {
    if (s >= 8.0) {
        const KernelFunction ai = KernelFunction::airy(gamma);
        const double v = integrate_adaptive(
            [&](double r) { double a = eval(ai, 0, r); return (r - s) * a * a; }, s, s + 30.0, 1e-30, 1e-14);
        return std::exp(-v);
    }
    return hastings_mcleod(gamma, {s}).f2.front();
}

}  // namespace fredhier

#endif
