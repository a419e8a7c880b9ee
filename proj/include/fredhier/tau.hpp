#ifndef FREDHIER_TAU_HPP
#define FREDHIER_TAU_HPP

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "hierarchy.hpp"

namespace fredhier {

struct Diagnostics {
    std::vector<std::string> warnings;
    void warn(std::string w) { warnings.push_back(std::move(w)); }
};

struct TauOptions {
    int nodes = 120;        // half-line Nystrom nodes
    double stretch = 1.0;   // half-line window scale
    int panel_nodes = 16;   // s-quadrature nodes per unit-length panel
};

// q0 on s in [s, s_hi] (Gauss-Legendre panels) plus the tail beyond s_hi,
// where q0 = A to within O(env^3).
struct TauProfile {
    double s = 0.0;
    double s_hi = 0.0;
    std::vector<double> s_grid;
    std::vector<double> weights;
    std::vector<double> q0;
    double int_q0 = 0.0;      // Int_s^inf q0
    double int_rq0sq = 0.0;   // Int_s^inf (r - s) q0^2
};

inline double q0_value(const KernelFunction& f, double s, const TauOptions& opt = {}) {
    const GridOptions go{opt.nodes, 2.0, 16, opt.stretch};
    return compute_table(f, MeasureSpec::projector(), s, 0, go).q[0](0);
}

inline TauProfile tau_profile(const KernelFunction& f, double s, const TauOptions& opt = {}) {
    TauProfile tp;
    tp.s = s;
    if (f.amplitude == 0.0) return tp;
    // beyond env < 1e-6 the resolvent correction is below 1e-17 relative
    const double s_hi = std::max(s, decay_cutoff(f, 1e-6 * f.amplitude));
    tp.s_hi = s_hi;
    if (s_hi > s) {
        const QuadratureGrid g = panel_grid({s, s_hi}, 1.0, opt.panel_nodes);
        for (int k = 0; k < g.size(); ++k) {
            const double r = g.nodes[k], q = q0_value(f, r, opt);
            tp.s_grid.push_back(r);
            tp.weights.push_back(g.weights[k]);
            tp.q0.push_back(q);
            tp.int_q0 += g.weights[k] * q;
            tp.int_rq0sq += g.weights[k] * (r - s) * q * q;
        }
    }
    const double far = s_hi + 40.0;
    tp.int_q0 += integrate_adaptive([&](double r) { return eval(f, 0, r); }, s_hi, far, 1e-30, 1e-15);
    tp.int_rq0sq += integrate_adaptive([&](double r) { const double a = eval(f, 0, r); return (r - s) * a * a; },
                                       s_hi, far, 1e-30, 1e-15);
    return tp;
}

struct DualRoute {
    double direct = 0.0;
    double tau = 0.0;
    double factorized = 0.0;  // product-of-determinants form, where one exists
};

inline QuadratureGrid tau_grid(const KernelFunction& f, double s, const TauOptions& opt) {
    return halfline_grid(f, s, opt.nodes, 1e-18, opt.stretch);
}

// b = Det(I - A_s) / Det(I + A_s) against exp(-Int_s^inf q0).
inline DualRoute ferrari_spohn_b(const KernelFunction& f, double s, const TauOptions& opt = {}) {
    DualRoute r;
    const DiscreteOperator A = discretize_As(f, s, tau_grid(f, s, opt));
    DiscreteOperator Am = A;
    Am.entries = -A.entries;
    r.direct = fredholm_det(A) / fredholm_det(Am);
    r.factorized = r.direct;
    r.tau = std::exp(-tau_profile(f, s, opt).int_q0);
    return r;
}

enum class F4Convention { Standard, Tilde };

// F2 = Det(I - K_Ai), F1 = Det(I - Ai_s), F4 = (Det(I - Ai_s) + Det(I + Ai_s)) / 2.
// Tilde evaluates F4 in the rescaled variable, F4~(s) = F4(sqrt(2) s).
inline double tracy_widom(int beta, double s, const TauOptions& opt = {}, Diagnostics* diag = nullptr,
                          F4Convention conv = F4Convention::Standard) {
    if (beta != 1 && beta != 2 && beta != 4) throw Error(Errc::BadArgument, "beta must be 1, 2 or 4");
    if (beta == 4 && conv == F4Convention::Tilde) s *= std::sqrt(2.0);
    if ((s < -10.0 || s > 6.0) && diag) diag->warn("OutOfCertifiedRange: s = " + std::to_string(s));
    const KernelFunction ai = KernelFunction::airy();
    const DiscreteOperator A = discretize_As(ai, s, tau_grid(ai, s, opt));
    DiscreteOperator Am = A;
    Am.entries = -A.entries;
    const double dm = fredholm_det(A);
    if (beta == 1) return dm;
    const double dp = fredholm_det(Am);
    return beta == 2 ? dm * dp : 0.5 * (dm + dp);
}

enum class PerturbKind { Ortho, Sympl, OrthoThinned };

// h(y) = Int_0^inf A(s + r + y) dr on the grid nodes.
inline Vec tail_integrals(const KernelFunction& f, double s, const QuadratureGrid& g) {
    Vec h(g.size());
    for (int i = 0; i < g.size(); ++i) {
        const double a = s + g.nodes[i];
        h[i] = integrate_adaptive([&](double u) { return eval(f, 0, u); }, a, std::max(a, 0.0) + 40.0, 1e-30,
                                  1e-15);
    }
    return h;
}

// Rank-one perturbations of K_s with f = A(s + .):
//   Ortho:        K + f (1 - h)^T
//   Sympl:        K - 1/2 f h^T
//   OrthoThinned: K + f (sqrt(alpha) - h)^T
// direct: determinant of the assembled matrix; tau: exp/cosh/sinh of Int q0,
// Int (r - s) q0^2; factorized: the Det(I -+ A_s) product form. The tau route
// costs a q0 profile (one table per s node) and is skipped, left NaN, when
// with_tau is false.
inline DualRoute perturbed_det(PerturbKind kind, const KernelFunction& f, double s, double alpha = 1.0,
                               const TauOptions& opt = {}, bool with_tau = true) {
    const QuadratureGrid g = tau_grid(f, s, opt);
    const DiscreteOperator A = discretize_As(f, s, g);
    const Vec sw = g.sqrt_weights();
    Vec fa(g.size());
    for (int i = 0; i < g.size(); ++i) fa[i] = eval(f, 0, s + g.nodes[i]);
    const Vec h = tail_integrals(f, s, g);
    Vec gv;
    switch (kind) {
    case PerturbKind::Ortho: gv = Vec::Ones(g.size()) - h; break;
    case PerturbKind::Sympl: gv = -0.5 * h; break;
    case PerturbKind::OrthoThinned: gv = std::sqrt(alpha) * Vec::Ones(g.size()) - h; break;
    }
    DiscreteOperator P{g, A.entries * A.entries + sw.cwiseProduct(fa) * sw.cwiseProduct(gv).transpose(),
                       "perturbed"};
    DualRoute r;
    r.direct = fredholm_det(P);

    DiscreteOperator Am = A;
    Am.entries = -A.entries;
    const double dm = fredholm_det(A), dp = fredholm_det(Am);
    const TauProfile tp = with_tau ? tau_profile(f, s, opt) : TauProfile{};
    const double e = std::exp(-tp.int_rq0sq), m = tp.int_q0;
    switch (kind) {
    case PerturbKind::Ortho:
        r.factorized = dm * dm;
        r.tau = std::exp(-tp.int_rq0sq - m);
        break;
    case PerturbKind::Sympl:
        r.factorized = 0.25 * (dp + dm) * (dp + dm);
        r.tau = e * std::pow(std::cosh(0.5 * m), 2);
        break;
    case PerturbKind::OrthoThinned: {
        const double sa = std::sqrt(alpha);
        r.factorized = 0.5 * (sa + 1.0) * dm * dm - 0.5 * (sa - 1.0) * dp * dp;
        r.tau = e * (std::cosh(m) - sa * std::sinh(m));
        break;
    }
    }
    if (!with_tau) r.tau = std::numeric_limits<double>::quiet_NaN();
    return r;
}

struct GinibreValue {
    double value = 1.0;         // F(s, gamma)
    double radicand = 1.0;      // F^2 from the assembled determinant
    double baik_bothner = 1.0;  // F^2 = exp(-Int (x - s) q0^2) {cosh mu - sqrt(gamma) sinh mu}, mu = Int q0
};

// F(s, gamma) = sqrt(Det(I - gamma K_s - gamma A_s |delta><1| (I - A_s))), A = e^{-x^2}/sqrt(pi).
inline GinibreValue ginibre_cdf(double s, double gamma, const TauOptions& opt = {}, Diagnostics* diag = nullptr) {
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw Error(Errc::BadArgument, "gamma must lie in [0,1]");
    GinibreValue v;
    if (gamma == 0.0) return v;
    const KernelFunction a = KernelFunction::gaussian(1.0);
    const QuadratureGrid g = tau_grid(a, s, opt);
    const DiscreteOperator A = discretize_As(a, s, g);
    const Vec sw = g.sqrt_weights();
    Vec fa(g.size());
    for (int i = 0; i < g.size(); ++i) fa[i] = eval(a, 0, s + g.nodes[i]);
    const Vec gv = Vec::Ones(g.size()) - tail_integrals(a, s, g);
    const Mat M = gamma * (A.entries * A.entries + sw.cwiseProduct(fa) * sw.cwiseProduct(gv).transpose());
    v.radicand = fredholm_det(DiscreteOperator{g, M, "ginibre"});
    double rad = v.radicand;
    if (rad < 0.0) {
        if (rad < -1e-12 && diag) diag->warn("negative radicand " + std::to_string(rad) + " clamped to 0");
        rad = 0.0;
    }
    v.value = std::sqrt(rad);
    const TauProfile tp = tau_profile(KernelFunction::gaussian(gamma), s, opt);
    const double mu = tp.int_q0;
    v.baik_bothner = std::exp(-tp.int_rq0sq) * (std::cosh(mu) - std::sqrt(gamma) * std::sinh(mu));
    return v;
}

}  // namespace fredhier

#endif
