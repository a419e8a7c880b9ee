#ifndef FREDHIER_KPZ_HPP
#define FREDHIER_KPZ_HPP

#include <cmath>

#include "hierarchy.hpp"

namespace fredhier {

// z = e^{-s t^{1/3}}; the Fermi factor is then 1/(1 + e^{-t^{1/3}(u - s)}).
struct KpzQuery {
    double t = 1.0;
    double s = 0.0;
    double beta_eff() const { return std::cbrt(t); }
    MeasureSpec weight() const {
        if (!(t > 0.0)) throw Error(Errc::BadArgument, "KPZ time must be positive");
        return MeasureSpec::fermi(beta_eff(), s);
    }
};

// Christoffel-Darboux form; the diagonal is Ai'(x)^2 - x Ai(x)^2.
inline double airy_kernel(double x, double y) {
    const auto a = detail::airy_pair(x);
    if (x == y) return a[1] * a[1] - x * a[0] * a[0];
    const auto b = detail::airy_pair(y);
    return (a[0] * b[1] - a[1] * b[0]) / (x - y);
}

// Real-line window [s - 32/beta, max(cutoff, s + 1)], graded at u = s once beta > 2.
inline QuadratureGrid kpz_grid(const KpzQuery& q, const PanelOptions& po = {}) {
    QuadratureGrid g = t_grid_for(KernelFunction::airy(), q.weight(), 0.0, po);
    if (g.kind != GridKind::GradedAtPoint) g.kind = GridKind::RealLineTruncated;
    return g;
}

// sqrt(sigma) K_Ai sqrt(sigma) (symmetric) or sigma K_Ai (similar to it).
inline DiscreteOperator kpz_operator(const KpzQuery& q, const QuadratureGrid& g, bool symmetric = true) {
    const MeasureSpec sig = q.weight();
    const int n = g.size();
    Vec sg(n);
    for (int i = 0; i < n; ++i) sg[i] = sig.sigma(g.nodes[i]);
    Mat K(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) K(i, j) = K(j, i) = airy_kernel(g.nodes[i], g.nodes[j]);
    Mat M(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            M(i, j) = symmetric ? std::sqrt(sg[i] * g.weights[i]) * K(i, j) * std::sqrt(sg[j] * g.weights[j])
                                : sg[i] * K(i, j) * g.weights[j];
    return {g, M, symmetric ? "sqrt(sigma) K_Ai sqrt(sigma)" : "sigma K_Ai"};
}

// E[exp(-z e^{H(t)})] = Det(I - sigma K_Ai) on L^2(R).
inline double droplet_generating_function(const KpzQuery& q, const PanelOptions& po = {}) {
    return fredholm_det(kpz_operator(q, kpz_grid(q, po)));
}

// Same determinant through the half-line lift Det(I - Ai_0^T sigma Ai_0).
inline double droplet_lifted(const KpzQuery& q, const GridOptions& opt = {}) {
    return compute_table(KernelFunction::airy(), q.weight(), 0.0, 0, opt).det;
}

}  // namespace fredhier

#endif
