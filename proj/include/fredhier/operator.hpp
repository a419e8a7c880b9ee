#ifndef FREDHIER_OPERATOR_HPP
#define FREDHIER_OPERATOR_HPP

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"
#include "quadrature.hpp"
#include "specfn.hpp"

namespace fredhier {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

enum class GridKind { HalfLineTruncated, RealLineTruncated, GradedAtPoint, Composite };

struct QuadratureGrid {
    std::vector<double> nodes;
    std::vector<double> weights;
    double lower = 0.0;
    double upper = 0.0;
    GridKind kind = GridKind::HalfLineTruncated;
    double split = 0.0;

    int size() const { return static_cast<int>(nodes.size()); }
    bool identical(const QuadratureGrid& o) const {
        return nodes == o.nodes && weights == o.weights && lower == o.lower && upper == o.upper;
    }
    Vec sqrt_weights() const {
        Vec v(size());
        for (int i = 0; i < size(); ++i) v[i] = std::sqrt(weights[i]);
        return v;
    }
};

namespace detail {
inline void append_panel(QuadratureGrid& g, const GaussRule& r, double a, double b) {
    const double h = 0.5 * (b - a), c = 0.5 * (a + b);
    for (std::size_t k = 0; k < r.x.size(); ++k) {
        g.nodes.push_back(c + h * r.x[k]);
        g.weights.push_back(h * r.w[k]);
    }
}
}  // namespace detail

// Gauss-Legendre on [lower, upper]; GradedAtPoint uses two panels of n/2 nodes
// meeting at split.
inline QuadratureGrid build_grid(GridKind kind, int n_nodes, double lower, double upper,
                                 double split = 0.0) {
    if (n_nodes < 8) throw Error(Errc::BadArgument, "at least 8 quadrature nodes required");
    if (!(lower < upper)) throw Error(Errc::BadWindow, "grid window lower >= upper");
    QuadratureGrid g;
    g.lower = lower;
    g.upper = upper;
    g.kind = kind;
    if (kind == GridKind::GradedAtPoint) {
        if (!(split > lower && split < upper)) throw Error(Errc::BadWindow, "split outside window");
        const int n1 = n_nodes / 2;
        detail::append_panel(g, gauss_legendre(n1), lower, split);
        detail::append_panel(g, gauss_legendre(n_nodes - n1), split, upper);
        g.split = split;
    } else {
        detail::append_panel(g, gauss_legendre(n_nodes), lower, upper);
    }
    return g;
}

// Gauss-Legendre panels between consecutive breakpoints, nodes split
// proportionally to panel length (at least 8 per panel).
inline QuadratureGrid build_composite_grid(const std::vector<double>& breaks, int n_nodes) {
    if (breaks.size() < 2) throw Error(Errc::BadWindow, "composite grid needs two breakpoints");
    for (std::size_t i = 1; i < breaks.size(); ++i)
        if (!(breaks[i - 1] < breaks[i])) throw Error(Errc::BadWindow, "breakpoints not increasing");
    QuadratureGrid g;
    g.lower = breaks.front();
    g.upper = breaks.back();
    g.kind = GridKind::Composite;
    const double total = g.upper - g.lower;
    for (std::size_t i = 1; i < breaks.size(); ++i) {
        const int k = std::max(8, int(std::lround(n_nodes * (breaks[i] - breaks[i - 1]) / total)));
        detail::append_panel(g, gauss_legendre(k), breaks[i - 1], breaks[i]);
    }
    return g;
}

// Weight sigma on the line: half-line projector, thinned projector of mass
// gamma, or Fermi factor gamma / (1 + e^{-beta (r - center)}).
struct MeasureSpec {
    enum class Kind { ProjectorHalfLine, Thinned, Fermi };
    Kind kind = Kind::ProjectorHalfLine;
    double gamma = 1.0;
    double beta = std::numeric_limits<double>::infinity();
    double center = 0.0;

    static MeasureSpec projector() { return {}; }
    static MeasureSpec thinned(double gamma) {
        if (!(gamma >= 0.0 && gamma <= 1.0)) throw Error(Errc::BadArgument, "gamma must lie in [0,1]");
        return {Kind::Thinned, gamma, std::numeric_limits<double>::infinity(), 0.0};
    }
    static MeasureSpec fermi(double beta, double center = 0.0, double gamma = 1.0) {
        if (!(beta > 0.0)) throw Error(Errc::BadArgument, "beta must be positive");
        if (std::isinf(beta)) return gamma == 1.0 ? projector() : thinned(gamma);
        return {Kind::Fermi, gamma, beta, center};
    }
    bool point_mass() const { return kind != Kind::Fermi; }

    double sigma(double r) const {
        if (point_mass()) return r > 0 ? gamma : (r == 0 ? 0.5 * gamma : 0.0);
        const double a = beta * (r - center);
        // 1/(1+e^{-a}) without overflow on either side
        return a >= 0 ? gamma / (1.0 + std::exp(-a)) : gamma * std::exp(a) / (1.0 + std::exp(a));
    }
    // density sigma' (only for the Fermi kind; point masses are handled analytically)
    double density(double r) const {
        const double a = -beta * std::abs(r - center);
        const double e = std::exp(a);
        return beta * gamma * e / ((1.0 + e) * (1.0 + e));
    }
    std::string describe() const {
        switch (kind) {
        case Kind::ProjectorHalfLine: return "projector";
        case Kind::Thinned: return "thinned(" + std::to_string(gamma) + ")";
        case Kind::Fermi: return "fermi(beta=" + std::to_string(beta) + ")";
        }
        return "?";
    }
};

// Nystrom matrix M[i][j] = sqrt(w_i) k(x_i, x_j) sqrt(w_j).
struct DiscreteOperator {
    QuadratureGrid grid;
    Mat entries;
    std::string kernel_tag;
    int size() const { return static_cast<int>(entries.rows()); }
};

// Samples sqrt(w_i) A^(p)(x_i + shift_k) for p = 0..pmax, one matrix per p,
// rows over grid nodes and columns over shifts.
inline std::vector<Mat> sample_shifted(const KernelFunction& f, int pmax, const QuadratureGrid& grid,
                                       const std::vector<double>& shifts, bool weighted = true) {
    const int n = grid.size(), m = static_cast<int>(shifts.size());
    std::vector<Mat> out(pmax + 1, Mat(n, m));
    std::array<double, kMaxDerivative + 1> buf{};
    for (int k = 0; k < m; ++k)
        for (int i = 0; i < n; ++i) {
            eval_upto(f, pmax, grid.nodes[i] + shifts[k], buf.data());
            const double sw = weighted ? std::sqrt(grid.weights[i]) : 1.0;
            for (int p = 0; p <= pmax; ++p) out[p](i, k) = sw * buf[p];
        }
    return out;
}

inline double truncation_defect(const KernelFunction& f, double s, const QuadratureGrid& grid) {
    return envelope(f)(s + grid.upper);
}

inline void check_truncation(const KernelFunction& f, double s, const QuadratureGrid& grid) {
    if (f.amplitude == 0.0) return;
    if (s + grid.upper < kEnvelopeOrigin || truncation_defect(f, s, grid) > 1e-8)
        throw Error(Errc::TruncationTooTight,
                    "profile not negligible at the window edge s+L = " + std::to_string(s + grid.upper));
}

// Half-line window [0, L] with env(s + L) below tol.
inline QuadratureGrid halfline_grid(const KernelFunction& f, double s, int n_nodes, double tol = 1e-18,
                                    double stretch = 1.0) {
    const double L = std::max(decay_cutoff(f, tol) - s, 1.0) * stretch;
    return build_grid(GridKind::HalfLineTruncated, n_nodes, 0.0, L);
}

inline DiscreteOperator discretize_As(const KernelFunction& f, double s, const QuadratureGrid& grid) {
    check_truncation(f, s, grid);
    const int n = grid.size();
    DiscreteOperator op{grid, Mat(n, n), "A_s[" + f.describe() + "]"};
    const Vec sw = grid.sqrt_weights();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j)
            op.entries(i, j) = op.entries(j, i) =
                sw[i] * eval(f, 0, grid.nodes[i] + grid.nodes[j] + s) * sw[j];
    return op;
}

inline DiscreteOperator discretize_Ks(const KernelFunction& f, double s, const QuadratureGrid& grid) {
    DiscreteOperator a = discretize_As(f, s, grid);
    Mat k = a.entries * a.entries;
    k = 0.5 * (k + k.transpose());
    return {grid, k, "K_s[" + f.describe() + "]"};
}

// Gauss-Legendre panels of length <= panel_len and per_panel nodes between
// consecutive breakpoints.
inline QuadratureGrid panel_grid(const std::vector<double>& breaks, double panel_len, int per_panel) {
    if (breaks.size() < 2) throw Error(Errc::BadWindow, "panel grid needs two breakpoints");
    QuadratureGrid g;
    g.lower = breaks.front();
    g.upper = breaks.back();
    g.kind = GridKind::Composite;
    const GaussRule r = gauss_legendre(per_panel);
    for (std::size_t i = 1; i < breaks.size(); ++i) {
        const double a = breaks[i - 1], b = breaks[i];
        if (!(a < b)) throw Error(Errc::BadWindow, "breakpoints not increasing");
        const int k = std::max(1, int(std::ceil((b - a) / panel_len - 1e-9)));
        for (int j = 0; j < k; ++j) detail::append_panel(g, r, a + (b - a) * j / k, a + (b - a) * (j + 1) / k);
    }
    return g;
}

struct PanelOptions {
    double panel_len = 2.0;
    int per_panel = 16;
    double stretch = 1.0;
};

// Lower edge of the t-window: sigma'(T) max|u_0| below ~1e-12.
inline double t_window_lower(const MeasureSpec& sig, double stretch = 1.0) {
    return sig.center - stretch * 32.0 / sig.beta;
}

// Inner r-grid for the lifted operators: from the lower edge above to where
// A(s + r) has decayed. Once the Fermi step (width ~ 1/beta) is narrower than a
// panel, everything up to center + 30/beta gets panels of length <= 4/beta;
// the tail e^{-beta |r - c|} is below 1e-13 outside that band.
inline QuadratureGrid t_grid_for(const KernelFunction& f, const MeasureSpec& sig, double s,
                                 const PanelOptions& po = {}, double tol = 1e-18) {
    if (sig.point_mass()) throw Error(Errc::BadArgument, "point-mass measures have no t-grid");
    const double c = sig.center;
    const double lo = t_window_lower(sig, po.stretch);
    const double up = c + po.stretch * std::max(decay_cutoff(f, tol) - s - c, 1.0);
    const double band = 4.0 / sig.beta;
    if (band >= po.panel_len) return panel_grid({lo, up}, po.panel_len, po.per_panel);
    const double d = std::min(30.0 / sig.beta, 0.5 * (up - c));
    QuadratureGrid g = panel_grid({lo, c, c + d}, band, po.per_panel);
    const QuadratureGrid tail = panel_grid({c + d, up}, po.panel_len, po.per_panel);
    g.nodes.insert(g.nodes.end(), tail.nodes.begin(), tail.nodes.end());
    g.weights.insert(g.weights.end(), tail.weights.begin(), tail.weights.end());
    g.upper = up;
    g.kind = GridKind::GradedAtPoint;
    g.split = c;
    return g;
}

// K_2 = A_s^T sigma A_s on the half-line grid, r-integral on t_grid.
inline DiscreteOperator discretize_K2(const KernelFunction& f, double s, const MeasureSpec& sig,
                                      const QuadratureGrid& halfline, const QuadratureGrid* tgrid) {
    if (sig.point_mass()) {
        DiscreteOperator k = discretize_Ks(f, s, halfline);
        k.entries *= sig.gamma;
        k.kernel_tag = "K_2[" + f.describe() + "," + sig.describe() + "]";
        return k;
    }
    if (!tgrid) throw Error(Errc::BadArgument, "Fermi measure needs a t-grid");
    check_truncation(f, s, halfline);
    if (f.amplitude != 0.0 && envelope(f)(s + tgrid->upper) > 1e-8)
        throw Error(Errc::TruncationTooTight, "t-grid upper edge too short for the profile decay");
    Mat B = sample_shifted(f, 0, halfline, [&] {
                std::vector<double> sh(tgrid->nodes);
                for (double& v : sh) v += s;
                return sh;
            }())[0];
    Vec om(tgrid->size());
    for (int k = 0; k < tgrid->size(); ++k) om[k] = sig.sigma(tgrid->nodes[k]) * tgrid->weights[k];
    Mat k2 = B * om.asDiagonal() * B.transpose();
    k2 = 0.5 * (k2 + k2.transpose());
    return {halfline, k2, "K_2[" + f.describe() + "," + sig.describe() + "]"};
}

// K_1 = sigma A_s A_s^T on the line, symmetrized with sqrt(sigma).
inline DiscreteOperator discretize_K1(const KernelFunction& f, double s, const MeasureSpec& sig,
                                      const QuadratureGrid& halfline, const QuadratureGrid& tgrid) {
    std::vector<double> sh(tgrid.nodes);
    for (double& v : sh) v += s;
    Mat B = sample_shifted(f, 0, halfline, sh)[0];  // sqrt(w_x) A(x_i + t_k + s)
    Vec r(tgrid.size());
    for (int k = 0; k < tgrid.size(); ++k) r[k] = std::sqrt(sig.sigma(tgrid.nodes[k]) * tgrid.weights[k]);
    Mat C = r.asDiagonal() * B.transpose();
    Mat k1 = C * C.transpose();
    return {tgrid, 0.5 * (k1 + k1.transpose()), "K_1[" + f.describe() + "," + sig.describe() + "]"};
}

namespace detail {
inline Eigen::PartialPivLU<Mat> factor(const DiscreteOperator& op) {
    const int n = op.size();
    Mat a = Mat::Identity(n, n) - op.entries;
    if (!a.allFinite()) throw Error(Errc::NonFinite, "operator entries are not finite");
    Eigen::PartialPivLU<Mat> lu(a);
    const auto& u = lu.matrixLU();
    for (int i = 0; i < n; ++i)
        if (std::abs(u(i, i)) < 1e-13) throw Error(Errc::SingularMatrix, "I - M has a vanishing pivot");
    return lu;
}
}  // namespace detail

inline double fredholm_det(const DiscreteOperator& op) {
    if (op.size() == 0 || op.entries.isZero(0.0)) return 1.0;
    return detail::factor(op).determinant();
}

inline double fredholm_det(const Mat& m) { return fredholm_det(DiscreteOperator{{}, m, ""}); }

// log |det(I - M)| summed over pivots, for determinants near underflow.
inline double log_fredholm_det(const DiscreteOperator& op) {
    if (op.size() == 0 || op.entries.isZero(0.0)) return 0.0;
    auto lu = detail::factor(op);
    double s = 0.0;
    for (int i = 0; i < op.size(); ++i) s += std::log(std::abs(lu.matrixLU()(i, i)));
    return s;
}

inline Vec solve(const DiscreteOperator& op, const Vec& rhs) {
    if (rhs.size() != op.size()) throw Error(Errc::BadArgument, "rhs size mismatch");
    if (op.entries.isZero(0.0)) return rhs;
    return detail::factor(op).solve(rhs);
}

inline Mat solve(const DiscreteOperator& op, const Mat& rhs) {
    if (op.entries.isZero(0.0)) return rhs;
    return detail::factor(op).solve(rhs);
}

// Det(I - M - f g^T) = Det(I - M) (1 - g^T (I - M)^{-1} f); f, g are function
// samples on the grid, the sqrt(w) factors are applied here.
inline double det_rank_one_perturbed(const DiscreteOperator& op, const Vec& f, const Vec& g) {
    const Vec sw = op.grid.sqrt_weights();
    const Vec ft = sw.cwiseProduct(f), gt = sw.cwiseProduct(g);
    if (f.isZero(0.0)) return fredholm_det(op);
    return fredholm_det(op) * (1.0 - gt.dot(solve(op, ft)));
}

// Largest |eigenvalue| by power iteration on M (symmetric inputs).
inline double spectral_radius(const DiscreteOperator& op, int iters = 500) {
    const int n = op.size();
    if (n == 0) return 0.0;
    Vec v = Vec::Ones(n) / std::sqrt(double(n));
    double lam = 0.0;
    for (int it = 0; it < iters; ++it) {
        Vec w = op.entries * v;
        const double nw = w.norm();
        if (nw == 0.0) return 0.0;
        if (std::abs(nw - lam) < 1e-14 * nw) {
            lam = nw;
            break;
        }
        lam = nw;
        v = w / nw;
    }
    return lam;
}

}  // namespace fredhier

#endif
