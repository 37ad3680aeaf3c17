#pragma once

// Discretization of the positive frequency half-line on a log-uniform grid,
// with quadrature weights for the two measures in play:
//   signal space  S = L^2(R+, dw)
//   window space  W = L^2(R+, dw/w)
// plus the calculus primitives built on top (inner products, derivatives,
// the log warp and the scale transform).

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace waveopt {

using cplx = std::complex<double>;

enum class Space { signal, window };

struct FreqGrid {
    double omega_min = 0.0;
    double omega_max = 0.0;
    int n = 0;
    double log_step = 0.0;             // spacing of ln(nodes)
    std::vector<double> nodes;         // log-uniform, endpoints inclusive
    std::vector<double> s_nodes;       // ln(nodes), equi-spaced
    std::vector<double> w_signal;      // quadrature weights for integral(. dw)
    std::vector<double> w_window;      // w_signal / nodes, weights for integral(. dw/w)
};

using GridPtr = std::shared_ptr<const FreqGrid>;

// Trapezoidal weights in s = ln(w) with Gregory end corrections
// (3/8, 7/6, 23/24 at the three boundary nodes), mapped back to w by the
// Jacobian. The corrected rule has O(step^4) boundary error, which keeps
// the exactness invariants (constant and degree-1 integrands times the
// Jacobian) within 1e-10 while leaving interior weights at step * node.
inline GridPtr build_grid(double omega_min, double omega_max, int n) {
    if (!(omega_min > 0.0))
        throw std::invalid_argument("build_grid: omega_min must be > 0");
    if (!(omega_max > omega_min))
        throw std::invalid_argument("build_grid: omega_max must exceed omega_min");
    if (n < 16)
        throw std::invalid_argument("build_grid: need at least 16 nodes");

    auto g = std::make_shared<FreqGrid>();
    g->omega_min = omega_min;
    g->omega_max = omega_max;
    g->n = n;

    const double s0 = std::log(omega_min);
    const double s1 = std::log(omega_max);
    const double d = (s1 - s0) / (n - 1);
    g->log_step = d;

    g->s_nodes.resize(n);
    g->nodes.resize(n);
    for (int k = 0; k < n; ++k) {
        // affine blend keeps endpoints exact and spacing uniform to rounding
        const double t = double(k) / (n - 1);
        g->s_nodes[k] = (1.0 - t) * s0 + t * s1;
        g->nodes[k] = std::exp(g->s_nodes[k]);
    }
    g->nodes.front() = omega_min;
    g->nodes.back() = omega_max;

    g->w_signal.resize(n);
    g->w_window.resize(n);
    for (int k = 0; k < n; ++k) {
        double c = 1.0;
        if (k == 0 || k == n - 1) c = 3.0 / 8.0;
        else if (k == 1 || k == n - 2) c = 7.0 / 6.0;
        else if (k == 2 || k == n - 3) c = 23.0 / 24.0;
        g->w_window[k] = d * c;
        g->w_signal[k] = g->w_window[k] * g->nodes[k];
    }
    return g;
}

struct WaveletFn {
    GridPtr grid;
    std::vector<cplx> values;   // one sample per node; zero outside the grid

    int size() const { return grid ? grid->n : 0; }
};

inline WaveletFn make_wavelet(GridPtr grid, std::vector<cplx> values) {
    if (!grid) throw std::invalid_argument("make_wavelet: null grid");
    if ((int)values.size() != grid->n)
        throw std::invalid_argument("make_wavelet: values length != grid.n");
    return WaveletFn{std::move(grid), std::move(values)};
}

inline WaveletFn zero_wavelet(GridPtr grid) {
    return make_wavelet(std::move(grid), std::vector<cplx>(grid ? grid->n : 0));
}

inline bool same_grid(const FreqGrid& a, const FreqGrid& b) {
    return a.n == b.n && a.omega_min == b.omega_min && a.omega_max == b.omega_max;
}

inline void require_same_grid(const WaveletFn& f, const WaveletFn& g) {
    if (f.grid.get() == g.grid.get()) return;
    if (!f.grid || !g.grid || !same_grid(*f.grid, *g.grid))
        throw std::invalid_argument("wavelets live on different grids");
}

inline const std::vector<double>& weights_for(const FreqGrid& g, Space space) {
    return space == Space::signal ? g.w_signal : g.w_window;
}

// <f, g> = sum f * conj(g) * w, with w chosen by the space.
inline cplx inner_product(const WaveletFn& f, const WaveletFn& g, Space space) {
    require_same_grid(f, g);
    const auto& w = weights_for(*f.grid, space);
    cplx acc = 0.0;
    for (int k = 0; k < f.size(); ++k)
        acc += f.values[k] * std::conj(g.values[k]) * w[k];
    return acc;
}

inline double norm_sq(const WaveletFn& f, Space space) {
    const auto& w = weights_for(*f.grid, space);
    double acc = 0.0;
    for (int k = 0; k < f.size(); ++k) acc += std::norm(f.values[k]) * w[k];
    return acc;
}

inline double norm(const WaveletFn& f, Space space) {
    return std::sqrt(norm_sq(f, space));
}

// d/ds in the log variable: order-4 central stencil with order-4 one-sided
// rows in the two-node boundary layers. The transpose below must mirror the
// same coefficient table; gradient assembly depends on the exact pairing.
inline std::vector<cplx> log_derivative_samples(const WaveletFn& f) {
    const int n = f.size();
    const double q = 1.0 / (12.0 * f.grid->log_step);
    const auto& v = f.values;
    std::vector<cplx> out(n);
    out[0] = q * (-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]);
    out[1] = q * (-3.0 * v[0] - 10.0 * v[1] + 18.0 * v[2] - 6.0 * v[3] + v[4]);
    for (int k = 2; k + 2 < n; ++k)
        out[k] = q * (v[k - 2] - 8.0 * v[k - 1] + 8.0 * v[k + 1] - v[k + 2]);
    out[n - 2] =
        q * (3.0 * v[n - 1] + 10.0 * v[n - 2] - 18.0 * v[n - 3] + 6.0 * v[n - 4] - v[n - 5]);
    out[n - 1] = q * (25.0 * v[n - 1] - 48.0 * v[n - 2] + 36.0 * v[n - 3] - 16.0 * v[n - 4] +
                      3.0 * v[n - 5]);
    return out;
}

// Transpose of the d/ds stencil matrix, used by gradient assembly.
inline std::vector<cplx> log_derivative_transpose(const FreqGrid& g,
                                                  const std::vector<cplx>& v) {
    const int n = g.n;
    const double q = 1.0 / (12.0 * g.log_step);
    std::vector<cplx> out(n, cplx(0.0));
    const auto row = [&](int r, std::initializer_list<int> idx, std::initializer_list<double> co) {
        auto i = idx.begin();
        auto c = co.begin();
        for (; i != idx.end(); ++i, ++c) out[*i] += q * *c * v[r];
    };
    row(0, {0, 1, 2, 3, 4}, {-25.0, 48.0, -36.0, 16.0, -3.0});
    row(1, {0, 1, 2, 3, 4}, {-3.0, -10.0, 18.0, -6.0, 1.0});
    for (int k = 2; k + 2 < n; ++k) {
        out[k - 2] += q * v[k];
        out[k - 1] += -8.0 * q * v[k];
        out[k + 1] += 8.0 * q * v[k];
        out[k + 2] += -q * v[k];
    }
    row(n - 2, {n - 1, n - 2, n - 3, n - 4, n - 5}, {3.0, 10.0, -18.0, 6.0, -1.0});
    row(n - 1, {n - 1, n - 2, n - 3, n - 4, n - 5}, {25.0, -48.0, 36.0, -16.0, 3.0});
    return out;
}

// f'(w) via the chain rule f'(w) = (1/w) d/ds f(e^s).
inline WaveletFn derivative(const WaveletFn& f) {
    auto vals = log_derivative_samples(f);
    for (int k = 0; k < f.size(); ++k) vals[k] /= f.grid->nodes[k];
    return WaveletFn{f.grid, std::move(vals)};
}

// w f'(w) = d/ds f(e^s), exact operator identity on the log grid.
inline WaveletFn log_deriv(const WaveletFn& f) {
    return WaveletFn{f.grid, log_derivative_samples(f)};
}

// A sampled function on an equi-spaced line grid (s or sigma) carrying its
// own quadrature weights.
struct WarpedFn {
    double x_min = 0.0;
    double step = 0.0;
    std::vector<cplx> values;
    std::vector<double> weights;

    double norm_sq() const {
        double acc = 0.0;
        for (size_t k = 0; k < values.size(); ++k) acc += std::norm(values[k]) * weights[k];
        return acc;
    }
    double norm() const { return std::sqrt(norm_sq()); }
};

// f_flat(s) = f(e^s). A pure re-indexing on the log grid; the carried weights
// make ||f_flat||_{L2(ds)} equal to ||f||_W by construction.
inline WarpedFn log_warp(const WaveletFn& f) {
    WarpedFn w;
    w.x_min = f.grid->s_nodes.front();
    w.step = f.grid->log_step;
    w.values = f.values;
    w.weights = f.grid->w_window;
    return w;
}

// Scale transform U: f_tilde(sigma) = e^{-sigma/2} f(e^{-sigma}) on the
// increasing sigma grid (sigma = -s reversed). Unitary S -> L2(dsigma).
inline WarpedFn scale_transform(const WaveletFn& f) {
    const int n = f.size();
    WarpedFn w;
    w.x_min = -f.grid->s_nodes.back();
    w.step = f.grid->log_step;
    w.values.resize(n);
    w.weights.resize(n);
    for (int k = 0; k < n; ++k) {
        const int j = n - 1 - k;          // sigma_k = -s_j
        w.values[k] = std::sqrt(f.grid->nodes[j]) * f.values[j];
        w.weights[k] = f.grid->w_window[j];
    }
    return w;
}

// Cubic Lagrange resampling of f(e^{s + shift}) on the grid's own s nodes.
// Integer multiples of the log step reduce to exact re-indexing; points
// beyond the grid read as zero.
inline std::vector<cplx> resample_log_shift(const WaveletFn& f, double shift) {
    const int n = f.size();
    const double d = f.grid->log_step;
    std::vector<cplx> out(n, cplx(0.0));

    const double offset = shift / d;
    const double snapped = std::round(offset);
    if (std::abs(offset - snapped) < 1e-9) {
        const long m = (long)snapped;
        for (int k = 0; k < n; ++k) {
            const long j = k + m;
            if (j >= 0 && j < n) out[k] = f.values[j];
        }
        return out;
    }

    for (int k = 0; k < n; ++k) {
        const double u = k + offset;
        if (u < 0.0 || u > n - 1) continue;
        int m = (int)std::floor(u) - 1;
        m = std::clamp(m, 0, n - 4);
        const double x = u - m;
        const double l0 = -(x - 1.0) * (x - 2.0) * (x - 3.0) / 6.0;
        const double l1 = x * (x - 2.0) * (x - 3.0) / 2.0;
        const double l2 = -x * (x - 1.0) * (x - 3.0) / 2.0;
        const double l3 = x * (x - 1.0) * (x - 2.0) / 6.0;
        out[k] = l0 * f.values[m] + l1 * f.values[m + 1] + l2 * f.values[m + 2] +
                 l3 * f.values[m + 3];
    }
    return out;
}

}  // namespace waveopt
