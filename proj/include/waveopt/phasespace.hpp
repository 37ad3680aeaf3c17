#pragma once

// The CWT on an (alpha, beta) surface, the ambiguity function and the
// definition-level phase space uncertainty. This is the independent route
// against which the pull-back formula is cross-validated.
//
// For fixed alpha the whole beta sweep is one Fourier-type quadrature:
//   W_f[s](alpha, beta_j) = sum_k s(w_k) conj(e^{alpha/2} f(e^alpha w_k))
//                                 e^{i w_k beta_j} w_signal[k]
// advanced across the equi-spaced beta_j by per-node phase recurrences.
// Rows are independent and computed in parallel (WAVEOPT_THREADS caps the
// worker count).

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>

#include "uncertainty.hpp"

namespace waveopt {

struct surface_coverage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::vector<double> linspace(double lo, double hi, int n) {
    if (n < 1) throw std::invalid_argument("linspace: empty");
    std::vector<double> v(n);
    if (n == 1) {
        v[0] = lo;
        return v;
    }
    for (int k = 0; k < n; ++k) v[k] = lo + (hi - lo) * k / (n - 1);
    return v;
}

struct AmbiguitySurface {
    std::vector<double> alpha_nodes;   // equi-spaced
    std::vector<double> beta_nodes;    // equi-spaced
    std::vector<cplx> values;          // row-major, [i * nb + j]
    std::vector<double> haar_weights;  // e^{-alpha_i} da db, endpoint-halved

    int na() const { return (int)alpha_nodes.size(); }
    int nb() const { return (int)beta_nodes.size(); }
    cplx at(int i, int j) const { return values[(size_t)i * nb() + j]; }
    double weight(int i, int j) const { return haar_weights[(size_t)i * nb() + j]; }
};

inline int worker_count() {
    if (const char* env = std::getenv("WAVEOPT_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : (int)hc;
}

namespace detail {

inline void parallel_rows(int rows, const std::function<void(int)>& body) {
    const int workers = std::min(worker_count(), rows);
    if (workers <= 1) {
        for (int i = 0; i < rows; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < rows; i = next.fetch_add(1)) body(i);
        });
    for (auto& th : pool) th.join();
}

inline double uniform_step(const std::vector<double>& nodes, const char* what) {
    if (nodes.empty()) throw std::invalid_argument(std::string(what) + ": empty node list");
    if (nodes.size() == 1) return 0.0;
    const double d = (nodes.back() - nodes.front()) / (double)(nodes.size() - 1);
    for (size_t k = 0; k + 1 < nodes.size(); ++k)
        if (std::abs(nodes[k + 1] - nodes[k] - d) > 1e-9 * std::max(1.0, std::abs(d)))
            throw std::invalid_argument(std::string(what) + ": nodes not equi-spaced");
    return d;
}

inline std::vector<double> trapezoid_weights(size_t n, double step) {
    std::vector<double> w(n, step);
    if (n == 1) {
        w[0] = 1.0;
        return w;
    }
    w.front() *= 0.5;
    w.back() *= 0.5;
    return w;
}

// One alpha row of the sweep, writing nb complex results.
inline void sweep_row(const std::vector<double>& omega, const std::vector<cplx>& row_window,
                      double beta0, double beta_step, int nb, cplx* out) {
    const int n = (int)omega.size();

    // trim the inactive tails of the window
    int lo = 0, hi = n;
    while (lo < n && row_window[lo] == cplx(0.0)) ++lo;
    while (hi > lo && row_window[hi - 1] == cplx(0.0)) --hi;
    const int m = hi - lo;
    if (m <= 0) {
        std::fill(out, out + nb, cplx(0.0));
        return;
    }

    std::vector<double> gr(m), gi(m), pr(m), pi_(m), rr(m), ri(m);
    for (int k = 0; k < m; ++k) {
        const cplx g = row_window[lo + k];
        gr[k] = g.real();
        gi[k] = g.imag();
        const double w = omega[lo + k];
        pr[k] = std::cos(w * beta0);
        pi_[k] = std::sin(w * beta0);
        rr[k] = std::cos(w * beta_step);
        ri[k] = std::sin(w * beta_step);
    }

    for (int j = 0; j < nb; ++j) {
        // 4-way split accumulators keep the reduction vectorizable with a
        // fixed, run-independent summation order
        double ar[4] = {0, 0, 0, 0}, ai[4] = {0, 0, 0, 0};
        for (int k = 0; k < m; ++k) {
            const double a = pr[k], b = pi_[k];
            ar[k & 3] += gr[k] * a - gi[k] * b;
            ai[k & 3] += gr[k] * b + gi[k] * a;
            pr[k] = a * rr[k] - b * ri[k];
            pi_[k] = a * ri[k] + b * rr[k];
        }
        out[j] = cplx((ar[0] + ar[1]) + (ar[2] + ar[3]), (ai[0] + ai[1]) + (ai[2] + ai[3]));
    }
}

}  // namespace detail

// W_f[s](alpha, beta) = <s, pi(alpha, beta) f>_S on the node lattice.
inline AmbiguitySurface wavelet_transform(const WaveletFn& f, const WaveletFn& s,
                                          std::vector<double> alpha_nodes,
                                          std::vector<double> beta_nodes) {
    require_same_grid(f, s);
    const double da = detail::uniform_step(alpha_nodes, "alpha_nodes");
    const double db = detail::uniform_step(beta_nodes, "beta_nodes");

    AmbiguitySurface surf;
    surf.alpha_nodes = std::move(alpha_nodes);
    surf.beta_nodes = std::move(beta_nodes);
    const int na = surf.na(), nb = surf.nb();
    surf.values.resize((size_t)na * nb);

    const auto wa = detail::trapezoid_weights(na, da);
    const auto wb = detail::trapezoid_weights(nb, db);
    surf.haar_weights.resize((size_t)na * nb);
    for (int i = 0; i < na; ++i)
        for (int j = 0; j < nb; ++j)
            surf.haar_weights[(size_t)i * nb + j] = std::exp(-surf.alpha_nodes[i]) * wa[i] * wb[j];

    const int n = f.size();
    const double beta0 = surf.beta_nodes.front();
    detail::parallel_rows(na, [&](int i) {
        const double alpha = surf.alpha_nodes[i];
        std::vector<cplx> window =
            alpha == 0.0 ? f.values : resample_log_shift(f, alpha);
        const double half = std::exp(0.5 * alpha);
        for (int k = 0; k < n; ++k)
            window[k] = s.values[k] * std::conj(half * window[k]) * f.grid->w_signal[k];
        detail::sweep_row(f.grid->nodes, window, beta0, db, nb,
                          surf.values.data() + (size_t)i * nb);
    });
    return surf;
}

struct AmbiguityResult {
    AmbiguitySurface surface;      // un-normalized K_f = W_f[f]
    double signal_norm = 0.0;
    double window_norm = 0.0;
    double norm_factor = 0.0;      // sqrt(2 pi) ||f||_S ||f||_W; K_hat = K / norm_factor
    double normalized_l2 = 0.0;    // L2(dmu) norm of K_hat on the surface (-> 1)
};

inline AmbiguityResult ambiguity(const WaveletFn& f, std::vector<double> alpha_nodes,
                                 std::vector<double> beta_nodes) {
    AmbiguityResult res;
    res.signal_norm = norm(f, Space::signal);
    res.window_norm = norm(f, Space::window);
    if (res.signal_norm == 0.0 || res.window_norm == 0.0)
        throw std::invalid_argument("ambiguity: zero norm");
    res.surface = wavelet_transform(f, f, std::move(alpha_nodes), std::move(beta_nodes));
    res.norm_factor = std::sqrt(2.0 * M_PI) * res.signal_norm * res.window_norm;
    double acc = 0.0;
    for (size_t k = 0; k < res.surface.values.size(); ++k)
        acc += std::norm(res.surface.values[k]) * res.surface.haar_weights[k];
    res.normalized_l2 = std::sqrt(acc) / res.norm_factor;
    return res;
}

// Mass fraction of |K_hat|^2 dmu carried by the outermost node ring.
inline double boundary_mass_fraction(const AmbiguitySurface& s) {
    const int na = s.na(), nb = s.nb();
    double total = 0.0, edge = 0.0;
    for (int i = 0; i < na; ++i)
        for (int j = 0; j < nb; ++j) {
            const double m = std::norm(s.at(i, j)) * s.weight(i, j);
            total += m;
            if (i == 0 || i == na - 1 || j == 0 || j == nb - 1) edge += m;
        }
    return total > 0.0 ? edge / total : 0.0;
}

// Surface half-widths sized from the pull-back terms: 6 standard spreads
// per axis.
inline std::pair<double, double> suggested_half_widths(const UncertaintyReport& pullback) {
    const double va = pullback.term("scale_var") + pullback.term("window_scale_var");
    const double vb = pullback.term("time_var") + pullback.term("window_dilation");
    return {6.0 * std::sqrt(va), 6.0 * std::sqrt(vb)};
}

// Definition-level phase space uncertainty: variances of the phase-space
// coordinate observables on the normalized ambiguity surface. Expected
// values are computed and subtracted, not assumed zero.
inline UncertaintyReport phase_uncertainty_direct(const WaveletFn& f,
                                                  std::vector<double> alpha_nodes,
                                                  std::vector<double> beta_nodes,
                                                  double boundary_tol = 1e-4) {
    if ((int)alpha_nodes.size() < 8 || (int)beta_nodes.size() < 8)
        throw std::invalid_argument("phase_uncertainty_direct: surface too small");
    const AmbiguityResult amb = ambiguity(f, std::move(alpha_nodes), std::move(beta_nodes));
    const AmbiguitySurface& s = amb.surface;

    const double bmass = boundary_mass_fraction(s);
    if (bmass > boundary_tol)
        throw surface_coverage_error("phase_uncertainty_direct: boundary mass " +
                                     std::to_string(bmass) + " exceeds tolerance");

    const int na = s.na(), nb = s.nb();
    double total = 0.0, ea = 0.0, eb = 0.0;
    for (int i = 0; i < na; ++i)
        for (int j = 0; j < nb; ++j) {
            const double m = std::norm(s.at(i, j)) * s.weight(i, j);
            total += m;
            ea += s.alpha_nodes[i] * m;
            eb += s.beta_nodes[j] * m;
        }
    ea /= total;
    eb /= total;
    double va = 0.0, vb = 0.0;
    for (int i = 0; i < na; ++i)
        for (int j = 0; j < nb; ++j) {
            const double m = std::norm(s.at(i, j)) * s.weight(i, j);
            const double dai = s.alpha_nodes[i] - ea;
            const double dbj = s.beta_nodes[j] - eb;
            va += dai * dai * m;
            vb += dbj * dbj * m;
        }
    va /= total;
    vb /= total;

    UncertaintyReport rep;
    rep.functional = Functional::phase;
    rep.terms = {{"alpha_var", va}, {"beta_var", vb}};
    rep.total = va + vb;
    rep.residuals = detail::constraint_residuals(detail::unit_signal(f));
    rep.diagnostics = {{"boundary_mass", bmass},
                       {"surface_l2_norm", amb.normalized_l2},
                       {"e_alpha", ea},
                       {"e_beta", eb}};
    return rep;
}

}  // namespace waveopt
