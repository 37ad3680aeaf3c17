#pragma once

// Time and scale observables on the frequency half-line, the affine group
// action, moment bookkeeping and the canonical normal form
//   ||f||_S = 1,  e(T_x) = e(T_sigma) = 0.
//
// Conventions: T_x f = i f'(w), T_sigma f = -ln(w) f(w), and the group acts
// by pi(alpha, beta) f(w) = e^{-i w beta} e^{alpha/2} f(e^alpha w), so the
// canonical commutation relations hold with unit coefficients:
//   pi1(alpha)^* T_sigma pi1(alpha) = T_sigma + alpha
//   pi2(beta)^*  T_x     pi2(beta)  = T_x + beta

#include <cmath>
#include <random>

#include "freqgrid.hpp"

namespace waveopt {

struct GroupElement {
    double alpha = 0.0;   // log-dilation
    double beta = 0.0;    // time translation

    static GroupElement identity() { return {}; }

    // (a1,b1)*(a2,b2) = (a1+a2, b1 + e^{a1} b2)
    GroupElement compose(const GroupElement& o) const {
        return {alpha + o.alpha, beta + std::exp(alpha) * o.beta};
    }
    GroupElement inverse() const {
        return {-alpha, -std::exp(-alpha) * beta};
    }
};

struct MomentPair {
    double expected = 0.0;
    double variance = 0.0;   // clamped to 0 when within -1e-12 of it
};

enum class Observable { time, scale };

// Dom(T_x) membership proxy for truncated grids: f(0) = 0 is represented by
// a vanishing left endpoint.
inline bool left_endpoint_ok(const WaveletFn& f, double tol = 1e-6) {
    const double ns = norm(f, Space::signal);
    if (ns == 0.0) return true;
    return std::abs(f.values.front()) <= tol * ns;
}

inline double left_endpoint_ratio(const WaveletFn& f) {
    const double ns = norm(f, Space::signal);
    return ns == 0.0 ? 0.0 : std::abs(f.values.front()) / ns;
}

// T_x f = i f'(w)
inline WaveletFn apply_time(const WaveletFn& f) {
    WaveletFn g = derivative(f);
    for (auto& v : g.values) v *= cplx(0.0, 1.0);
    return g;
}

// T_sigma f = -ln(w) f(w)
inline WaveletFn apply_scale(const WaveletFn& f) {
    WaveletFn g = f;
    for (int k = 0; k < g.size(); ++k) g.values[k] *= -f.grid->s_nodes[k];
    return g;
}

namespace detail {

// Applies the requested observable in the requested space. The window-space
// time-like observable is i w d/dw = i d/ds.
inline WaveletFn apply_observable(const WaveletFn& f, Observable obs, Space space) {
    if (obs == Observable::scale) return apply_scale(f);
    if (space == Space::signal) return apply_time(f);
    WaveletFn g = log_deriv(f);
    for (auto& v : g.values) v *= cplx(0.0, 1.0);
    return g;
}

}  // namespace detail

// Expected value and variance of f/||f|| with respect to the observable,
// in the chosen space.
inline MomentPair moments(const WaveletFn& f, Observable obs, Space space) {
    const double n2 = norm_sq(f, space);
    if (n2 <= 0.0) throw std::invalid_argument("moments: zero norm");
    const WaveletFn tf = detail::apply_observable(f, obs, space);
    const double e = std::real(inner_product(tf, f, space)) / n2;
    // ||(T - e) f||^2 / ||f||^2
    const auto& w = weights_for(*f.grid, space);
    double v = 0.0;
    for (int k = 0; k < f.size(); ++k)
        v += std::norm(tf.values[k] - e * f.values[k]) * w[k];
    v /= n2;
    if (v < 0.0 && v > -1e-12) v = 0.0;
    return {e, v};
}

// pi(alpha, beta) f(w) = e^{-i w beta} e^{alpha/2} f(e^alpha w).
// The dilation resamples by cubic interpolation in s; mass pushed outside
// the grid is dropped and optionally reported.
inline WaveletFn group_action(const GroupElement& g, const WaveletFn& f,
                              double* mass_loss = nullptr) {
    std::vector<cplx> vals;
    if (g.alpha == 0.0) {
        vals = f.values;
    } else {
        vals = resample_log_shift(f, g.alpha);
        const double half = std::exp(0.5 * g.alpha);
        for (auto& v : vals) v *= half;
    }
    if (g.beta != 0.0) {
        for (int k = 0; k < f.size(); ++k) {
            const double phase = -f.grid->nodes[k] * g.beta;
            vals[k] *= cplx(std::cos(phase), std::sin(phase));
        }
    }
    WaveletFn out{f.grid, std::move(vals)};
    if (mass_loss) {
        const double before = norm_sq(f, Space::signal);
        const double after = norm_sq(out, Space::signal);
        *mass_loss = before > 0.0 ? std::max(0.0, 1.0 - after / before) : 0.0;
    }
    return out;
}

// Max relative residual of the two canonical commutation relations at the
// given parameters.
inline double commutation_check(const WaveletFn& f, double alpha, double beta) {
    const double ns = norm(f, Space::signal);
    if (ns == 0.0) return 0.0;

    const auto resid = [&](const WaveletFn& a, const WaveletFn& b) {
        double acc = 0.0;
        for (int k = 0; k < f.size(); ++k)
            acc += std::norm(a.values[k] - b.values[k]) * f.grid->w_signal[k];
        return std::sqrt(acc) / ns;
    };

    // pi1(alpha)^* T_sigma pi1(alpha) f  vs  (T_sigma + alpha) f
    WaveletFn u = group_action({alpha, 0.0}, f);
    u = apply_scale(u);
    u = group_action(GroupElement{alpha, 0.0}.inverse(), u);
    WaveletFn lhs1 = apply_scale(f);
    for (int k = 0; k < f.size(); ++k) lhs1.values[k] += alpha * f.values[k];
    const double r1 = resid(u, lhs1);

    // pi2(beta)^* T_x pi2(beta) f  vs  (T_x + beta) f
    WaveletFn v = group_action({0.0, beta}, f);
    v = apply_time(v);
    v = group_action(GroupElement{0.0, beta}.inverse(), v);
    WaveletFn lhs2 = apply_time(f);
    for (int k = 0; k < f.size(); ++k) lhs2.values[k] += beta * f.values[k];
    const double r2 = resid(v, lhs2);

    return std::max(r1, r2);
}

struct CanonicalForm {
    WaveletFn fn;
    GroupElement applied;    // f_N = (1/scale) pi(applied)^{-1} f
    double scale = 1.0;
    int rounds = 0;
    double residual = 0.0;   // max of |e_x|, |e_sigma|, |norm - 1| at exit
};

// Lemma-style normal form: divide by the signal norm and undo the expected
// time/scale by the inverse group action. The closed form is exact in the
// continuum; on a grid the dilation resampling leaves a small moment drift,
// so the map is iterated (at most max_rounds) until the drift is below tol.
inline CanonicalForm canonical_normalize(const WaveletFn& f, double tol = 1e-12,
                                         int max_rounds = 5) {
    double ns = norm(f, Space::signal);
    if (ns == 0.0) throw std::invalid_argument("canonical_normalize: zero norm");

    CanonicalForm out;
    out.scale = ns;
    out.fn = f;
    for (auto& v : out.fn.values) v /= ns;
    out.applied = GroupElement::identity();

    for (int round = 0; round < max_rounds; ++round) {
        const double ex = moments(out.fn, Observable::time, Space::signal).expected;
        const double es = moments(out.fn, Observable::scale, Space::signal).expected;
        out.residual = std::max(std::abs(ex), std::abs(es));
        if (out.residual <= tol) {
            out.rounds = round;
            return out;
        }
        const GroupElement step{es, ex};
        out.fn = group_action(step.inverse(), out.fn);
        const double nn = norm(out.fn, Space::signal);
        if (nn == 0.0) throw std::invalid_argument("canonical_normalize: mass lost off-grid");
        for (auto& v : out.fn.values) v /= nn;
        out.scale *= nn;
        out.applied = out.applied.compose(step);
        out.rounds = round + 1;
    }
    {
        const double ex = moments(out.fn, Observable::time, Space::signal).expected;
        const double es = moments(out.fn, Observable::scale, Space::signal).expected;
        out.residual = std::max(std::abs(ex), std::abs(es));
    }
    if (out.residual > 1e-8)
        throw std::runtime_error("canonical_normalize: moment fixed point did not converge");
    return out;
}

inline bool is_canonical(const WaveletFn& f, double tol = 1e-6) {
    const double ns = norm(f, Space::signal);
    if (ns == 0.0) return false;
    if (std::abs(ns - 1.0) > tol) return false;
    const double ex = moments(f, Observable::time, Space::signal).expected;
    const double es = moments(f, Observable::scale, Space::signal).expected;
    return std::abs(ex) <= tol && std::abs(es) <= tol;
}

}  // namespace waveopt
