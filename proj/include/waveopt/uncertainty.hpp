#pragma once

// The two uncertainty functionals and the feasibility machinery around them.
//
//   L_S(f) = e^{-2 e(T_sigma)} v(T_x) + v(T_sigma)            (general form)
//          = ||T_x f||_S^2 + ||T_sigma f||_S^2                (canonical form)
//
//   L_P(f) = ||T_x f||_S^2 + ||T_sigma f||_S^2
//          + ||i w f'||_W^2 ||f/w||_S^2 / ||f||_W^2
//          + v^W_{f/||f||_W}(-ln w)
//
// plus the K_S / K_P membership conditions and the quantitative bounds
// (pointwise Cauchy-Schwarz bound, window-norm bound, 1/(2e^2) lower bound,
// Chebyshev tail estimate) used as runtime diagnostics.

#include <map>
#include <optional>

#include "observables.hpp"

namespace waveopt {

constexpr double kCanonicalTol = 1e-6;
constexpr double kMarginFloor = -1e-9;

enum class Functional { signal, phase };

inline const char* functional_name(Functional f) {
    return f == Functional::signal ? "signal" : "phase";
}

struct ConstraintResiduals {
    double norm_dev = 0.0;     // ||f||_S - 1
    double e_time = 0.0;       // expected time of f/||f||_S
    double e_scale = 0.0;      // expected scale of f/||f||_S
    double max_abs() const {
        return std::max({std::abs(norm_dev), std::abs(e_time), std::abs(e_scale)});
    }
};

struct UncertaintyReport {
    Functional functional = Functional::signal;
    double total = 0.0;
    std::vector<std::pair<std::string, double>> terms;  // total == sum of terms
    ConstraintResiduals residuals;
    bool fast_path = false;
    bool domain_ok = true;
    std::string domain_note;
    std::vector<std::pair<std::string, double>> diagnostics;

    double term(const std::string& name) const {
        for (const auto& [k, v] : terms)
            if (k == name) return v;
        throw std::out_of_range("no term named " + name);
    }
};

// Admissibility constant integral |f|^2 / w dw = ||f||_W^2.
inline double admissibility_constant(const WaveletFn& f) {
    return norm_sq(f, Space::window);
}

namespace detail {

inline ConstraintResiduals constraint_residuals(const WaveletFn& f) {
    ConstraintResiduals r;
    r.norm_dev = norm(f, Space::signal) - 1.0;
    r.e_time = moments(f, Observable::time, Space::signal).expected;
    r.e_scale = moments(f, Observable::scale, Space::signal).expected;
    return r;
}

inline WaveletFn unit_signal(const WaveletFn& f) {
    const double ns = norm(f, Space::signal);
    if (ns == 0.0) throw std::invalid_argument("zero norm");
    WaveletFn g = f;
    for (auto& v : g.values) v /= ns;
    return g;
}

}  // namespace detail

inline UncertaintyReport signal_uncertainty(const WaveletFn& f, bool assume_canonical) {
    UncertaintyReport rep;
    rep.functional = Functional::signal;

    const WaveletFn fh = detail::unit_signal(f);
    rep.residuals = detail::constraint_residuals(fh);
    rep.domain_ok = left_endpoint_ok(fh);
    if (!rep.domain_ok) rep.domain_note = "left endpoint not vanishing";
    rep.diagnostics.emplace_back("left_endpoint_ratio", left_endpoint_ratio(fh));

    double time_term, scale_term;
    if (assume_canonical && rep.residuals.max_abs() <= kCanonicalTol) {
        rep.fast_path = true;
        time_term = norm_sq(apply_time(fh), Space::signal);
        scale_term = norm_sq(apply_scale(fh), Space::signal);
    } else {
        const MomentPair mx = moments(fh, Observable::time, Space::signal);
        const MomentPair ms = moments(fh, Observable::scale, Space::signal);
        time_term = std::exp(-2.0 * ms.expected) * mx.variance;
        scale_term = ms.variance;
    }
    rep.terms = {{"time_var", time_term}, {"scale_var", scale_term}};
    rep.total = time_term + scale_term;
    return rep;
}

inline UncertaintyReport phase_uncertainty_pullback(const WaveletFn& f) {
    if (norm_sq(f, Space::window) <= 0.0)
        throw std::invalid_argument("phase_uncertainty_pullback: zero window norm");

    UncertaintyReport rep;
    rep.functional = Functional::phase;

    const WaveletFn fh = detail::unit_signal(f);
    rep.residuals = detail::constraint_residuals(fh);
    if (rep.residuals.max_abs() > kCanonicalTol) {
        rep.domain_ok = false;
        rep.domain_note = "outside D_P: canonical residuals too large";
    }
    if (!left_endpoint_ok(fh)) {
        rep.domain_ok = false;
        rep.domain_note = "outside D_P: left endpoint not vanishing";
    }

    const double w2 = norm_sq(fh, Space::window);
    const double time_term = norm_sq(apply_time(fh), Space::signal);
    const double scale_term = norm_sq(apply_scale(fh), Space::signal);

    // ||i w f'||_W^2 * ||f/w||_S^2 / ||f||_W^2 with w f' = d/ds f(e^s)
    const WaveletFn ld = log_deriv(fh);
    const double a_term = norm_sq(ld, Space::window);
    double b_term = 0.0;
    for (int k = 0; k < fh.size(); ++k) {
        const double wk = fh.grid->nodes[k];
        b_term += std::norm(fh.values[k]) / (wk * wk) * fh.grid->w_signal[k];
    }
    const double window_dilation = a_term * b_term / w2;
    const double window_scale_var = moments(fh, Observable::scale, Space::window).variance;

    rep.terms = {{"time_var", time_term},
                 {"scale_var", scale_term},
                 {"window_dilation", window_dilation},
                 {"window_scale_var", window_scale_var}};
    rep.total = time_term + scale_term + window_dilation + window_scale_var;
    rep.diagnostics.emplace_back("window_norm_sq", w2);
    rep.diagnostics.emplace_back("inv_omega_norm_sq", b_term);
    return rep;
}

enum class DomainSet { dom_LS, D_P, K_S, K_P };

struct ChebyshevEntry {
    double alpha = 0.0;
    double measured = 0.0;   // integral of |f|^2 outside [e^-alpha, e^alpha]
    double bound = 0.0;      // v(T_sigma) / alpha^2
    double margin() const { return bound - measured; }
};

struct FeasibilityDiagnostics {
    double K = 0.0;
    bool member = false;
    bool in_KS = false;
    bool in_KP = false;

    ConstraintResiduals residuals;
    bool left_endpoint = false;
    double left_endpoint_value = 0.0;

    // quantitative bound margins (>= 0 means the bound holds)
    double pointwise_bound_margin = 0.0;
    double window_norm_bound_margin = 0.0;
    double inv_omega_lower_margin = 0.0;
    double omega_deriv_bound_margin = 0.0;
    bool omega_deriv_checked = false;

    std::vector<ChebyshevEntry> chebyshev_tails;

    // per-condition margins of the requested membership set
    std::vector<std::pair<std::string, double>> condition_margins;

    bool refinement_stable = false;
    double max_refinement_drift = 0.0;
};

namespace detail {

// f resampled onto the grid with doubled resolution (2n-1 nodes), used for
// the refinement-stability probe behind the D_P membership test.
inline WaveletFn refine_double(const WaveletFn& f) {
    const auto& g = *f.grid;
    GridPtr fine = build_grid(g.omega_min, g.omega_max, 2 * g.n - 1);
    const int n = g.n;
    std::vector<cplx> vals(fine->n);
    for (int k = 0; k < n; ++k) vals[2 * k] = f.values[k];
    for (int k = 0; k + 1 < n; ++k) {
        // cubic midpoint interpolation, one-sided at the edges
        int m = std::clamp(k - 1, 0, n - 4);
        const double x = (k - m) + 0.5;
        const double l0 = -(x - 1.0) * (x - 2.0) * (x - 3.0) / 6.0;
        const double l1 = x * (x - 2.0) * (x - 3.0) / 2.0;
        const double l2 = -x * (x - 1.0) * (x - 3.0) / 2.0;
        const double l3 = x * (x - 1.0) * (x - 2.0) / 6.0;
        vals[2 * k + 1] = l0 * f.values[m] + l1 * f.values[m + 1] + l2 * f.values[m + 2] +
                          l3 * f.values[m + 3];
    }
    return make_wavelet(std::move(fine), std::move(vals));
}

struct PhaseQuadratures {
    double deriv_sq;        // ||f'||_S^2
    double omega_deriv_sq;  // ||sqrt(w) f'||_S^2 = ||w f'||_W^2
    double inv_omega_sq;    // ||f/w||_S^2
    double log_weight_sq;   // ||ln(w) f||_S^2
};

inline PhaseQuadratures phase_quadratures(const WaveletFn& f) {
    PhaseQuadratures q{0, 0, 0, 0};
    const WaveletFn df = derivative(f);
    for (int k = 0; k < f.size(); ++k) {
        const double wk = f.grid->nodes[k];
        const double ws = f.grid->w_signal[k];
        const double fd = std::norm(df.values[k]);
        const double fv = std::norm(f.values[k]);
        q.deriv_sq += fd * ws;
        q.omega_deriv_sq += wk * fd * ws;
        q.inv_omega_sq += fv / (wk * wk) * ws;
        q.log_weight_sq += fv * f.grid->s_nodes[k] * f.grid->s_nodes[k] * ws;
    }
    return q;
}

}  // namespace detail

// Chebyshev tail of |f/||f||_S|^2 outside [e^-alpha, e^alpha].
inline double scale_tail_mass(const WaveletFn& f, double alpha) {
    const double n2 = norm_sq(f, Space::signal);
    if (n2 == 0.0) return 0.0;
    double acc = 0.0;
    for (int k = 0; k < f.size(); ++k)
        if (std::abs(f.grid->s_nodes[k]) > alpha)
            acc += std::norm(f.values[k]) * f.grid->w_signal[k];
    return acc / n2;
}

// Evaluates every defining condition of the requested set and reports
// margins; never throws on feasibility questions.
inline FeasibilityDiagnostics domain_membership(const WaveletFn& f, DomainSet which,
                                                double K = 0.0) {
    FeasibilityDiagnostics d;
    d.K = K;

    const double ns = norm(f, Space::signal);
    if (ns == 0.0) {
        d.condition_margins.emplace_back("norm", -1.0);
        return d;
    }
    const WaveletFn fh = detail::unit_signal(f);
    d.residuals = detail::constraint_residuals(fh);
    d.left_endpoint = left_endpoint_ok(fh);
    d.left_endpoint_value = left_endpoint_ratio(fh);

    const double tx2 = norm_sq(apply_time(fh), Space::signal);
    const double ts2 = norm_sq(apply_scale(fh), Space::signal);
    const double canon = d.residuals.max_abs();

    if (which == DomainSet::dom_LS) {
        d.condition_margins.emplace_back("left_endpoint", kCanonicalTol - d.left_endpoint_value);
        d.condition_margins.emplace_back("time_norm_finite", std::isfinite(tx2) ? 1.0 : -1.0);
        d.condition_margins.emplace_back("scale_norm_finite", std::isfinite(ts2) ? 1.0 : -1.0);
        d.member = d.left_endpoint && std::isfinite(tx2) && std::isfinite(ts2);
        return d;
    }

    if (which == DomainSet::D_P) {
        const auto q0 = detail::phase_quadratures(fh);
        const auto q1 = detail::phase_quadratures(detail::refine_double(fh));
        const auto drift = [](double a, double b) {
            return std::abs(b - a) / std::max(std::abs(a), 1e-300);
        };
        d.max_refinement_drift = std::max(
            {drift(q0.deriv_sq, q1.deriv_sq), drift(q0.omega_deriv_sq, q1.omega_deriv_sq),
             drift(q0.inv_omega_sq, q1.inv_omega_sq), drift(q0.log_weight_sq, q1.log_weight_sq)});
        d.refinement_stable = d.max_refinement_drift <= 1e-4;

        d.condition_margins.emplace_back("norm", kCanonicalTol - std::abs(d.residuals.norm_dev));
        d.condition_margins.emplace_back("e_time", kCanonicalTol - std::abs(d.residuals.e_time));
        d.condition_margins.emplace_back("e_scale", kCanonicalTol - std::abs(d.residuals.e_scale));
        d.condition_margins.emplace_back("left_endpoint", kCanonicalTol - d.left_endpoint_value);
        d.condition_margins.emplace_back("refinement_drift", 1e-4 - d.max_refinement_drift);
        d.member = canon <= kCanonicalTol && d.left_endpoint && d.refinement_stable;
        return d;
    }

    // K_S / K_P
    d.condition_margins.emplace_back("norm", kCanonicalTol - std::abs(d.residuals.norm_dev));
    d.condition_margins.emplace_back("e_time", kCanonicalTol - std::abs(d.residuals.e_time));
    d.condition_margins.emplace_back("e_scale", kCanonicalTol - std::abs(d.residuals.e_scale));
    d.condition_margins.emplace_back("time_bound", K - tx2);
    d.condition_margins.emplace_back("scale_bound", K - ts2);
    bool ok = canon <= kCanonicalTol && tx2 <= K + 1e-12 && ts2 <= K + 1e-12;
    d.in_KS = ok;

    if (which == DomainSet::K_P) {
        const double w2 = norm_sq(fh, Space::window);
        const double a_term = norm_sq(log_deriv(fh), Space::window);
        double b_term = 0.0;
        for (int k = 0; k < fh.size(); ++k) {
            const double wk = fh.grid->nodes[k];
            b_term += std::norm(fh.values[k]) / (wk * wk) * fh.grid->w_signal[k];
        }
        const double dilation = a_term * b_term / w2;
        const double wvar = moments(fh, Observable::scale, Space::window).variance;
        d.condition_margins.emplace_back("window_dilation_bound", K - dilation);
        d.condition_margins.emplace_back("window_scale_var_bound", K - wvar);
        ok = ok && dilation <= K + 1e-12 && wvar <= K + 1e-12;
        d.in_KP = ok;
    }
    d.member = ok;
    return d;
}

// Quantitative bounds with margins, for a canonical f and an asserted
// bound M >= ||T_x f||_S^2:
//   |f(w)| <= sqrt(M) sqrt(w)                   pointwise
//   ||f||_W^2 <= M + 1
//   ||f/w||_S^2 >= 1/(2 e^2)
//   ||w f'||_W^2 <= 2 e^2 M (M+1)   (when the K_P product bound holds too)
//   tail outside [e^-a, e^a] <= v(T_sigma)/a^2  for each requested a
inline FeasibilityDiagnostics feasibility_bounds(const WaveletFn& f, double M,
                                                 std::vector<double> alphas = {1.0, 2.0, 3.0}) {
    if (!is_canonical(f))
        throw std::invalid_argument("feasibility_bounds: input is not canonical");
    const double tx2 = norm_sq(apply_time(f), Space::signal);
    if (M < tx2 - 1e-9)
        throw std::invalid_argument("feasibility_bounds: M below ||T_x f||^2");

    FeasibilityDiagnostics d;
    d.residuals = detail::constraint_residuals(f);
    d.left_endpoint = left_endpoint_ok(f);
    d.left_endpoint_value = left_endpoint_ratio(f);

    const double root_m = std::sqrt(M);
    double pw = std::numeric_limits<double>::infinity();
    for (int k = 0; k < f.size(); ++k)
        pw = std::min(pw, root_m * std::sqrt(f.grid->nodes[k]) - std::abs(f.values[k]));
    d.pointwise_bound_margin = pw;

    const double w2 = norm_sq(f, Space::window);
    d.window_norm_bound_margin = (M + 1.0) - w2;

    double b_term = 0.0;
    for (int k = 0; k < f.size(); ++k) {
        const double wk = f.grid->nodes[k];
        b_term += std::norm(f.values[k]) / (wk * wk) * f.grid->w_signal[k];
    }
    d.inv_omega_lower_margin = b_term - 1.0 / (2.0 * M_E * M_E);

    const double a_term = norm_sq(log_deriv(f), Space::window);
    const double product = a_term * b_term / w2;
    d.omega_deriv_checked = product <= M;
    d.omega_deriv_bound_margin =
        d.omega_deriv_checked ? 2.0 * M_E * M_E * M * (M + 1.0) - a_term
                              : std::numeric_limits<double>::quiet_NaN();

    const double v_sigma = moments(f, Observable::scale, Space::signal).variance;
    d.K = v_sigma;
    for (double a : alphas) {
        ChebyshevEntry e;
        e.alpha = a;
        e.measured = scale_tail_mass(f, a);
        e.bound = v_sigma / (a * a);
        d.chebyshev_tails.push_back(e);
    }
    return d;
}

}  // namespace waveopt
