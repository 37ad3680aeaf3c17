#pragma once

// Closed-form seed wavelets with known symmetry and moment structure, used
// as test anchors and minimizer starts.
//
// The log-Gaussian family is defined through the scale space,
//   f_tilde(sigma) = (pi tau^2)^{-1/4} e^{-sigma^2 / (2 tau^2)},
// so its scale moments are exact Gaussian moments: e(T_sigma) = 0 and
// v(T_sigma) = tau^2/2. Warped Hermite members multiply that profile by
// H_m(sigma/tau), giving v(T_sigma) = (2m+1) tau^2/2.

#include <cctype>
#include <sstream>

#include "observables.hpp"

namespace waveopt {

struct CatalogSpec {
    enum class Family { log_gaussian, bump, warped_hermite };

    Family family = Family::log_gaussian;
    double tau = 1.0;     // log_gaussian / warped_hermite spread
    double a = 1.0;       // bump support [a, b]
    double b = 2.0;
    int order = 0;        // warped_hermite order, 0..2
};

inline const char* family_name(CatalogSpec::Family f) {
    switch (f) {
        case CatalogSpec::Family::log_gaussian: return "log_gaussian";
        case CatalogSpec::Family::bump: return "bump";
        case CatalogSpec::Family::warped_hermite: return "warped_hermite";
    }
    return "?";
}

// Parses "family:key=value,key=value", e.g. "log_gaussian:tau=1.0".
inline CatalogSpec parse_catalog_spec(const std::string& text) {
    CatalogSpec spec;
    const auto colon = text.find(':');
    const std::string name = text.substr(0, colon);
    if (name == "log_gaussian") spec.family = CatalogSpec::Family::log_gaussian;
    else if (name == "bump") spec.family = CatalogSpec::Family::bump;
    else if (name == "warped_hermite") spec.family = CatalogSpec::Family::warped_hermite;
    else throw std::invalid_argument("unknown catalog family: " + name);

    if (colon != std::string::npos) {
        std::stringstream ss(text.substr(colon + 1));
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto eq = item.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("bad catalog parameter: " + item);
            const std::string key = item.substr(0, eq);
            const double val = std::stod(item.substr(eq + 1));
            if (key == "tau") spec.tau = val;
            else if (key == "a") spec.a = val;
            else if (key == "b") spec.b = val;
            else if (key == "order") spec.order = (int)val;
            else throw std::invalid_argument("unknown catalog parameter: " + key);
        }
    }

    if (spec.tau <= 0.0) throw std::invalid_argument("catalog: tau must be > 0");
    if (!(0.0 < spec.a && spec.a < spec.b))
        throw std::invalid_argument("catalog: need 0 < a < b");
    if (spec.order < 0 || spec.order > 2)
        throw std::invalid_argument("catalog: hermite order must be 0, 1 or 2");
    return spec;
}

inline std::string catalog_families_help() {
    return "log_gaussian:tau=T (T>0)\n"
           "bump:a=A,b=B (0<A<B, recentered to canonical form)\n"
           "warped_hermite:order=M,tau=T (M in 0..2)";
}

namespace detail {

inline double factorial(int m) { return m <= 1 ? 1.0 : m * factorial(m - 1); }

}  // namespace detail

inline WaveletFn catalog_get(const CatalogSpec& spec, GridPtr grid) {
    using Family = CatalogSpec::Family;
    const double s_lo = grid->s_nodes.front();
    const double s_hi = grid->s_nodes.back();

    if (spec.family == Family::log_gaussian || spec.family == Family::warped_hermite) {
        const int m = spec.family == Family::log_gaussian ? 0 : spec.order;
        const double spread = spec.tau * std::sqrt((2 * m + 1) / 2.0);
        if (s_lo > -6.0 * spread || s_hi < 6.0 * spread)
            throw std::invalid_argument("catalog: grid span below 6 spread units");

        const double nrm =
            1.0 / std::sqrt(spec.tau * std::sqrt(M_PI) * std::pow(2.0, m) * detail::factorial(m));
        std::vector<cplx> vals(grid->n);
        for (int k = 0; k < grid->n; ++k) {
            const double s = grid->s_nodes[k];
            const double sigma = -s;   // f(w) = w^{-1/2} f_tilde(-ln w)
            const double herm = m == 0 ? 1.0 : std::hermite((unsigned)m, sigma / spec.tau);
            vals[k] = nrm * herm * std::exp(-0.5 * sigma * sigma / (spec.tau * spec.tau)) /
                      std::sqrt(grid->nodes[k]);
        }
        return make_wavelet(std::move(grid), std::move(vals));
    }

    // Smooth compactly supported mollifier on [a, b], recentered to the
    // canonical normal form (the raw bump has nonzero expected scale).
    const double margin_lo = spec.a * spec.a / spec.b / 2.0;
    const double margin_hi = spec.b * spec.b / spec.a * 2.0;
    if (grid->omega_min > margin_lo || grid->omega_max < margin_hi)
        throw std::invalid_argument("catalog: grid span below 6 spread units");

    std::vector<cplx> vals(grid->n, cplx(0.0));
    for (int k = 0; k < grid->n; ++k) {
        const double x = (grid->nodes[k] - spec.a) / (spec.b - spec.a);
        if (x > 0.0 && x < 1.0) vals[k] = std::exp(-1.0 / (x * (1.0 - x)));
    }
    WaveletFn raw = make_wavelet(std::move(grid), std::move(vals));
    return canonical_normalize(raw).fn;
}

inline WaveletFn catalog_get(const std::string& text, GridPtr grid) {
    return catalog_get(parse_catalog_spec(text), std::move(grid));
}

}  // namespace waveopt
