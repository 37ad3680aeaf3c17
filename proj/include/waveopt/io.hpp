#pragma once

// File formats: wavelet JSON, uncertainty report JSON, surface and
// trajectory CSV, flat key=value minimizer config. All numeric output is
// printed with 17 significant digits so doubles round-trip losslessly and
// byte-identically.

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "minimizer.hpp"
#include "phasespace.hpp"

namespace waveopt {

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string wavelet_to_json(const WaveletFn& f) {
    std::ostringstream os;
    os << "{\n  \"grid\": {\"omega_min\": " << fmt17(f.grid->omega_min)
       << ", \"omega_max\": " << fmt17(f.grid->omega_max) << ", \"n\": " << f.grid->n
       << ", \"spacing\": \"log\"},\n  \"values\": [";
    for (int k = 0; k < f.size(); ++k) {
        if (k) os << ", ";
        os << "[" << fmt17(f.values[k].real()) << ", " << fmt17(f.values[k].imag()) << "]";
    }
    os << "]\n}\n";
    return os.str();
}

inline void save_wavelet_json(const WaveletFn& f, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << wavelet_to_json(f);
}

inline WaveletFn load_wavelet_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot read " + path);
    nlohmann::json j;
    in >> j;

    const auto& jg = j.at("grid");
    if (jg.at("spacing").get<std::string>() != "log")
        throw std::invalid_argument(path + ": unsupported grid spacing tag");
    GridPtr grid = build_grid(jg.at("omega_min").get<double>(),
                              jg.at("omega_max").get<double>(), jg.at("n").get<int>());

    const auto& jv = j.at("values");
    if ((int)jv.size() != grid->n)
        throw std::invalid_argument(path + ": values length does not match grid.n");
    std::vector<cplx> vals(grid->n);
    for (int k = 0; k < grid->n; ++k)
        vals[k] = cplx(jv[k].at(0).get<double>(), jv[k].at(1).get<double>());
    return make_wavelet(std::move(grid), std::move(vals));
}

inline std::string report_to_json(const UncertaintyReport& rep) {
    std::ostringstream os;
    os << "{\"functional\": \"" << functional_name(rep.functional) << "\"";
    os << ", \"total\": " << fmt17(rep.total);
    for (const auto& [name, v] : rep.terms) os << ", \"" << name << "\": " << fmt17(v);
    os << ", \"norm_residual\": " << fmt17(rep.residuals.norm_dev);
    os << ", \"e_time_residual\": " << fmt17(rep.residuals.e_time);
    os << ", \"e_scale_residual\": " << fmt17(rep.residuals.e_scale);
    os << ", \"fast_path\": " << (rep.fast_path ? "true" : "false");
    os << ", \"domain_ok\": " << (rep.domain_ok ? "true" : "false");
    if (!rep.domain_note.empty()) os << ", \"domain_note\": \"" << rep.domain_note << "\"";
    for (const auto& [name, v] : rep.diagnostics)
        os << ", \"diag_" << name << "\": " << fmt17(v);
    os << "}\n";
    return os.str();
}

inline void save_surface_csv(const AmbiguitySurface& s, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "alpha,beta,re,im,haar_weight\n";
    for (int i = 0; i < s.na(); ++i)
        for (int j = 0; j < s.nb(); ++j) {
            const cplx v = s.at(i, j);
            out << fmt17(s.alpha_nodes[i]) << ',' << fmt17(s.beta_nodes[j]) << ','
                << fmt17(v.real()) << ',' << fmt17(v.imag()) << ','
                << fmt17(s.weight(i, j)) << '\n';
        }
}

inline void save_trajectory_csv(const MinimizeResult& res, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "iter,value,grad_norm,res_norm,res_ex,res_esigma\n";
    for (const auto& r : res.trajectory)
        out << r.iter << ',' << fmt17(r.value) << ',' << fmt17(r.grad_norm) << ','
            << fmt17(r.res_norm) << ',' << fmt17(r.res_ex) << ',' << fmt17(r.res_esigma)
            << '\n';
}

// Flat key = value file; '#' starts a comment line.
inline MinimizerConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read " + path);
    MinimizerConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos)
                throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                            ": expected key = value");
            continue;
        }
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key == "step") cfg.step = std::stod(val);
        else if (key == "shrink") cfg.shrink = std::stod(val);
        else if (key == "grad_tol") cfg.grad_tol = std::stod(val);
        else if (key == "max_iters") cfg.max_iters = std::stoi(val);
        else if (key == "K_margin") cfg.K_margin = std::stod(val);
        else if (key == "seed") cfg.seed = std::stoull(val);
        else if (key == "real_only") cfg.real_only = (val == "1" || val == "true");
        else throw std::invalid_argument(path + ": unknown config key " + key);
    }
    cfg.validate();
    return cfg;
}

inline void save_minimize_json(const MinimizeResult& res, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "{\"value\": " << fmt17(res.value) << ", \"iterations\": " << res.iterations
        << ", \"converged\": " << (res.converged ? "true" : "false")
        << ", \"stop_reason\": \"" << res.stop_reason << "\"";
    if (!res.trajectory.empty()) {
        const auto& last = res.trajectory.back();
        out << ", \"final_grad_norm\": " << fmt17(last.grad_norm)
            << ", \"final_res_norm\": " << fmt17(last.res_norm)
            << ", \"final_res_ex\": " << fmt17(last.res_ex)
            << ", \"final_res_esigma\": " << fmt17(last.res_esigma);
    }
    out << "}\n";
}

}  // namespace waveopt
