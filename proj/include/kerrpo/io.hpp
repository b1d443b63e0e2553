#pragma once

#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kerrpo/oracle.hpp"
#include "kerrpo/state_analysis.hpp"
#include "kerrpo/wei_norman.hpp"

namespace kerrpo::io {

// Shortest round-trip representation, identical across runs.
inline std::string num(double v) {
    char buf[32];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

inline void write_header(std::ostream& os, const std::vector<std::string>& header) {
    for (const auto& line : header) os << "# " << line << '\n';
}

// t, re_a1, im_a1, ..., re_a4, im_a4, residual_unitarity
inline void write_trajectory_csv(std::ostream& os, const WNTrajectory& traj, const std::vector<std::string>& header) {
    write_header(os, header);
    os << "t,re_a1,im_a1,re_a2,im_a2,re_a3,im_a3,re_a4,im_a4,residual_unitarity\n";
    for (std::size_t i = 0; i < traj.size(); ++i) {
        os << num(traj.times[i]);
        for (const cplx& a : traj.states[i].as_array()) os << ',' << num(a.real()) << ',' << num(a.imag());
        os << ',' << num(traj.residuals[i].max()) << '\n';
    }
}

inline void write_distribution_csv(std::ostream& os, const Distribution& d, const std::vector<std::string>& header) {
    write_header(os, header);
    os << "k,P_k\n";
    for (std::size_t k = 0; k < d.probabilities.size(); ++k) os << k << ',' << num(d.probabilities[k]) << '\n';
}

inline void write_timeseries_csv(std::ostream& os, const TimeSeries& ts, const std::vector<std::string>& header) {
    write_header(os, header);
    os << "t,re_F,im_F,abs2_F\n";
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const cplx f = ts.values[i];
        os << num(ts.times[i]) << ',' << num(f.real()) << ',' << num(f.imag()) << ',' << num(std::norm(f)) << '\n';
    }
}

inline void write_revivals_csv(std::ostream& os, const std::vector<Revival>& peaks,
                               const std::vector<std::string>& header) {
    write_header(os, header);
    os << "t,height\n";
    for (const auto& r : peaks) os << num(r.time) << ',' << num(r.height) << '\n';
}

inline nlohmann::json to_json(const TimeSeries& ts) {
    nlohmann::json j;
    j["t"] = ts.times;
    std::vector<double> re, im, a2;
    for (const cplx& f : ts.values) {
        re.push_back(f.real());
        im.push_back(f.imag());
        a2.push_back(std::norm(f));
    }
    j["re_F"] = re;
    j["im_F"] = im;
    j["abs2_F"] = a2;
    return j;
}

inline nlohmann::json to_json(const Distribution& d) {
    return {{"t", d.time}, {"P_k", d.probabilities}};
}

inline nlohmann::json to_json(const WNTrajectory& traj) {
    nlohmann::json j;
    j["t"] = traj.times;
    const char* names[] = {"a1", "a2", "a3", "a4"};
    for (int k = 0; k < 4; ++k) {
        std::vector<double> re, im;
        for (const auto& s : traj.states) {
            re.push_back(s.as_array()[k].real());
            im.push_back(s.as_array()[k].imag());
        }
        j[std::string("re_") + names[k]] = re;
        j[std::string("im_") + names[k]] = im;
    }
    std::vector<double> res;
    for (const auto& r : traj.residuals) res.push_back(r.max());
    j["residual_unitarity"] = res;
    return j;
}

// {"N_tried": [...], "sup_deltas": [...], "N_final": N}
inline nlohmann::json convergence_json(const ConvergenceReport& rep) {
    return {{"N_tried", rep.n_tried}, {"sup_deltas", rep.sup_deltas}, {"N_final", rep.n_final}};
}

inline nlohmann::json to_json(const std::vector<Revival>& peaks) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : peaks) j.push_back({{"t", r.time}, {"height", r.height}});
    return j;
}

}  // namespace kerrpo::io
