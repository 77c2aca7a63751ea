#include "dhs/report.hpp"

#include <cmath>
#include <cstdio>
#include <json.hpp>

namespace dhs {

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

// JSON has no inf/nan literals; audit rows can carry +inf (tied eigenvalues)
nlohmann::ordered_json jnum(double v) {
    if (std::isfinite(v)) return v;
    return std::string(v > 0 ? "inf" : (v < 0 ? "-inf" : "nan"));
}

} // namespace

std::string bound_report_csv(const BoundReport& report) {
    std::string out = "inequality,p,index,bound,observed,slack,pass,mode\n";
    for (const auto& r : report.rows) {
        out += r.inequality + ',' + std::to_string(r.p) + ',' + std::to_string(r.index) + ',' +
               num(r.bound) + ',' + num(r.observed) + ',' + num(r.slack) + ',' +
               (r.pass ? "true" : "false") + ',' + r.mode + '\n';
    }
    return out;
}

std::string bound_report_json(const BoundReport& report) {
    nlohmann::ordered_json j;
    const auto& pv = report.provenance;
    j["provenance"] = {{"m", pv.m},
                       {"p", pv.p},
                       {"mode", pv.mode},
                       {"g", jnum(pv.g)},
                       {"min_xsq", jnum(pv.min_xsq)},
                       {"uniform_c", jnum(pv.uniform_c)},
                       {"tolerance", pv.tolerance},
                       {"curvature_term_factor", pv.curvature_term_factor},
                       {"c0", pv.c0}};
    j["all_pass"] = report.all_pass();
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& r : report.rows) {
        j["rows"].push_back({{"inequality", r.inequality},
                             {"p", r.p},
                             {"index", r.index},
                             {"bound", jnum(r.bound)},
                             {"observed", jnum(r.observed)},
                             {"slack", jnum(r.slack)},
                             {"pass", r.pass},
                             {"mode", r.mode}});
    }
    return j.dump(2) + "\n";
}

} // namespace dhs
