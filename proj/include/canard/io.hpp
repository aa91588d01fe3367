#pragma once

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "canard_analysis.hpp"
#include "integrator.hpp"
#include "periodic.hpp"
#include "pinch.hpp"

namespace canard {

using json = nlohmann::ordered_json;

namespace detail {

inline std::string num(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline json num_or_null(double v)
{
    if (std::isfinite(v))
        return v;
    return nullptr;
}

inline void put_opt(json& j, const char* key, const std::optional<double>& v)
{
    if (v)
        j[key] = num_or_null(*v);
}

}  // namespace detail

// columns: t, state components, event flag (event kind name or empty)
inline void write_trace_csv(std::ostream& os, const OrbitTrace& tr, const std::vector<std::string>& names,
                            const std::string& chart = "")
{
    if (!chart.empty())
        os << "# chart=" << chart << "\n";
    os << "t";
    for (const auto& n : names)
        os << "," << n;
    os << ",event\n";
    std::size_t e = 0;
    for (std::size_t i = 0; i < tr.size(); ++i) {
        // events up to this sample are written as their own rows
        while (e < tr.events.size() && tr.events[e].t <= tr.times[i]) {
            const auto& ev = tr.events[e++];
            os << detail::num(ev.t);
            for (double v : ev.location)
                os << "," << detail::num(v);
            os << "," << to_string(ev.kind) << "\n";
        }
        os << detail::num(tr.times[i]);
        for (double v : tr.states[i])
            os << "," << detail::num(v);
        os << ",\n";
    }
    for (; e < tr.events.size(); ++e) {
        const auto& ev = tr.events[e];
        os << detail::num(ev.t);
        for (double v : ev.location)
            os << "," << detail::num(v);
        os << "," << to_string(ev.kind) << "\n";
    }
}

// pinched coordinates plus the mode of every sample
inline void write_pinched_csv(std::ostream& os, const PinchedTrace& tr, const std::vector<std::string>& names,
                              const std::string& chart = "")
{
    if (!chart.empty())
        os << "# chart=" << chart << " pinched\n";
    os << "t";
    for (const auto& n : names)
        os << "," << n;
    os << ",mode\n";
    for (std::size_t i = 0; i < tr.trace.size(); ++i) {
        os << detail::num(tr.trace.times[i]);
        for (double v : tr.trace.states[i])
            os << "," << detail::num(v);
        os << "," << to_string(tr.modes[i]) << "\n";
    }
}

inline json events_json(const std::vector<Event>& evs)
{
    json a = json::array();
    for (const auto& e : evs)
        a.push_back({{"t", e.t}, {"kind", to_string(e.kind)}, {"location", e.location}});
    return a;
}

inline json to_json(const PeriodicOrbit& o)
{
    return {{"period", o.period},
            {"l2_norm", o.l2_norm},
            {"amplitude", o.amplitude},
            {"stability", to_string(o.stability)},
            {"multiplier", detail::num_or_null(o.multiplier)},
            {"closure_gap", o.closure_gap}};
}

inline json to_json(const BranchSweep& sw)
{
    json j;
    j["param"] = sw.param;
    j["integration"] = {{"rel_tol", sw.cfg.rel_tol},
                        {"abs_tol", sw.cfg.abs_tol},
                        {"scheme", sw.cfg.scheme == Scheme::implicit ? "implicit" : "adaptive_explicit"}};
    json pts = json::array();
    for (const auto& p : sw.points) {
        json q{{"param", p.param},
               {"norm", p.norm},
               {"amplitude", p.amplitude},
               {"period", p.period},
               {"stability", p.stability},
               {"spike_count", p.spike_count}};
        if (!p.error.empty())
            q["error"] = p.error;
        pts.push_back(q);
    }
    j["points"] = pts;
    if (sw.explosion) {
        const auto& e = *sw.explosion;
        j["explosion"] = {{"lo", e.lo},         {"hi", e.hi},           {"center", e.center},
                          {"numerical_width", e.width}, {"jump", e.jump}, {"refined", e.refined}};
    }
    return j;
}

inline json to_json(const CanardReport& r)
{
    json j;
    j["system"] = r.system;
    j["eps"] = r.eps;
    detail::put_opt(j, "q_V", r.q_V);
    detail::put_opt(j, "q_W", r.q_W);
    detail::put_opt(j, "q_h", r.q_h);
    detail::put_opt(j, "q0", r.q0);
    detail::put_opt(j, "I_h", r.I_h);
    detail::put_opt(j, "I_h_displayed", r.I_h_displayed);
    detail::put_opt(j, "I0", r.I0);
    detail::put_opt(j, "I_sp", r.I_sp);
    detail::put_opt(j, "x_h", r.x_h);
    detail::put_opt(j, "h_h", r.h_h);
    detail::put_opt(j, "x0", r.x0);
    detail::put_opt(j, "x0_taylor", r.x0_taylor);
    detail::put_opt(j, "W0", r.W0);
    detail::put_opt(j, "V_singular", r.V_singular);
    detail::put_opt(j, "x_sp", r.x_sp);
    detail::put_opt(j, "y_sp", r.y_sp);
    detail::put_opt(j, "y1", r.y1);
    detail::put_opt(j, "y2", r.y2);
    detail::put_opt(j, "gamma0_prime_gap", r.gamma0_prime_gap);
    if (!r.notes.empty())
        j["notes"] = r.notes;
    return j;
}

inline json to_json(const TwoFoldClassification& c)
{
    return {{"a", c.a},
            {"b", c.b},
            {"c", c.c},
            {"sigma_over_eps", c.sigma_over_eps},
            {"sliding_type", to_string(c.sliding_type)},
            {"eig_in_region", c.eig_in_region},
            {"curvature_case", to_string(c.curvature_case)},
            {"canard_class", to_string(c.canard_class)},
            {"hddot_t1", c.hddot_t1},
            {"hddot_t2", c.hddot_t2}};
}

inline json to_json(const SlidingBifurcation& b)
{
    return {{"param", b.param},
            {"x", b.x},
            {"kind", b.kind},
            {"hddot_upper", b.hddot_upper},
            {"hddot_lower", b.hddot_lower}};
}

inline void write_json(std::ostream& os, const json& j) { os << j.dump(2) << "\n"; }

}  // namespace canard
