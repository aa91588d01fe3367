#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "canard_analysis.hpp"
#include "io.hpp"
#include "microscope.hpp"
#include "models.hpp"
#include "periodic.hpp"
#include "pinch.hpp"

namespace canard {

struct TwoFoldGrid {
    std::vector<double> a, b, c, sigma_over_eps;
    std::vector<TwoFoldSample> samples;
};

struct ScenarioConfig {
    std::string name;
    std::string description;
    std::string system;
    double epsilon = std::numeric_limits<double>::quiet_NaN();  // NaN: model default
    ParamMap params;
    std::string kind;
    std::string chart = "lienard";
    double sigma_scale = 1.0;
    std::string policy = "stay_sliding";
    double depart_delay = 0.0;
    std::vector<double> x0;
    bool x0_in_chart = false;
    double t0 = 0.0, t1 = 20.0;
    std::string param = "q";
    std::vector<double> values;
    std::string anchor = "none";
    std::vector<double> range;
    int n = 0;
    bool refine = false;
    bool write_cycles = false;
    std::vector<double> window{-2.5, 2.5};
    std::vector<double> domain;
    int samples = 401;
    IntegrationConfig integration;
    TwoFoldGrid twofold;
    std::string prefix;
};

namespace detail {

inline const std::vector<std::string>& run_kinds()
{
    static const std::vector<std::string> k{"orbit",       "charts",      "cycle",    "sweep",
                                            "report",      "classify",    "lemma_check", "nullcline",
                                            "pinch_orbit", "sliding_bifurcation"};
    return k;
}

inline json parse_scalar(const std::string& raw)
{
    std::string v = raw;
    v.erase(0, v.find_first_not_of(" \t"));
    v.erase(v.find_last_not_of(" \t\r") + 1);
    json j = json::parse(v, nullptr, false);
    if (!j.is_discarded())
        return j;
    if (v.find(',') != std::string::npos) {
        json a = json::array();
        std::stringstream ss(v);
        std::string item;
        while (std::getline(ss, item, ','))
            a.push_back(parse_scalar(item));
        return a;
    }
    return v;
}

inline void set_path(json& root, const std::string& key, const json& value)
{
    json* cur = &root;
    std::size_t start = 0;
    while (true) {
        std::size_t dot = key.find('.', start);
        std::string part = key.substr(start, dot - start);
        if (part.empty())
            throw ConfigError("config key '" + key + "': empty path component");
        if (dot == std::string::npos) {
            (*cur)[part] = value;
            return;
        }
        if (!cur->contains(part) || !(*cur)[part].is_object())
            (*cur)[part] = json::object();
        cur = &(*cur)[part];
        start = dot + 1;
    }
}

inline double get_number(const json& j, const std::string& path)
{
    if (!j.is_number())
        throw ConfigError("field '" + path + "': expected a number");
    return j.get<double>();
}

inline std::vector<double> get_numbers(const json& j, const std::string& path)
{
    std::vector<double> out;
    if (j.is_number()) {
        out.push_back(j.get<double>());
        return out;
    }
    if (!j.is_array())
        throw ConfigError("field '" + path + "': expected a list of numbers");
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(get_number(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

inline std::string get_string(const json& j, const std::string& path)
{
    if (!j.is_string())
        throw ConfigError("field '" + path + "': expected a string");
    return j.get<std::string>();
}

}  // namespace detail

// key=value lines (dotted keys, '#' comments) into a json object
inline json parse_key_values(const std::string& text)
{
    json root = json::object();
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
        std::string key = line.substr(0, eq);
        key.erase(0, key.find_first_not_of(" \t"));
        key.erase(key.find_last_not_of(" \t") + 1);
        detail::set_path(root, key, detail::parse_scalar(line.substr(eq + 1)));
    }
    return root;
}

inline json parse_config_text(const std::string& text)
{
    auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        json j = json::parse(text, nullptr, false);
        if (j.is_discarded())
            throw ConfigError("config: malformed JSON");
        return j;
    }
    return parse_key_values(text);
}

inline void apply_override(json& j, const std::string& kv)
{
    auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("override '" + kv + "': expected key=value");
    detail::set_path(j, kv.substr(0, eq), detail::parse_scalar(kv.substr(eq + 1)));
}

inline IntegrationConfig parse_integration(const json& j, double eps)
{
    IntegrationConfig cfg = default_config(eps);
    if (j.is_null())
        return cfg;
    if (!j.is_object())
        throw ConfigError("field 'integration': expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        std::string path = "integration." + it.key();
        if (it.key() == "rel_tol")
            cfg.rel_tol = detail::get_number(*it, path);
        else if (it.key() == "abs_tol")
            cfg.abs_tol = detail::get_number(*it, path);
        else if (it.key() == "event_tol")
            cfg.event_tol = detail::get_number(*it, path);
        else if (it.key() == "max_step")
            cfg.max_step = detail::get_number(*it, path);
        else if (it.key() == "max_steps")
            cfg.max_steps = static_cast<std::size_t>(detail::get_number(*it, path));
        else if (it.key() == "sample_dt")
            cfg.sample_dt = detail::get_number(*it, path);
        else if (it.key() == "scheme") {
            std::string s = detail::get_string(*it, path);
            if (s == "implicit")
                cfg.scheme = Scheme::implicit;
            else if (s == "adaptive_explicit")
                cfg.scheme = Scheme::adaptive_explicit;
            else
                throw ConfigError("field '" + path + "': unknown scheme '" + s + "'");
        } else
            throw ConfigError("unknown field '" + path + "'");
    }
    if (!(cfg.rel_tol > 0))
        throw ConfigError("field 'integration.rel_tol': must be > 0");
    if (!(cfg.abs_tol > 0))
        throw ConfigError("field 'integration.abs_tol': must be > 0");
    if (!(cfg.event_tol > 0) || cfg.event_tol > cfg.abs_tol)
        throw ConfigError("field 'integration.event_tol': must satisfy 0 < event_tol <= abs_tol");
    return cfg;
}

inline ScenarioConfig parse_scenario(const json& j)
{
    if (!j.is_object())
        throw ConfigError("config: expected an object");
    ScenarioConfig c;
    json integration;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& k = it.key();
        const json& v = *it;
        if (k == "name")
            c.name = detail::get_string(v, k);
        else if (k == "description")
            c.description = detail::get_string(v, k);
        else if (k == "system")
            c.system = detail::get_string(v, k);
        else if (k == "epsilon")
            c.epsilon = detail::get_number(v, k);
        else if (k == "params") {
            if (!v.is_object())
                throw ConfigError("field 'params': expected an object");
            for (auto p = v.begin(); p != v.end(); ++p)
                c.params[p.key()] = detail::get_number(*p, "params." + p.key());
        } else if (k == "kind")
            c.kind = detail::get_string(v, k);
        else if (k == "chart")
            c.chart = detail::get_string(v, k);
        else if (k == "sigma_scale")
            c.sigma_scale = detail::get_number(v, k);
        else if (k == "policy")
            c.policy = detail::get_string(v, k);
        else if (k == "depart_delay")
            c.depart_delay = detail::get_number(v, k);
        else if (k == "x0")
            c.x0 = detail::get_numbers(v, k);
        else if (k == "x0_in_chart") {
            if (!v.is_boolean())
                throw ConfigError("field 'x0_in_chart': expected true/false");
            c.x0_in_chart = v.get<bool>();
        } else if (k == "t_span") {
            auto ts = detail::get_numbers(v, k);
            if (ts.size() != 2)
                throw ConfigError("field 't_span': expected [t0, t1]");
            c.t0 = ts[0];
            c.t1 = ts[1];
        } else if (k == "param")
            c.param = detail::get_string(v, k);
        else if (k == "values")
            c.values = detail::get_numbers(v, k);
        else if (k == "anchor")
            c.anchor = detail::get_string(v, k);
        else if (k == "range")
            c.range = detail::get_numbers(v, k);
        else if (k == "n")
            c.n = static_cast<int>(detail::get_number(v, k));
        else if (k == "refine" || k == "write_cycles") {
            if (!v.is_boolean())
                throw ConfigError("field '" + k + "': expected true/false");
            (k == "refine" ? c.refine : c.write_cycles) = v.get<bool>();
        } else if (k == "window")
            c.window = detail::get_numbers(v, k);
        else if (k == "domain")
            c.domain = detail::get_numbers(v, k);
        else if (k == "samples")
            c.samples = static_cast<int>(detail::get_number(v, k));
        else if (k == "integration")
            integration = v;
        else if (k == "prefix")
            c.prefix = detail::get_string(v, k);
        else if (k == "twofold") {
            if (!v.is_object())
                throw ConfigError("field 'twofold': expected an object");
            for (auto p = v.begin(); p != v.end(); ++p) {
                std::string path = "twofold." + p.key();
                if (p.key() == "a")
                    c.twofold.a = detail::get_numbers(*p, path);
                else if (p.key() == "b")
                    c.twofold.b = detail::get_numbers(*p, path);
                else if (p.key() == "c")
                    c.twofold.c = detail::get_numbers(*p, path);
                else if (p.key() == "sigma_over_eps")
                    c.twofold.sigma_over_eps = detail::get_numbers(*p, path);
                else if (p.key() == "samples") {
                    if (!p->is_array())
                        throw ConfigError("field '" + path + "': expected a list of [a, b, c, sigma_over_eps]");
                    for (std::size_t i = 0; i < p->size(); ++i) {
                        auto s = detail::get_numbers((*p)[i], path + "[" + std::to_string(i) + "]");
                        if (s.size() != 4)
                            throw ConfigError("field '" + path + "[" + std::to_string(i) +
                                              "]': expected [a, b, c, sigma_over_eps]");
                        c.twofold.samples.push_back({s[0], s[1], s[2], s[3]});
                    }
                } else
                    throw ConfigError("unknown field '" + path + "'");
            }
        } else
            throw ConfigError("unknown field '" + k + "'");
    }

    // validation
    if (c.kind.empty())
        throw ConfigError("field 'kind': required");
    const auto& kinds = detail::run_kinds();
    if (std::find(kinds.begin(), kinds.end(), c.kind) == kinds.end())
        throw ConfigError("field 'kind': unknown run kind '" + c.kind + "'");
    if (c.kind != "classify") {
        if (c.system.empty())
            throw ConfigError("field 'system': required for kind '" + c.kind + "'");
        if (!model_registry().count(c.system))
            throw ConfigError("field 'system': unknown system '" + c.system + "'");
    }
    if (!std::isnan(c.epsilon) && !(c.epsilon > 0))
        throw ConfigError("field 'epsilon': must be > 0");
    chart_kind_from_string(c.chart);
    policy_from_string(c.policy);
    if (!(c.sigma_scale > 0))
        throw ConfigError("field 'sigma_scale': must be > 0");
    if (c.window.size() != 2 || !(c.window[1] > c.window[0]))
        throw ConfigError("field 'window': expected [lo, hi] with lo < hi");
    if (!c.domain.empty() && (c.domain.size() != 2 || !(c.domain[1] > c.domain[0])))
        throw ConfigError("field 'domain': expected [lo, hi] with lo < hi");
    if (c.kind == "orbit" || c.kind == "charts" || c.kind == "pinch_orbit") {
        if (c.x0.empty())
            throw ConfigError("field 'x0': required for kind '" + c.kind + "'");
        if (!(c.t1 >= c.t0))
            throw ConfigError("field 't_span': t1 must be >= t0");
    }
    if (c.kind == "sweep") {
        if (c.range.size() != 2)
            throw ConfigError("field 'range': expected [lo, hi]");
        if (!(c.range[1] > c.range[0]))
            throw ConfigError("field 'range': empty sweep range");
        if (c.n < 2)
            throw ConfigError("field 'n': sweep needs n >= 2");
    }
    if ((c.kind == "cycle" || c.kind == "nullcline" || c.kind == "pinch_orbit") && c.values.empty())
        throw ConfigError("field 'values': required for kind '" + c.kind + "'");
    if (c.kind == "sliding_bifurcation" && c.range.size() != 2)
        throw ConfigError("field 'range': expected [lo, hi]");
    if (c.kind == "classify" && c.twofold.samples.empty() &&
        (c.twofold.a.empty() || c.twofold.b.empty() || c.twofold.c.empty() || c.twofold.sigma_over_eps.empty()))
        throw ConfigError("field 'twofold': needs samples or a, b, c, sigma_over_eps lists");
    if (c.samples < 2)
        throw ConfigError("field 'samples': must be >= 2");
    if (c.prefix.empty())
        c.prefix = c.name.empty() ? c.kind : c.name;

    if (!c.system.empty()) {
        double eps = std::isnan(c.epsilon) ? make_system(c.system).epsilon() : c.epsilon;
        c.integration = parse_integration(integration, eps);
    } else {
        c.integration = parse_integration(integration, 0.04);
    }
    return c;
}

struct Recipe {
    std::string name;
    std::string description;
    std::string config;  // JSON text
};

// alphabetical
inline const std::vector<Recipe>& builtin_recipes()
{
    static const std::vector<Recipe> r{
        {"f_call", "two-fold archetypes: simple, robust and visible canards",
         R"({"name": "f_call", "kind": "classify",
  "twofold": {"samples": [[1, 1, 0.5, 4], [1, -1, -3, 4], [1, 1, 0.5, 1]]}})"},
        {"f_canlip", "Hindmarsh-Rose periodic attractors and spike count against I",
         R"({"name": "f_canlip", "kind": "sweep", "system": "hindmarsh_rose", "epsilon": 0.04,
  "param": "I", "range": [1.9, 2.4], "n": 11, "write_cycles": true})"},
        {"f_hvdp2", "FitzHugh-Nagumo cycles around the maximal canard q0",
         R"({"name": "f_hvdp2", "kind": "cycle", "system": "fhn", "epsilon": 0.04,
  "params": {"r": 1, "p": 1}, "anchor": "q0", "values": [-0.02, -6.045e-5, 0, 0.02]})"},
        {"f_hvdp2pinchs", "pinched FitzHugh-Nagumo in the W chart near q0",
         R"({"name": "f_hvdp2pinchs", "kind": "pinch_orbit", "system": "fhn", "epsilon": 0.04,
  "params": {"r": 1, "p": 1}, "chart": "w_scope", "anchor": "q0", "values": [-1e-4, 0, 1e-4],
  "x0": [1.6, 0.9], "x0_in_chart": true, "t_span": [0, 3], "window": [0.2, 1.8], "domain": [-0.5, 2.5]})"},
        {"f_hvdpbif", "van der Pol V-chart nullclines through q_V = 1",
         R"({"name": "f_hvdpbif", "kind": "nullcline", "system": "vdp", "epsilon": 0.04,
  "chart": "v_scope", "values": [0.9, 1.0, 1.1], "window": [-2.5, 2.5]})"},
        {"f_hvdpbifs", "van der Pol W-chart nullclines through q_W",
         R"({"name": "f_hvdpbifs", "kind": "nullcline", "system": "vdp", "epsilon": 0.04,
  "chart": "w_scope", "anchor": "q_W", "values": [-1e-3, 0, 2e-3], "window": [0.2, 1.8]})"},
        {"f_hvdppinch", "pinched van der Pol in the V chart, q = 0.9, 1, 1.1",
         R"({"name": "f_hvdppinch", "kind": "pinch_orbit", "system": "vdp", "epsilon": 0.04,
  "chart": "v_scope", "values": [0.9, 1.0, 1.1], "x0": [2, 0], "t_span": [0, 20]})"},
        {"f_hvdppinchs", "pinched van der Pol in the W chart near q_W",
         R"({"name": "f_hvdppinchs", "kind": "pinch_orbit", "system": "vdp", "epsilon": 0.04,
  "chart": "w_scope", "anchor": "q_W", "values": [-1e-4, 0, 1e-4],
  "x0": [1.6, 0.9], "x0_in_chart": true, "t_span": [0, 3], "window": [0.2, 1.8], "domain": [-0.5, 2.5]})"},
        {"f_hvdptrans", "one relaxation oscillation in Lienard, flat, V and W charts",
         R"({"name": "f_hvdptrans", "kind": "charts", "system": "vdp", "epsilon": 0.04,
  "params": {"q": 0.9}, "x0": [2, 0], "t_span": [0, 20]})"},
        {"f_lienard", "canard explosion bifurcation diagram, ε=5e−3",
         R"({"name": "f_lienard", "kind": "sweep", "system": "vdp", "epsilon": 0.005,
  "param": "q", "range": [0.95, 1.05], "n": 101, "refine": true,
  "integration": {"scheme": "implicit", "rel_tol": 1e-9, "abs_tol": 1e-11, "event_tol": 1e-11}})"},
        {"fhn_report", "FitzHugh-Nagumo Hopf and maximal-canard parameters",
         R"({"name": "fhn_report", "kind": "report", "system": "fhn", "epsilon": 0.04, "params": {"r": 1, "p": 1}})"},
        {"hr_report", "Hindmarsh-Rose I_h, I0 and spike-onset estimate",
         R"({"name": "hr_report", "kind": "report", "system": "hr_reduced", "epsilon": 0.04})"},
        {"lemma51", "residual of the rewritten W field on a sample grid",
         R"({"name": "lemma51", "kind": "lemma_check", "system": "vdp", "epsilon": 0.04})"},
        {"quartic", "maximal-canard parameter q_W from the quartic",
         R"({"name": "quartic", "kind": "report", "system": "vdp", "epsilon": 0.04})"},
        {"sliding_bifurcation", "tangency collision on the pinched van der Pol W chart",
         R"({"name": "sliding_bifurcation", "kind": "sliding_bifurcation", "system": "vdp", "epsilon": 0.04,
  "chart": "w_scope", "range": [0.98, 0.998], "window": [0.2, 1.8]})"},
        {"twofold_table", "two-fold classification over an (a, b, c, sigma/eps) grid",
         R"({"name": "twofold_table", "kind": "classify",
  "twofold": {"a": [-2, -1, 1, 2], "b": [-2, -1, 1, 2], "c": [-3, -0.5, 0.5, 3], "sigma_over_eps": [0.5, 2, 8]}})"},
    };
    return r;
}

inline const Recipe& find_recipe(const std::string& name)
{
    for (const auto& r : builtin_recipes())
        if (r.name == name)
            return r;
    throw ConfigError("unknown recipe '" + name + "'");
}

inline std::vector<std::pair<std::string, std::string>> list_recipes()
{
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& r : builtin_recipes())
        out.emplace_back(r.name, r.description);
    std::sort(out.begin(), out.end());
    return out;
}

struct RunResult {
    std::vector<std::string> files;
    json summary;
};

namespace detail {

inline SlowFastSystem scenario_system(const ScenarioConfig& c)
{
    ParamMap p = c.params;
    if (!std::isnan(c.epsilon))
        p["eps"] = c.epsilon;
    return make_system(c.system, p);
}

inline std::vector<std::string> state_names(const SlowFastSystem& sys)
{
    if (sys.dimension() == 3)
        return {"x", "y", "z"};
    return {"x", "y"};
}

inline Gamma0 gamma0_for(const SlowFastSystem& sys)
{
    if (sys.tag() == "vdp")
        return Gamma0::vdp();
    if (sys.tag() == "fhn")
        return Gamma0::fhn(sys.param("r"), sys.param("p"), sys.epsilon());
    if (sys.tag() == "hr_reduced") {
        auto rep = hr_report(sys.epsilon(), sys.param("a"), sys.param("b"), sys.param("c"), sys.param("d"),
                             sys.param("s"), sys.param("x1"), sys.param("I"));
        return Gamma0::hr(sys.param("a"), sys.param("b"), sys.param("d"), sys.param("s"), *rep.x_h);
    }
    throw ConfigError("field 'chart': no W chart for system '" + sys.tag() + "'");
}

inline Chart chart_for(const SlowFastSystem& sys, ChartKind k)
{
    switch (k) {
    case ChartKind::lienard: return Chart::lienard(sys.epsilon());
    case ChartKind::flat_h: return Chart::flat(sys.epsilon());
    case ChartKind::v_scope: return Chart::v_scope(sys.epsilon());
    default: return Chart::w_scope(sys.epsilon(), gamma0_for(sys));
    }
}

inline CanardReport report_for(const SlowFastSystem& sys)
{
    double eps = sys.epsilon();
    if (sys.tag() == "vdp")
        return vdp_report(eps);
    if (sys.tag() == "fhn")
        return fhn_report(eps, sys.param("r"), sys.param("p"));
    if (sys.tag() == "hr_reduced" || sys.tag() == "hindmarsh_rose")
        return hr_report(eps, sys.param("a"), sys.param("b"), sys.param("c"), sys.param("d"), sys.param("s"),
                         sys.param("x1"), sys.param("I"));
    throw ConfigError("field 'system': no canard report for '" + sys.tag() + "'");
}

inline double anchor_value(const SlowFastSystem& sys, const std::string& anchor)
{
    if (anchor == "none")
        return 0.0;
    CanardReport r = report_for(sys);
    const std::map<std::string, std::optional<double>> m{{"q_V", r.q_V}, {"q_W", r.q_W}, {"q_h", r.q_h},
                                                         {"q0", r.q0},   {"I_h", r.I_h}, {"I0", r.I0},
                                                         {"I_sp", r.I_sp}};
    auto it = m.find(anchor);
    if (it == m.end() || !it->second)
        throw ConfigError("field 'anchor': '" + anchor + "' not available for system '" + sys.tag() + "'");
    return *it->second;
}

inline std::string index_name(const std::string& prefix, std::size_t i, const std::string& tail)
{
    return prefix + "_" + std::to_string(i) + tail;
}

class Output {
public:
    explicit Output(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

    std::ofstream open(const std::string& name, RunResult& res)
    {
        auto p = dir_ / name;
        std::ofstream os(p);
        if (!os)
            throw ConfigError("output: cannot write '" + p.string() + "'");
        os << std::setprecision(17);
        res.files.push_back(p.string());
        return os;
    }

private:
    std::filesystem::path dir_;
};

inline PinchedSystem scenario_pinch(const ScenarioConfig& c, const SlowFastSystem& sys)
{
    ChartKind k = chart_kind_from_string(c.chart);
    if (k != ChartKind::v_scope && k != ChartKind::w_scope)
        throw ConfigError("field 'chart': pinching needs v_scope or w_scope");
    Chart ch = chart_for(sys, k);
    PinchedSystem ps = pinch_chart(sys, ch, default_sigma(ch) * c.sigma_scale, c.window[0], c.window[1]);
    ps.policy = policy_from_string(c.policy);
    ps.depart_delay = c.depart_delay;
    if (!c.domain.empty()) {
        ps.domain_lo = c.domain[0];
        ps.domain_hi = c.domain[1];
    }
    return ps;
}

}  // namespace detail

inline RunResult run_scenario(const ScenarioConfig& c, const std::filesystem::path& out_dir, unsigned threads = 1)
{
    RunResult res;
    detail::Output out(out_dir);
    res.summary["name"] = c.name;
    res.summary["kind"] = c.kind;

    if (c.kind == "classify") {
        std::vector<TwoFoldClassification> rows;
        for (const auto& s : c.twofold.samples)
            rows.push_back(classify_twofold(s.a, s.b, s.c, s.sigma_over_eps));
        auto grid = twofold_table(c.twofold.a, c.twofold.b, c.twofold.c, c.twofold.sigma_over_eps);
        rows.insert(rows.end(), grid.begin(), grid.end());
        json arr = json::array();
        for (const auto& r : rows)
            arr.push_back(to_json(r));
        res.summary["classifications"] = arr;
        auto os = out.open(c.prefix + "_twofold.csv", res);
        os << "a,b,c,sigma_over_eps,sliding_type,eig_in_region,curvature_case,canard_class\n";
        for (const auto& r : rows)
            os << detail::num(r.a) << "," << detail::num(r.b) << "," << detail::num(r.c) << ","
               << detail::num(r.sigma_over_eps) << "," << to_string(r.sliding_type) << "," << r.eig_in_region << ","
               << to_string(r.curvature_case) << "," << to_string(r.canard_class) << "\n";
        auto js = out.open(c.prefix + "_twofold.json", res);
        write_json(js, res.summary);
        return res;
    }

    SlowFastSystem sys = detail::scenario_system(c);
    const IntegrationConfig& cfg = c.integration;
    res.summary["system"] = sys.tag();
    res.summary["eps"] = sys.epsilon();
    auto names = detail::state_names(sys);
    double anchor = detail::anchor_value(sys, c.anchor);
    if (c.anchor != "none")
        res.summary["anchor"] = {{"name", c.anchor}, {"value", anchor}};

    if (c.kind == "orbit" || c.kind == "charts") {
        IntegrationConfig oc = cfg;
        if (oc.sample_dt == 0)
            oc.sample_dt = (c.t1 - c.t0) / 4000;
        OrbitTrace tr = integrate(sys, c.x0, c.t0, c.t1, oc, {h_zero_event(sys)});
        std::vector<ChartKind> kinds;
        if (c.kind == "orbit")
            kinds.push_back(chart_kind_from_string(c.chart));
        else
            kinds = {ChartKind::lienard, ChartKind::flat_h, ChartKind::v_scope, ChartKind::w_scope};
        for (ChartKind k : kinds) {
            Chart ch = detail::chart_for(sys, k);
            OrbitTrace m = map_trace(tr, sys, ch);
            std::vector<std::string> cols = names;
            if (k == ChartKind::flat_h)
                cols = {"x", "h"};
            else if (k == ChartKind::v_scope)
                cols = {"x", "V"};
            else if (k == ChartKind::w_scope)
                cols = {"x", "W"};
            auto os = out.open(c.prefix + "_" + to_string(k) + ".csv", res);
            write_trace_csv(os, m, cols, to_string(k));
        }
        res.summary["samples"] = tr.size();
        res.summary["events"] = tr.events.size();
    } else if (c.kind == "cycle") {
        json arr = json::array();
        for (std::size_t i = 0; i < c.values.size(); ++i) {
            double v = anchor + c.values[i];
            SlowFastSystem s = sys.with(c.param, v);
            State seed = c.x0.empty() ? default_seed(s) : c.x0;
            auto cycles = find_limit_cycles(s, seed, cfg);
            json entry{{"param", v}, {"offset", c.values[i]}};
            json cj = json::array();
            for (std::size_t m = 0; m < cycles.size(); ++m) {
                const auto& o = cycles[m];
                cj.push_back(to_json(o));
                OrbitTrace t;
                t.times = o.times;
                t.states = o.cycle_states;
                auto os = out.open(detail::index_name(c.prefix, i, std::string("_") + to_string(o.stability) + ".csv"),
                                   res);
                write_trace_csv(os, t, names);
            }
            entry["cycles"] = cj;
            auto eqs = equilibria(s);
            json ej = json::array();
            for (const auto& e : eqs)
                ej.push_back({{"state", e.state}, {"stability", to_string(e.stability)}});
            entry["equilibria"] = ej;
            arr.push_back(entry);
        }
        res.summary["points"] = arr;
    } else if (c.kind == "sweep") {
        SweepOptions opt;
        opt.threads = threads;
        if (!c.x0.empty())
            opt.seed = c.x0;
        BranchSweep sw = branch_sweep(sys, c.param, c.range[0], c.range[1], c.n, cfg, opt);
        if (c.refine && sw.explosion)
            sw.explosion = refine_explosion(sys, c.param, *sw.explosion, cfg, opt, 1e-7);
        res.summary["sweep"] = to_json(sw);
        if (c.write_cycles)
            for (std::size_t i = 0; i < sw.points.size(); ++i)
                if (sw.points[i].cycle) {
                    OrbitTrace t;
                    t.times = sw.points[i].cycle->times;
                    t.states = sw.points[i].cycle->cycle_states;
                    auto os = out.open(detail::index_name(c.prefix, i, "_cycle.csv"), res);
                    write_trace_csv(os, t, names);
                }
        auto os = out.open(c.prefix + "_branch.csv", res);
        os << "param,norm,amplitude,period,stability,spike_count\n";
        for (const auto& p : sw.points)
            os << detail::num(p.param) << "," << detail::num(p.norm) << "," << detail::num(p.amplitude) << ","
               << detail::num(p.period) << "," << p.stability << "," << p.spike_count << "\n";
    } else if (c.kind == "report") {
        res.summary["report"] = to_json(detail::report_for(sys));
    } else if (c.kind == "lemma_check") {
        if (sys.tag() != "vdp")
            throw ConfigError("field 'system': lemma_check is defined for vdp");
        double eps = sys.epsilon();
        double q0 = vdp_maximal_canard_q(eps);
        Chart w = Chart::w_scope(eps, Gamma0::vdp_invariant(eps, q0));
        double worst = 0, wlo = std::exp(2 * eps * std::log(eps));
        for (int i = 0; i < 20; ++i)
            for (int j = 0; j < 20; ++j)
                for (double dq : {-1e-4, 1e-4})
                    for (double sg : {-1.0, 1.0}) {
                        double x = 0.2 + 1.6 * i / 19.0;
                        double W = sg * (wlo + (1 - wlo) * j / 19.0);
                        worst = std::max(worst, lemma51_residual(sys, w, x, W, q0 + dq, q0));
                    }
        Chart hyp = Chart::w_scope(eps, Gamma0::vdp());
        double hyp_worst = 0;
        for (int i = 0; i < 20; ++i) {
            double x = 0.2 + 1.6 * i / 19.0;
            hyp_worst = std::max(hyp_worst, lemma51_residual(sys, hyp, x, 0.9, q0 + 1e-4, q0));
        }
        res.summary["q0"] = q0;
        res.summary["max_residual_invariant_gamma0"] = worst;
        res.summary["max_residual_hyperbola_gamma0"] = hyp_worst;
    } else if (c.kind == "nullcline") {
        ChartKind k = chart_kind_from_string(c.chart);
        Chart ch = detail::chart_for(sys, k);
        std::vector<double> vals;
        for (double v : c.values)
            vals.push_back(anchor + v);
        auto os = out.open(c.prefix + "_nullcline.csv", res);
        os << "# chart=" << to_string(k) << "\nx";
        for (double v : vals)
            os << "," << c.param << "=" << detail::num(v);
        os << "\n";
        for (int i = 0; i < c.samples; ++i) {
            double x = c.window[0] + (c.window[1] - c.window[0]) * i / (c.samples - 1);
            os << detail::num(x);
            for (double v : vals) {
                std::optional<double> o;
                try {
                    o = nullcline_ordinate(sys.with(c.param, v), ch, x);
                } catch (const Error&) {
                }
                os << "," << (o ? detail::num(*o) : std::string("nan"));
            }
            os << "\n";
        }
        // singular point seeded by the closed forms
        if (k == ChartKind::v_scope || k == ChartKind::w_scope) {
            CanardReport rep = detail::report_for(sys);
            SingularPoint seed{};
            bool have = true;
            if (sys.tag() == "vdp") {
                if (k == ChartKind::v_scope)
                    seed = {1.0, *rep.V_singular, 1.0};
                else
                    seed = {*rep.q_W, *rep.W0, *rep.q_W};
            } else if (sys.tag() == "fhn") {
                if (k == ChartKind::v_scope)
                    seed = {*rep.x_h, signed_pow(*rep.h_h, sys.epsilon()), *rep.q_h};
                else
                    seed = {*rep.x0, *rep.W0, *rep.q0};
            } else
                have = false;
            if (have) {
                SingularPoint sp = nullcline_singularity(sys, ch, c.param, seed);
                res.summary["singular_point"] = {{"x", sp.x}, {"ordinate", sp.ordinate}, {c.param, sp.param}};
            }
        }
    } else if (c.kind == "pinch_orbit") {
        json arr = json::array();
        for (std::size_t i = 0; i < c.values.size(); ++i) {
            double v = anchor + c.values[i];
            SlowFastSystem s = sys.with(c.param, v);
            PinchedSystem ps = detail::scenario_pinch(c, s);
            Chart ch = detail::chart_for(s, chart_kind_from_string(c.chart));
            State x0 = c.x0_in_chart ? c.x0 : ch.to_chart(s, c.x0);
            PinchedTrace tr = integrate_pinched(ps, x0, c.t0, c.t1, cfg);
            json entry{{"param", v}, {"offset", c.values[i]}, {"escaped", tr.trace.escaped}};
            json tj = json::array();
            for (const auto& t : ps.tangency_points())
                tj.push_back({{"x", t.s}, {"side", t.side > 0 ? "T1" : "T2"}, {"hddot", t.hddot}, {"away", t.away}});
            entry["tangencies"] = tj;
            json rj = json::array();
            for (const auto& r : ps.sliding_regions())
                rj.push_back({{"lo", r.lo}, {"hi", r.hi}, {"kind", to_string(r.kind)}});
            entry["regions"] = rj;
            entry["events"] = events_json(tr.trace.events);
            arr.push_back(entry);
            std::vector<std::string> cols{"x", chart_kind_from_string(c.chart) == ChartKind::v_scope ? "V" : "W"};
            auto os = out.open(detail::index_name(c.prefix, i, "_pinched.csv"), res);
            write_pinched_csv(os, tr, cols, c.chart);
        }
        res.summary["points"] = arr;
    } else if (c.kind == "sliding_bifurcation") {
        if (sys.dimension() != 2)
            throw ConfigError("field 'system': sliding_bifurcation needs a planar system");
        auto family = [&](double v) { return detail::scenario_pinch(c, sys.with(c.param, v)); };
        double xref = 0.5 * (c.window[0] + c.window[1]);
        res.summary["bifurcation"] = to_json(detect_sliding_bifurcation(family, c.range[0], c.range[1], xref));
    }

    auto js = out.open(c.prefix + "_summary.json", res);
    write_json(js, res.summary);
    return res;
}

}  // namespace canard
