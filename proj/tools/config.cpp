#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace qatlab {

ConfigParse::ConfigParse(const std::string& file, int l, int c, const std::string& msg)
    : std::runtime_error("ConfigParse: " + file + ":" + std::to_string(l) + ":" +
                         std::to_string(c) + ": " + msg),
      line(l),
      col(c) {}

const std::vector<std::string>& known_outputs() {
    static const std::vector<std::string> names{
        "expectations", "residuals",   "algebra_table",     "spectrum",
        "wavefunction_dump", "free_image", "propagator_compare", "hamiltonian_control",
        "de_evolution", "sl2_shift"};
    return names;
}

bool ScenarioConfig::wants(const std::string& what) const {
    return std::find(outputs.begin(), outputs.end(), what) != outputs.end();
}

namespace {

std::string trim(const std::string& s, size_t* lead = nullptr) {
    const size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        if (lead) *lead = s.size();
        return "";
    }
    const size_t e = s.find_last_not_of(" \t\r");
    if (lead) *lead = b;
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    for (std::string w; in >> w;) out.push_back(w);
    return out;
}

bool to_double(const std::string& s, double& v) {
    const char* b = s.data();
    const char* e = b + s.size();
    auto [p, ec] = std::from_chars(b, e, v);
    return ec == std::errc() && p == e && std::isfinite(v);
}

struct Entry {
    std::string value;
    int line, col;
};

class Reader {
public:
    Reader(std::string name, std::map<std::string, Entry> kv) : name_(std::move(name)), kv_(std::move(kv)) {}

    const Entry* find(const std::string& key) const {
        auto it = kv_.find(key);
        return it == kv_.end() ? nullptr : &it->second;
    }

    [[noreturn]] void fail(const Entry& e, const std::string& msg) const {
        throw ConfigParse(name_, e.line, e.col, msg);
    }

    void number(const std::string& key, double& out) const {
        if (const Entry* e = find(key))
            if (!to_double(e->value, out)) fail(*e, "expected a number for " + key);
    }
    void integer(const std::string& key, int& out) const {
        if (const Entry* e = find(key)) {
            double v = 0;
            if (!to_double(e->value, v) || v != std::floor(v) || std::abs(v) > 1e9)
                fail(*e, "expected an integer for " + key);
            out = static_cast<int>(v);
        }
    }
    void text(const std::string& key, std::string& out) const {
        if (const Entry* e = find(key)) out = e->value;
    }

private:
    std::string name_;
    std::map<std::string, Entry> kv_;
};

const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s{
        {"system", {"preset", "gamma", "omega", "force_amplitude", "force_frequency", "f",
                    "omega_sq", "lambda"}},
        {"units", {"m", "hbar"}},
        {"grid", {"x_min", "x_max", "n"}},
        {"time", {"t_max", "samples", "cn_dt", "propagator"}},
        {"initial_state", {"kind", "x0", "p0", "sigma", "k", "n"}},
        {"spectrum", {"omega_tilde", "gamma_tilde", "n_max"}},
        {"outputs", {"list", "tolerance", "seed"}},
    };
    return s;
}

}  // namespace

ScenarioConfig parse_config(const std::string& text, const std::string& name) {
    std::map<std::string, Entry> kv;
    std::string section;
    std::istringstream in(text);
    std::string raw;
    for (int lineno = 1; std::getline(in, raw); ++lineno) {
        const size_t hash = raw.find_first_of("#;");
        const std::string body = hash == std::string::npos ? raw : raw.substr(0, hash);
        size_t lead = 0;
        const std::string line = trim(body, &lead);
        if (line.empty()) continue;
        const int col0 = static_cast<int>(lead) + 1;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigParse(name, lineno, col0, "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (!schema().count(section))
                throw ConfigParse(name, lineno, col0 + 1, "unknown section [" + section + "]");
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigParse(name, lineno, col0, "expected key = value");
        if (section.empty())
            throw ConfigParse(name, lineno, col0, "key outside of any section");
        const std::string key = trim(line.substr(0, eq));
        size_t vlead = 0;
        const std::string value = trim(line.substr(eq + 1), &vlead);
        const int vcol = col0 + static_cast<int>(eq + 1 + vlead);
        if (key.empty()) throw ConfigParse(name, lineno, col0, "empty key");
        if (!schema().at(section).count(key))
            throw ConfigParse(name, lineno, col0, "unknown key '" + key + "' in [" + section + "]");
        if (value.empty()) throw ConfigParse(name, lineno, vcol, "missing value for " + key);
        const std::string full = section + "." + key;
        if (kv.count(full)) throw ConfigParse(name, lineno, col0, "duplicate key " + full);
        kv[full] = Entry{value, lineno, vcol};
    }

    Reader r(name, kv);
    ScenarioConfig c;
    c.path = name;
    r.text("system.preset", c.preset);
    r.number("system.gamma", c.params.gamma);
    r.number("system.omega", c.params.omega);
    r.number("system.force_amplitude", c.params.force_amplitude);
    r.number("system.force_frequency", c.params.force_frequency);
    r.text("system.f", c.f_expr);
    r.text("system.omega_sq", c.w2_expr);
    r.text("system.lambda", c.lambda_expr);
    r.number("units.m", c.params.mass);
    r.number("units.hbar", c.params.hbar);
    r.number("grid.x_min", c.x_min);
    r.number("grid.x_max", c.x_max);
    r.integer("grid.n", c.n);
    r.number("time.t_max", c.t_max);
    r.integer("time.samples", c.samples);
    r.number("time.cn_dt", c.cn_dt);
    r.text("time.propagator", c.propagator);
    r.text("initial_state.kind", c.initial.kind);
    r.number("initial_state.x0", c.initial.x0);
    r.number("initial_state.p0", c.initial.p0);
    r.number("initial_state.sigma", c.initial.sigma);
    r.number("initial_state.k", c.initial.k);
    r.integer("initial_state.n", c.initial.n);
    double ot = 0, gt = 0;
    if (r.find("spectrum.omega_tilde")) r.number("spectrum.omega_tilde", ot), c.omega_tilde = ot;
    if (r.find("spectrum.gamma_tilde")) r.number("spectrum.gamma_tilde", gt), c.gamma_tilde = gt;
    r.integer("spectrum.n_max", c.n_max);
    r.number("outputs.tolerance", c.tolerance);
    if (const Entry* e = r.find("outputs.seed")) {
        const char* b = e->value.data();
        auto [p, ec] = std::from_chars(b, b + e->value.size(), c.seed);
        if (ec != std::errc() || p != b + e->value.size()) r.fail(*e, "expected an unsigned seed");
    }
    if (const Entry* e = r.find("outputs.list")) {
        std::string item;
        std::istringstream items(e->value);
        while (std::getline(items, item, ',')) {
            item = trim(item);
            if (item.empty()) continue;
            const auto& known = known_outputs();
            if (std::find(known.begin(), known.end(), item) == known.end())
                r.fail(*e, "unknown output '" + item + "'");
            c.outputs.push_back(item);
        }
    }

    // Validation with positions of the offending values.
    auto where = [&](const char* key) -> Entry {
        const Entry* e = r.find(key);
        return e ? *e : Entry{"", 0, 0};
    };
    if (c.n < 8 || (c.n & (c.n - 1)) != 0) r.fail(where("grid.n"), "n must be a power of two");
    if (!(c.x_max > c.x_min)) r.fail(where("grid.x_max"), "x_max must exceed x_min");
    if (!(c.t_max > 0)) r.fail(where("time.t_max"), "t_max must be positive");
    if (c.samples < 3) r.fail(where("time.samples"), "samples must be at least 3");
    if (!(c.cn_dt > 0)) r.fail(where("time.cn_dt"), "cn_dt must be positive");
    if (c.propagator != "qat_exact" && c.propagator != "crank_nicolson")
        r.fail(where("time.propagator"), "propagator must be qat_exact or crank_nicolson");
    if (c.initial.kind != "gaussian" && c.initial.kind != "plane_wave" && c.initial.kind != "eigen")
        r.fail(where("initial_state.kind"), "kind must be gaussian, plane_wave or eigen");
    if (!(c.initial.sigma > 0)) r.fail(where("initial_state.sigma"), "sigma must be positive");
    if (!(c.params.mass > 0)) r.fail(where("units.m"), "m must be positive");
    if (!(c.params.hbar > 0)) r.fail(where("units.hbar"), "hbar must be positive");
    if (!(c.tolerance > 0)) r.fail(where("outputs.tolerance"), "tolerance must be positive");
    const bool direct = !c.f_expr.empty() || !c.w2_expr.empty() || !c.lambda_expr.empty();
    if (c.preset.empty() && !direct)
        throw ConfigParse(name, 1, 1, "[system] needs a preset or coefficient expressions");
    if (!c.preset.empty() && direct)
        r.fail(where("system.preset"), "give either a preset or coefficients, not both");
    if (!c.preset.empty()) {
        const auto& names = qat::preset_names();
        if (std::find(names.begin(), names.end(), c.preset) == names.end())
            r.fail(where("system.preset"), "unknown preset '" + c.preset + "'");
    }
    for (const char* key : {"system.f", "system.omega_sq", "system.lambda"})
        if (const Entry* e = r.find(key)) {
            try {
                parse_coefficient(e->value);
            } catch (const std::exception& ex) {
                r.fail(*e, ex.what());
            }
        }
    if (const Entry* e = r.find("system.f"))
        if (std::abs(parse_coefficient(e->value)(0.0)) > 1e-14) r.fail(*e, "f must vanish at t = 0");
    return c;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigParse(path, 0, 0, "cannot open file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

qat::TimeFn parse_coefficient(const std::string& expr) {
    std::vector<std::string> parts;
    {
        std::string seg;
        std::istringstream in(expr);
        while (std::getline(in, seg, ':')) parts.push_back(seg);
    }
    auto nums = [](const std::vector<std::string>& words, size_t from) {
        std::vector<double> v;
        for (size_t i = from; i < words.size(); ++i) {
            double x = 0;
            if (!to_double(words[i], x)) throw std::invalid_argument("bad number '" + words[i] + "'");
            v.push_back(x);
        }
        return v;
    };
    auto horner = [](const std::vector<double>& c, double t) {
        double acc = 0;
        for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * t + *it;
        return acc;
    };
    const auto head = split_ws(parts.at(0));
    if (head.empty()) throw std::invalid_argument("empty coefficient expression");
    const std::string& kind = head[0];
    if (kind == "pwpoly") {
        const std::vector<double> breaks = nums(head, 1);
        if (!std::is_sorted(breaks.begin(), breaks.end()))
            throw std::invalid_argument("pwpoly breakpoints must increase");
        if (parts.size() != breaks.size() + 2)
            throw std::invalid_argument("pwpoly needs one coefficient list per segment");
        std::vector<std::vector<double>> segs;
        for (size_t i = 1; i < parts.size(); ++i) {
            auto c = nums(split_ws(parts[i]), 0);
            if (c.empty()) throw std::invalid_argument("empty pwpoly segment");
            segs.push_back(std::move(c));
        }
        return [breaks, segs, horner](double t) {
            const size_t i = std::upper_bound(breaks.begin(), breaks.end(), t) - breaks.begin();
            return horner(segs[i], t);
        };
    }
    if (parts.size() != 1) throw std::invalid_argument("':' only allowed in pwpoly");
    const std::vector<double> a = nums(head, 1);
    auto need = [&](size_t n) {
        if (a.size() != n)
            throw std::invalid_argument(kind + " takes " + std::to_string(n) + " numbers");
    };
    if (kind == "const") {
        need(1);
        const double c = a[0];
        return [c](double) { return c; };
    }
    if (kind == "poly") {
        if (a.empty()) throw std::invalid_argument("poly needs coefficients");
        return [a, horner](double t) { return horner(a, t); };
    }
    if (kind == "cos" || kind == "sin" || kind == "exp" || kind == "linear_exp") {
        need(2);
        const double A = a[0], w = a[1];
        if (kind == "cos") return [A, w](double t) { return A * std::cos(w * t); };
        if (kind == "sin") return [A, w](double t) { return A * std::sin(w * t); };
        if (kind == "exp") return [A, w](double t) { return A * std::exp(w * t); };
        return [A, w](double t) { return A * (1 - std::exp(-w * t)); };
    }
    throw std::invalid_argument("unknown coefficient kind '" + kind + "'");
}

qat::LsodeSpec build_spec(const ScenarioConfig& cfg) {
    if (!cfg.preset.empty()) return qat::make_preset(cfg.preset, cfg.params);
    qat::LsodeSpec s;
    s.mass = cfg.params.mass;
    s.hbar = cfg.params.hbar;
    s.label = "custom";
    if (!cfg.f_expr.empty()) s.friction_f = parse_coefficient(cfg.f_expr);
    if (!cfg.w2_expr.empty()) s.omega_sq = parse_coefficient(cfg.w2_expr);
    if (!cfg.lambda_expr.empty()) s.forcing_lambda = parse_coefficient(cfg.lambda_expr);
    s.validate();
    return s;
}

}  // namespace qatlab
