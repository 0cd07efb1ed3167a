#include "epictrl/scenario.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

namespace epictrl {

RunMode run_mode_from_string(const std::string& name) {
    if (name == "simulate") return RunMode::Simulate;
    if (name == "optimize") return RunMode::Optimize;
    if (name == "kappa-continuation") return RunMode::KappaContinuation;
    if (name == "horizon-continuation") return RunMode::HorizonContinuation;
    if (name == "sweep") return RunMode::Sweep;
    if (name == "final-size") return RunMode::FinalSize;
    throw ValidationError("unknown mode '" + name + "'");
}

std::string to_string(RunMode mode) {
    switch (mode) {
        case RunMode::Simulate: return "simulate";
        case RunMode::Optimize: return "optimize";
        case RunMode::KappaContinuation: return "kappa-continuation";
        case RunMode::HorizonContinuation: return "horizon-continuation";
        case RunMode::Sweep: return "sweep";
        case RunMode::FinalSize: return "final-size";
    }
    return "?";
}

SweepParameter sweep_parameter_from_string(const std::string& name) {
    if (name == "beta") return SweepParameter::Beta;
    if (name == "u_max") return SweepParameter::UMax;
    if (name == "h_max") return SweepParameter::HMax;
    if (name == "t_delay_u") return SweepParameter::TDelayU;
    if (name == "t_delay_h") return SweepParameter::TDelayH;
    if (name == "kappa") return SweepParameter::Kappa;
    if (name == "i_max") return SweepParameter::IMax;
    throw ValidationError("unknown sweep parameter '" + name + "'");
}

std::string to_string(SweepParameter p) {
    switch (p) {
        case SweepParameter::Beta: return "beta";
        case SweepParameter::UMax: return "u_max";
        case SweepParameter::HMax: return "h_max";
        case SweepParameter::TDelayU: return "t_delay_u";
        case SweepParameter::TDelayH: return "t_delay_h";
        case SweepParameter::Kappa: return "kappa";
        case SweepParameter::IMax: return "i_max";
    }
    return "?";
}

std::string to_string(SweepMode m) {
    return m == SweepMode::Simulate ? "simulate" : "optimize";
}

std::string to_string(SingularPolicy p) {
    return p == SingularPolicy::Midpoint ? "midpoint" : "boundary-feedback";
}

namespace {

struct RawValue {
    std::string text;       // scalar or list as written
    int line = 0;           // 0 for JSON input
    bool consumed = false;
};

// Flat key/value view of a scenario file with consumption tracking, so any
// key the schema never asks for is reported as unknown.
class KeyStore {
public:
    explicit KeyStore(std::string origin) : origin_(std::move(origin)) {}

    void insert(const std::string& key, std::string value, int line) {
        if (map_.count(key))
            throw ValidationError(origin_ + ": duplicate key '" + key + "'" + at(line));
        map_[key] = RawValue{std::move(value), line, false};
    }

    bool has(const std::string& key) const { return map_.count(key) != 0; }

    std::string get_string(const std::string& key) {
        auto& rv = require(key);
        rv.consumed = true;
        return rv.text;
    }

    double get_double(const std::string& key) {
        auto& rv = require(key);
        rv.consumed = true;
        return parse_double(rv.text, key, rv.line);
    }

    double get_double_or(const std::string& key, double fallback) {
        if (!has(key)) return fallback;
        return get_double(key);
    }

    std::string get_string_or(const std::string& key, const std::string& fallback) {
        if (!has(key)) return fallback;
        return get_string(key);
    }

    std::uint64_t get_uint_or(const std::string& key, std::uint64_t fallback) {
        if (!has(key)) return fallback;
        const double v = get_double(key);
        if (v < 0.0 || std::floor(v) != v)
            throw ValidationError(origin_ + ": key '" + key + "' must be a nonnegative integer");
        return static_cast<std::uint64_t>(v);
    }

    std::vector<double> get_list(const std::string& key) {
        auto& rv = require(key);
        rv.consumed = true;
        std::vector<double> out;
        std::string norm = rv.text;
        for (auto& c : norm)
            if (c == ',') c = ' ';
        std::istringstream in(norm);
        std::string tok;
        while (in >> tok) out.push_back(parse_double(tok, key, rv.line));
        if (out.empty())
            throw ValidationError(origin_ + ": key '" + key + "' needs at least one number");
        return out;
    }

    void finish() const {
        for (const auto& [key, rv] : map_)
            if (!rv.consumed)
                throw ValidationError(origin_ + ": unknown key '" + key + "'" + at(rv.line));
    }

    const std::string& origin() const { return origin_; }

private:
    RawValue& require(const std::string& key) {
        auto it = map_.find(key);
        if (it == map_.end())
            throw ValidationError(origin_ + ": missing required key '" + key + "'");
        return it->second;
    }

    double parse_double(const std::string& text, const std::string& key, int line) const {
        try {
            std::size_t used = 0;
            const double v = std::stod(text, &used);
            if (used != text.size()) throw std::invalid_argument("trailing characters");
            return v;
        } catch (const std::exception&) {
            throw ValidationError(origin_ + ": key '" + key + "' has non-numeric value '" +
                                  text + "'" + at(line));
        }
    }

    static std::string at(int line) {
        return line > 0 ? " (line " + std::to_string(line) + ")" : "";
    }

    std::string origin_;
    std::map<std::string, RawValue> map_;
};

std::string strip(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

KeyStore tokenize_text(const std::string& text, const std::string& origin) {
    KeyStore store(origin);
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        std::string line = strip(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError(origin + ": expected 'key = value' (line " +
                                  std::to_string(line_no) + "): " + line);
        const std::string key = strip(line.substr(0, eq));
        const std::string value = strip(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ValidationError(origin + ": empty key or value (line " +
                                  std::to_string(line_no) + ")");
        store.insert(key, value, line_no);
    }
    return store;
}

void flatten_json(const nlohmann::json& node, const std::string& prefix, KeyStore& store) {
    if (node.is_object()) {
        for (const auto& [key, child] : node.items()) {
            const std::string full = prefix.empty() ? key : prefix + "." + key;
            flatten_json(child, full, store);
        }
        return;
    }
    if (node.is_array()) {
        std::string joined;
        for (const auto& v : node) {
            if (!v.is_number())
                throw ValidationError(store.origin() + ": array '" + prefix +
                                      "' must contain numbers only");
            if (!joined.empty()) joined += ' ';
            joined += nlohmann::json(v).dump();
        }
        store.insert(prefix, joined, 0);
        return;
    }
    if (node.is_string()) {
        store.insert(prefix, node.get<std::string>(), 0);
        return;
    }
    if (node.is_boolean()) {
        store.insert(prefix, node.get<bool>() ? "1" : "0", 0);
        return;
    }
    if (node.is_number()) {
        store.insert(prefix, node.dump(), 0);
        return;
    }
    throw ValidationError(store.origin() + ": unsupported value type at '" + prefix + "'");
}

Scenario build_scenario(KeyStore& store) {
    Scenario sc;
    sc.mode = run_mode_from_string(store.get_string("mode"));
    sc.horizon = store.get_double("horizon");
    sc.dt = store.get_double_or("dt", 0.01);
    sc.seed = store.get_uint_or("seed", 0);

    sc.model.beta = store.get_double("model.beta");
    sc.model.sigma = store.get_double("model.sigma");
    sc.model.gamma = store.get_double("model.gamma");
    sc.model.u_max = store.get_double("model.u_max");
    sc.model.h_max = store.get_double("model.h_max");
    sc.model.t_delay_u = store.get_double_or("model.t_delay_u", 0.0);
    sc.model.t_delay_h = store.get_double_or("model.t_delay_h", 0.0);
    sc.model.i_max = store.get_double("model.i_max");

    sc.initial.s = store.get_double("initial.s");
    sc.initial.e = store.get_double("initial.e");
    sc.initial.i = store.get_double("initial.i");
    sc.initial.r = store.get_double("initial.r");

    sc.cost.c_h = store.get_double_or("cost.c_h", 1.0);
    sc.cost.c_nh = store.get_double_or("cost.c_nh", 1.0);
    sc.cost.c_v = store.get_double_or("cost.c_v", 0.5);
    sc.cost.delta = store.get_double_or("cost.delta", 0.05);
    sc.cost.kappa = store.get_double_or("cost.kappa", 0.0);

    sc.solver.max_iters = static_cast<int>(store.get_uint_or("solver.max_iters", 200));
    sc.solver.damping = store.get_double_or("solver.damping", 0.5);
    sc.solver.conv_tol = store.get_double_or("solver.conv_tol", 1e-5);
    sc.solver.sing_tol = store.get_double_or("solver.sing_tol", 1e-8);
    const std::string policy = store.get_string_or("solver.singular_policy", "midpoint");
    if (policy == "midpoint")
        sc.solver.singular_policy = SingularPolicy::Midpoint;
    else if (policy == "boundary-feedback")
        sc.solver.singular_policy = SingularPolicy::BoundaryFeedback;
    else
        throw ValidationError("unknown singular_policy '" + policy + "'");

    if (store.has("schedule.u") || store.has("schedule.h")) {
        const double sdt = store.get_double_or("schedule.dt", sc.dt);
        const double st0 = store.get_double_or("schedule.t0", 0.0);
        if (!(sdt > 0.0)) throw ValidationError("schedule.dt must be positive");
        const auto cells = static_cast<std::size_t>(std::round(sc.horizon / sdt));
        auto expand = [&](const char* key) {
            if (!store.has(key)) return std::vector<double>(cells, 0.0);
            std::vector<double> vals = store.get_list(key);
            if (vals.size() == 1) return std::vector<double>(cells, vals[0]);
            if (vals.size() != cells)
                throw ValidationError(std::string(key) + " has " + std::to_string(vals.size()) +
                                      " values; expected " + std::to_string(cells) +
                                      " cells for horizon/schedule.dt");
            return vals;
        };
        sc.schedule = ControlSchedule(st0, sdt, expand("schedule.u"), expand("schedule.h"));
    }

    if (store.has("kappa_ladder")) sc.kappa_ladder = store.get_list("kappa_ladder");
    if (store.has("t_ladder")) sc.t_ladder = store.get_list("t_ladder");

    if (store.has("sweep.parameter")) {
        const std::string pname = store.get_string("sweep.parameter");
        const std::string smode = store.get_string_or("sweep.mode", "simulate");
        const SweepMode mode =
            smode == "optimize" ? SweepMode::Optimize
                                : (smode == "simulate"
                                       ? SweepMode::Simulate
                                       : throw ValidationError("unknown sweep.mode '" + smode +
                                                               "'"));
        if (pname == "random") {
            sc.random_sweep.enabled = true;
            auto& d = sc.random_sweep.design;
            d.mode = mode;
            d.samples = static_cast<int>(store.get_uint_or("sweep.samples", 64));
            d.seed = sc.seed;
            d.beta_range = {store.get_double_or("sweep.beta_lo", d.beta_range.first),
                            store.get_double_or("sweep.beta_hi", d.beta_range.second)};
            d.u_max_range = {store.get_double_or("sweep.u_max_lo", d.u_max_range.first),
                             store.get_double_or("sweep.u_max_hi", d.u_max_range.second)};
            d.h_max_range = {store.get_double_or("sweep.h_max_lo", d.h_max_range.first),
                             store.get_double_or("sweep.h_max_hi", d.h_max_range.second)};
        } else {
            SweepSpec spec;
            spec.parameter = sweep_parameter_from_string(pname);
            spec.mode = mode;
            if (store.has("sweep.values")) {
                spec.values = store.get_list("sweep.values");
            } else {
                const double lo = store.get_double("sweep.lo");
                const double hi = store.get_double("sweep.hi");
                const auto count = store.get_uint_or("sweep.count", 5);
                if (count < 2 || !(hi > lo))
                    throw ValidationError("sweep grid needs hi > lo and count >= 2");
                for (std::uint64_t k = 0; k < count; ++k)
                    spec.values.push_back(lo + (hi - lo) * static_cast<double>(k) /
                                                    static_cast<double>(count - 1));
            }
            sc.sweep = std::move(spec);
        }
    }

    store.finish();
    sc.validate();
    return sc;
}

} // namespace

void Scenario::validate() const {
    model.validate();
    cost.validate();
    initial.validate();
    solver.validate();
    if (!(horizon > 0.0)) throw ValidationError("horizon must be positive");
    if (!(dt > 0.0)) throw ValidationError("dt must be positive");
    const double steps = horizon / dt;
    if (std::abs(steps - std::round(steps)) > 1e-9)
        throw ValidationError("dt must divide horizon");

    if (schedule) {
        const double ratio = schedule->dt() / dt;
        if (std::abs(ratio - std::round(ratio)) > 1e-9 || ratio < 1.0 - 1e-12)
            throw ValidationError("schedule grid step must be a multiple of dt");
        if (schedule->t0() != 0.0)
            throw ValidationError("schedule must start at t = 0");
        if (schedule->end_time() < horizon - 1e-9)
            throw ValidationError("schedule must span the horizon");
        schedule->validate_admissible(model);
    }

    if (mode == RunMode::Sweep) {
        if (!sweep && !random_sweep.enabled)
            throw ValidationError("sweep mode requires a sweep section");
        if (sweep) {
            for (double v : sweep->values) {
                ModelParams m = model;
                CostParams c = cost;
                switch (sweep->parameter) {
                    case SweepParameter::Beta: m.beta = v; break;
                    case SweepParameter::UMax: m.u_max = v; break;
                    case SweepParameter::HMax: m.h_max = v; break;
                    case SweepParameter::TDelayU: m.t_delay_u = v; break;
                    case SweepParameter::TDelayH: m.t_delay_h = v; break;
                    case SweepParameter::Kappa: c.kappa = v; break;
                    case SweepParameter::IMax: m.i_max = v; break;
                }
                m.validate();
                c.validate();
            }
        }
        if (random_sweep.enabled) {
            const auto& d = random_sweep.design;
            if (!(d.h_max_range.second < d.beta_range.first))
                throw ValidationError("random sweep ranges must keep h_max < beta "
                                      "(h_max_hi must stay below beta_lo)");
        }
    }
    if (mode == RunMode::KappaContinuation) {
        if (kappa_ladder.empty()) throw ValidationError("kappa ladder must be nonempty");
        for (std::size_t k = 1; k < kappa_ladder.size(); ++k)
            if (!(kappa_ladder[k] > kappa_ladder[k - 1]))
                throw ValidationError("kappa ladder must be strictly increasing");
    }
    if (mode == RunMode::HorizonContinuation) {
        if (t_ladder.empty()) throw ValidationError("horizon ladder must be nonempty");
        for (std::size_t k = 1; k < t_ladder.size(); ++k)
            if (!(t_ladder[k] > t_ladder[k - 1]))
                throw ValidationError("horizon ladder must be strictly increasing");
        for (double T : t_ladder) {
            const double steps_T = T / dt;
            if (std::abs(steps_T - std::round(steps_T)) > 1e-9)
                throw ValidationError("every ladder horizon must be a multiple of dt");
        }
    }
    if (mode == RunMode::FinalSize && model.t_delay_h > 0.0)
        throw ValidationError("final-size mode assumes suppression active from t = 0 "
                              "(t_delay_h must be 0)");
}

ControlSchedule Scenario::effective_schedule() const {
    if (schedule) return *schedule;
    const auto cells = static_cast<std::size_t>(std::round(horizon / dt));
    return ControlSchedule::constant(0.0, 0.0, 0.0, dt, cells);
}

PipelineCase Scenario::pipeline_case() const {
    PipelineCase pc;
    pc.x0 = initial;
    pc.model = model;
    pc.cost = cost;
    pc.horizon = horizon;
    pc.dt = dt;
    pc.schedule = effective_schedule();
    pc.solver = solver;
    return pc;
}

Scenario parse_scenario_text(const std::string& text, const std::string& origin) {
    KeyStore store = tokenize_text(text, origin);
    return build_scenario(store);
}

Scenario parse_scenario_json(const std::string& text, const std::string& origin) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& ex) {
        throw ValidationError(origin + ": JSON parse error: " + ex.what());
    }
    if (!doc.is_object()) throw ValidationError(origin + ": top-level JSON must be an object");
    KeyStore store(origin);
    flatten_json(doc, "", store);
    return build_scenario(store);
}

Scenario parse_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open scenario file: " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();

    const auto first = text.find_first_not_of(" \t\r\n");
    const bool looks_json =
        path.extension() == ".json" || (first != std::string::npos && text[first] == '{');
    return looks_json ? parse_scenario_json(text, path.string())
                      : parse_scenario_text(text, path.string());
}

} // namespace epictrl
