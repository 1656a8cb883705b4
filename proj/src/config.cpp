#include "kinklat/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

namespace kinklat {

using nlohmann::json;

std::uint64_t SplitMix64::next() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double SplitMix64::uniform() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double SplitMix64::normal() noexcept {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

PhaseState random_state(const RandomStateSpec& spec, std::size_t sites, std::uint64_t seed) {
    SplitMix64 rng(seed);
    PhaseState s;
    s.q.resize(sites);
    s.p.resize(sites);
    for (std::size_t i = 0; i < sites; ++i) {
        s.q[i] = -static_cast<double>(i) * spec.spacing + spec.q_low + (spec.q_high - spec.q_low) * rng.uniform();
    }
    for (std::size_t i = 0; i < sites; ++i) s.p[i] = spec.p_sigma * rng.normal();
    return s;
}

namespace {

void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& item : obj.items()) {
        if (!ok.count(item.key())) throw ConfigError(where + ": unknown key '" + item.key() + "'");
    }
}

double real_at(const json& obj, const char* key, const std::string& where) {
    const json& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(where + "." + key + ": must be finite");
    return x;
}

std::size_t count_at(const json& obj, const char* key, const std::string& where) {
    const json& v = obj.at(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
        throw ConfigError(where + "." + key + ": expected a non-negative integer");
    }
    return v.get<std::size_t>();
}

std::vector<double> reals(const json& v, const std::string& where) {
    if (!v.is_array()) throw ConfigError(where + ": expected an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number()) throw ConfigError(where + ": expected an array of numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

InteractionSpec terms_from(const json& v, const std::string& where) {
    if (!v.is_array()) throw ConfigError(where + ": expected an array of {beta, k}");
    InteractionSpec spec;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string at = where + "[" + std::to_string(i) + "]";
        only_keys(v[i], at, {"beta", "k"});
        if (!v[i].contains("beta") || !v[i].contains("k")) throw ConfigError(at + ": needs beta and k");
        spec.terms.push_back({real_at(v[i], "beta", at), real_at(v[i], "k", at)});
    }
    return spec;
}

void parse_model(const json& m, RunConfig& cfg) {
    only_keys(m, "model", {"sites", "boundary", "kink_mode", "n_max", "terms", "per_bond"});
    if (!m.contains("sites")) throw ConfigError("model.sites is required");
    cfg.model.sites = count_at(m, "sites", "model");
    if (m.contains("boundary")) {
        const std::string b = m.at("boundary").is_string() ? m.at("boundary").get<std::string>() : "";
        if (b == "open") {
            cfg.model.boundary = Boundary::open;
        } else if (b == "periodic") {
            cfg.model.boundary = Boundary::periodic;
        } else {
            throw ConfigError("model.boundary: expected \"open\" or \"periodic\"");
        }
    }
    const int sources = static_cast<int>(m.contains("n_max")) + static_cast<int>(m.contains("terms")) +
                        static_cast<int>(m.contains("per_bond"));
    if (sources != 1) throw ConfigError("model: give exactly one of n_max, terms, per_bond");
    if (m.contains("n_max")) {
        const json& n = m.at("n_max");
        if (!n.is_number_integer() || n.get<std::int64_t>() < 1 || n.get<std::int64_t>() > 50) {
            throw ConfigError("model.n_max: expected an integer in 1..50");
        }
        cfg.n_max = n.get<int>();
        cfg.model.interaction = kink_interaction_spec(*cfg.n_max);
        cfg.model.kink_mode = true;
    } else if (m.contains("terms")) {
        cfg.model.interaction = terms_from(m.at("terms"), "model.terms");
    } else {
        const json& pb = m.at("per_bond");
        if (!pb.is_array() || pb.empty()) throw ConfigError("model.per_bond: expected a nonempty array");
        std::vector<InteractionSpec> bonds;
        for (std::size_t j = 0; j < pb.size(); ++j) {
            bonds.push_back(terms_from(pb[j], "model.per_bond[" + std::to_string(j) + "]"));
        }
        cfg.model.interaction = bonds.front();
        cfg.model.per_bond = std::move(bonds);
    }
    if (m.contains("kink_mode")) {
        if (!m.at("kink_mode").is_boolean()) throw ConfigError("model.kink_mode: expected true or false");
        cfg.model.kink_mode = m.at("kink_mode").get<bool>();
    }
}

void check_model(const RunConfig& cfg) {
    const auto problems = validate(cfg.model);
    if (!problems.empty()) {
        std::string msg = "model:";
        for (const auto& p : problems) msg += " " + p + ";";
        throw ConfigError(msg);
    }
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    only_keys(doc, "config", {"model", "state", "random", "integration", "outputs", "seed", "lambda"});
    RunConfig cfg;
    try {
        if (!doc.contains("model")) throw ConfigError("config.model is required");
        parse_model(doc.at("model"), cfg);

        if (doc.contains("state") == doc.contains("random")) {
            throw ConfigError("config: give exactly one of state, random");
        }
        if (doc.contains("state")) {
            const json& s = doc.at("state");
            only_keys(s, "state", {"q", "p"});
            if (!s.contains("q") || !s.contains("p")) throw ConfigError("state: needs q and p");
            cfg.state = PhaseState{reals(s.at("q"), "state.q"), reals(s.at("p"), "state.p")};
            if (cfg.state->q.size() != cfg.model.sites || cfg.state->p.size() != cfg.model.sites) {
                throw ConfigError("state: q and p need one entry per site");
            }
        } else {
            const json& r = doc.at("random");
            only_keys(r, "random", {"q_box", "p_sigma", "spacing"});
            RandomStateSpec spec;
            if (r.contains("q_box")) {
                const auto box = reals(r.at("q_box"), "random.q_box");
                if (box.size() != 2 || !(box[0] <= box[1])) {
                    throw ConfigError("random.q_box: expected [low, high] with low <= high");
                }
                spec.q_low = box[0];
                spec.q_high = box[1];
            }
            if (r.contains("p_sigma")) spec.p_sigma = real_at(r, "p_sigma", "random");
            if (r.contains("spacing")) spec.spacing = real_at(r, "spacing", "random");
            if (spec.p_sigma < 0.0) throw ConfigError("random.p_sigma: must be >= 0");
            cfg.random = spec;
        }

        if (doc.contains("integration")) {
            const json& in = doc.at("integration");
            only_keys(in, "integration", {"scheme", "dt", "steps", "sample_every"});
            if (in.contains("scheme")) {
                if (!in.at("scheme").is_string()) throw ConfigError("integration.scheme: expected a string");
                try {
                    cfg.integration.scheme = scheme_from_string(in.at("scheme").get<std::string>());
                } catch (const std::invalid_argument& e) {
                    throw ConfigError(std::string("integration.scheme: ") + e.what());
                }
            }
            if (in.contains("dt")) cfg.integration.dt = real_at(in, "dt", "integration");
            if (in.contains("steps")) cfg.integration.steps = count_at(in, "steps", "integration");
            if (in.contains("sample_every")) {
                cfg.integration.sample_every = count_at(in, "sample_every", "integration");
            }
        }
        if (!(cfg.integration.dt > 0.0)) throw ConfigError("integration.dt: must be positive");
        if (cfg.integration.steps == 0) throw ConfigError("integration.steps: must be at least 1");
        if (cfg.integration.sample_every == 0) throw ConfigError("integration.sample_every: must be at least 1");

        if (doc.contains("outputs")) {
            const json& o = doc.at("outputs");
            only_keys(o, "outputs", {"dir"});
            if (o.contains("dir")) {
                if (!o.at("dir").is_string()) throw ConfigError("outputs.dir: expected a string");
                cfg.output_dir = o.at("dir").get<std::string>();
            }
        }
        if (doc.contains("seed")) {
            const json& s = doc.at("seed");
            if (!s.is_number_unsigned()) throw ConfigError("seed: expected an unsigned 64-bit integer");
            cfg.seed = s.get<std::uint64_t>();
        }
        if (doc.contains("lambda")) {
            cfg.lambda = real_at(doc, "lambda", "config");
            if (*cfg.lambda == 0.0) throw ConfigError("lambda: must be nonzero");
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    check_model(cfg);
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void apply_terms_override(RunConfig& cfg, int n_max) {
    if (n_max < 1 || n_max > 50) throw ConfigError("--terms: expected an integer in 1..50");
    cfg.n_max = n_max;
    cfg.model.interaction = kink_interaction_spec(n_max);
    cfg.model.per_bond.reset();
    cfg.model.kink_mode = true;
    check_model(cfg);
}

PhaseState initial_state(const RunConfig& cfg) {
    if (cfg.state) return *cfg.state;
    return random_state(cfg.random.value_or(RandomStateSpec{}), cfg.model.sites, cfg.seed);
}

}  // namespace kinklat
