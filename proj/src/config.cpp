#include "vdreg/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "vdreg/errors.hpp"

namespace vdreg {

using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("invalid numeric value for " + key + ": '" + v + "'");
    }
}

int to_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long x = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return static_cast<int>(x);
    } catch (const std::exception&) {
        throw ConfigError("invalid integer value for " + key + ": '" + v + "'");
    }
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const unsigned long long x = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("invalid seed value for " + key + ": '" + v + "'");
    }
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
    if (v == "off" || v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("invalid boolean value for " + key + ": '" + v + "'");
}

std::vector<std::string> split_csv_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const std::string t = trim(item);
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

}  // namespace

std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key = value");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

void RunConfig::apply_file_values(const std::map<std::string, std::string>& kv) {
    const std::map<std::string, std::function<void(const std::string&, const std::string&)>> setters = {
        {"data", [&](const std::string&, const std::string& v) { data = v; }},
        {"queries", [&](const std::string&, const std::string& v) { queries = v; }},
        {"fit", [&](const std::string&, const std::string& v) { fit_dir = v; }},
        {"out", [&](const std::string&, const std::string& v) { out = v; }},
        {"response", [&](const std::string&, const std::string& v) { response = v; }},
        {"na-token", [&](const std::string&, const std::string& v) { na_token = v; }},
        {"kinds", [&](const std::string&, const std::string& v) { kinds = v; }},
        {"model", [&](const std::string&, const std::string& v) { model = v; }},
        {"iters", [&](const std::string& k, const std::string& v) { iters = to_int(k, v); }},
        {"burn", [&](const std::string& k, const std::string& v) { burn = to_int(k, v); }},
        {"thin", [&](const std::string& k, const std::string& v) { thin = to_int(k, v); }},
        {"n-aux", [&](const std::string& k, const std::string& v) { n_aux = to_int(k, v); }},
        {"seed",
         [&](const std::string& k, const std::string& v) {
             seed = to_u64(k, v);
             seed_set = true;
         }},
        {"mass", [&](const std::string& k, const std::string& v) { mass = to_double(k, v); }},
        {"prior-only", [&](const std::string& k, const std::string& v) { prior_only = to_bool(k, v); }},
        {"sim-a", [&](const std::string& k, const std::string& v) { sim_a = to_double(k, v); }},
        {"sim-b", [&](const std::string& k, const std::string& v) { sim_b = to_double(k, v); }},
        {"sim-c", [&](const std::string& k, const std::string& v) { sim_c = to_double(k, v); }},
        {"sim-alpha0", [&](const std::string& k, const std::string& v) { sim_alpha0 = to_double(k, v); }},
        {"sim-beta0", [&](const std::string& k, const std::string& v) { sim_beta0 = to_double(k, v); }},
        {"cat-sim", [&](const std::string&, const std::string& v) { cat_sim = v; }},
        {"cat-alpha", [&](const std::string& k, const std::string& v) { cat_alpha = to_double(k, v); }},
        {"vdreg-m0", [&](const std::string& k, const std::string& v) { vdreg_m0 = to_double(k, v); }},
        {"vdreg-kappa0", [&](const std::string& k, const std::string& v) { vdreg_kappa0 = to_double(k, v); }},
        {"vdreg-a0", [&](const std::string& k, const std::string& v) { vdreg_a0 = to_double(k, v); }},
        {"vdreg-b0", [&](const std::string& k, const std::string& v) { vdreg_b0 = to_double(k, v); }},
        {"vdlreg-m0", [&](const std::string& k, const std::string& v) { vdlreg_m0 = to_double(k, v); }},
        {"vdlreg-v0", [&](const std::string& k, const std::string& v) { vdlreg_v0 = to_double(k, v); }},
        {"vdlreg-a0", [&](const std::string& k, const std::string& v) { vdlreg_a0 = to_double(k, v); }},
        {"vdlreg-b0", [&](const std::string& k, const std::string& v) { vdlreg_b0 = to_double(k, v); }},
        {"dl-a", [&](const std::string& k, const std::string& v) { dl_a = to_double(k, v); }},
        {"include-new-cluster", [&](const std::string& k, const std::string& v) { include_new_cluster = to_bool(k, v); }},
        {"new-cluster-mc", [&](const std::string& k, const std::string& v) { new_cluster_mc = to_int(k, v); }},
        {"ygrid", [&](const std::string&, const std::string& v) { ygrid = v; }},
        {"reps", [&](const std::string& k, const std::string& v) { reps = to_int(k, v); }},
        {"sigma-sim", [&](const std::string& k, const std::string& v) { sigma_sim = to_double(k, v); }},
        {"x2-mode", [&](const std::string&, const std::string& v) { x2_mode = v; }},
        {"methods", [&](const std::string&, const std::string& v) { methods = v; }},
        {"test-fraction", [&](const std::string& k, const std::string& v) { test_fraction = to_double(k, v); }},
        {"keep-datasets", [&](const std::string& k, const std::string& v) { keep_datasets = to_bool(k, v); }},
        {"jobs", [&](const std::string& k, const std::string& v) { jobs = to_int(k, v); }},
    };
    for (const auto& [key, value] : kv) {
        const auto it = setters.find(key);
        if (it == setters.end()) throw ConfigError("unknown config key '" + key + "'");
        it->second(key, value);
    }
}

void RunConfig::validate() const {
    if (!seed_set) throw ConfigError("a seed is required (wall-clock seeding is not supported)");
    if (!model_from_string(model)) throw ConfigError("model must be vdreg or vdlreg");
    if (mass <= 0.0) throw ConfigError("mass must be positive");
    if (cat_sim != "mode" && cat_sim != "dirichlet") throw ConfigError("cat-sim must be mode or dirichlet");
    if (x2_mode != "literal" && x2_mode != "centered") throw ConfigError("x2-mode must be literal or centered");
    if (new_cluster_mc < 1) throw ConfigError("new-cluster-mc must be >= 1");
    if (jobs < 1) throw ConfigError("jobs must be >= 1");
    mcmc_config().validate();
    if (!kinds.empty())
        for (const auto& k : split_csv_list(kinds))
            if (!cov_kind_from_string(k)) throw ConfigError("unknown covariate kind '" + k + "'");
    method_list();
}

std::map<std::string, std::string> RunConfig::as_map() const {
    std::map<std::string, std::string> m;
    // the output directory is where bytes land, not part of what they are,
    // so it stays out of the reproduction record
    m["subcommand"] = subcommand;
    m["data"] = data;
    m["queries"] = queries;
    m["fit"] = fit_dir;
    m["response"] = response;
    m["na-token"] = na_token;
    m["kinds"] = kinds;
    m["model"] = model;
    m["iters"] = std::to_string(iters);
    m["burn"] = std::to_string(burn);
    m["thin"] = std::to_string(thin);
    m["n-aux"] = std::to_string(n_aux);
    m["seed"] = std::to_string(seed);
    m["mass"] = format_double(mass);
    m["prior-only"] = prior_only ? "on" : "off";
    m["sim-a"] = format_double(sim_a);
    m["sim-b"] = format_double(sim_b);
    m["sim-c"] = format_double(sim_c);
    m["sim-alpha0"] = format_double(sim_alpha0);
    m["sim-beta0"] = format_double(sim_beta0);
    m["cat-sim"] = cat_sim;
    m["cat-alpha"] = format_double(cat_alpha);
    m["vdreg-m0"] = format_double(vdreg_m0);
    m["vdreg-kappa0"] = format_double(vdreg_kappa0);
    m["vdreg-a0"] = format_double(vdreg_a0);
    m["vdreg-b0"] = format_double(vdreg_b0);
    m["vdlreg-m0"] = format_double(vdlreg_m0);
    m["vdlreg-v0"] = format_double(vdlreg_v0);
    m["vdlreg-a0"] = format_double(vdlreg_a0);
    m["vdlreg-b0"] = format_double(vdlreg_b0);
    m["dl-a"] = format_double(dl_a);
    m["include-new-cluster"] = include_new_cluster ? "on" : "off";
    m["new-cluster-mc"] = std::to_string(new_cluster_mc);
    m["ygrid"] = ygrid;
    m["reps"] = std::to_string(reps);
    m["sigma-sim"] = format_double(sigma_sim);
    m["x2-mode"] = x2_mode;
    m["methods"] = methods;
    m["test-fraction"] = format_double(test_fraction);
    m["keep-datasets"] = keep_datasets ? "on" : "off";
    m["jobs"] = std::to_string(jobs);
    return m;
}

CsvSchema RunConfig::csv_schema() const {
    CsvSchema s;
    s.response = response;
    s.na_token = na_token;
    if (!kinds.empty()) {
        for (const auto& k : split_csv_list(kinds)) {
            const auto kind = cov_kind_from_string(k);
            if (!kind) throw ConfigError("unknown covariate kind '" + k + "'");
            s.kinds.push_back(*kind);
        }
    }
    return s;
}

McmcConfig RunConfig::mcmc_config() const {
    McmcConfig c;
    c.iterations = iters;
    c.burn_in = burn;
    c.thin = thin;
    c.n_aux = n_aux;
    c.seed = seed;
    c.model = model_from_string(model).value_or(ModelKind::vdreg);
    c.prior_only = prior_only;
    return c;
}

CohesionConfig RunConfig::cohesion_config() const {
    return CohesionConfig{mass};
}

OutcomePriors RunConfig::outcome_priors() const {
    OutcomePriors pr;
    pr.vdreg = VdregPriors{vdreg_m0, vdreg_kappa0, vdreg_a0, vdreg_b0};
    pr.vdlreg = VdlregPriors{vdlreg_m0, vdlreg_v0, vdlreg_a0, vdlreg_b0, dl_a};
    return pr;
}

SimilarityConfig RunConfig::similarity_config(int p) const {
    SimilarityConfig cfg = SimilarityConfig::defaults(p);
    for (auto& g : cfg.gauss) g = GaussianSimHyper{sim_a, sim_b, sim_c};
    for (auto& b : cfg.binary) b = BinarySimHyper{sim_alpha0, sim_beta0};
    cfg.cat_sim = cat_sim == "dirichlet" ? CategoricalSim::dirichlet_multinomial : CategoricalSim::mode_frequency;
    cfg.cat_alpha = cat_alpha;
    cfg.validate();
    return cfg;
}

SimConfig RunConfig::sim_config() const {
    SimConfig c;
    c.sigma_sim = sigma_sim;
    c.replicates = reps;
    c.test_fraction = test_fraction;
    c.base_seed = seed;
    c.x2_mode = x2_mode == "centered" ? X2Mode::centered : X2Mode::literal;
    return c;
}

std::vector<Method> RunConfig::method_list() const {
    std::vector<Method> out;
    for (const auto& name : split_csv_list(methods)) {
        const auto m = method_from_string(name);
        if (!m) throw ConfigError("unknown method '" + name + "'");
        out.push_back(*m);
    }
    if (out.empty()) throw ConfigError("no methods selected");
    return out;
}

std::string config_hash(const RunConfig& cfg) {
    std::string canonical;
    for (const auto& [k, v] : cfg.as_map()) {
        canonical += k;
        canonical += '=';
        canonical += v;
        canonical += '\n';
    }
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : canonical) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_manifest(const RunConfig& cfg, const std::string& path) {
    json j;
    j["version"] = kVersion;
    j["config_hash"] = config_hash(cfg);
    j["config"] = cfg.as_map();
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << j.dump(2) << '\n';
}

RunConfig read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open manifest " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("malformed manifest " + path + ": " + e.what());
    }
    RunConfig cfg;
    std::map<std::string, std::string> kv = j.at("config").get<std::map<std::string, std::string>>();
    cfg.subcommand = kv["subcommand"];
    kv.erase("subcommand");
    cfg.apply_file_values(kv);
    return cfg;
}

}  // namespace vdreg
