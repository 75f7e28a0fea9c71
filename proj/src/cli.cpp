#include "vdreg/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "vdreg/draws_io.hpp"
#include "vdreg/errors.hpp"
#include "vdreg/predict.hpp"

namespace vdreg {

namespace fs = std::filesystem;

namespace {

std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

int guarded(const std::function<void()>& body) {
    try {
        body();
        return 0;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir + ": " + ec.message());
}

struct YGrid {
    double lo = 0.0, hi = 0.0;
    int count = 0;
    std::vector<double> values() const {
        std::vector<double> g(count);
        for (int i = 0; i < count; ++i) g[i] = lo + (hi - lo) * i / (count - 1);
        return g;
    }
};

YGrid parse_ygrid(const std::string& spec) {
    YGrid g;
    std::stringstream ss(spec);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, ':')) parts.push_back(part);
    if (parts.size() != 3) throw ConfigError("ygrid must be lo:hi:count");
    try {
        g.lo = std::stod(parts[0]);
        g.hi = std::stod(parts[1]);
        g.count = std::stoi(parts[2]);
    } catch (const std::exception&) {
        throw ConfigError("ygrid must be lo:hi:count with numeric entries");
    }
    if (g.count < 2 || !(g.hi > g.lo)) throw ConfigError("ygrid needs hi > lo and count >= 2");
    return g;
}

// queries: covariate columns matched to the training schema by name; a
// response column, if present, is ignored
std::vector<PredictiveQuery> load_queries(const std::string& path, const Dataset& train, const std::string& na_token,
                                          const std::string& response) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open query file " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty query file " + path);

    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            const auto a = cell.find_first_not_of(" \t\r");
            const auto b = cell.find_last_not_of(" \t\r");
            header.push_back(a == std::string::npos ? std::string{} : cell.substr(a, b - a + 1));
        }
    }
    std::vector<int> col_of(train.p, -1);
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == response) continue;
        bool known = false;
        for (int j = 0; j < train.p; ++j)
            if (header[c] == train.names[j]) {
                col_of[j] = static_cast<int>(c);
                known = true;
            }
        if (!known) throw ConfigError("query column '" + header[c] + "' does not match the fitted covariates");
    }
    for (int j = 0; j < train.p; ++j)
        if (col_of[j] < 0) throw ConfigError("query file lacks covariate column '" + train.names[j] + "'");

    std::vector<PredictiveQuery> queries;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            const auto a = cell.find_first_not_of(" \t\r");
            const auto b = cell.find_last_not_of(" \t\r");
            cells.push_back(a == std::string::npos ? std::string{} : cell.substr(a, b - a + 1));
        }
        if (line.back() == ',') cells.emplace_back();
        if (cells.size() != header.size())
            throw DataError(path + ":" + std::to_string(line_no) + ": column count mismatch");
        PredictiveQuery q;
        q.x.assign(train.p, std::numeric_limits<double>::quiet_NaN());
        q.r.assign(train.p, 0);
        for (int j = 0; j < train.p; ++j) {
            const std::string& v = cells[col_of[j]];
            if (v == na_token) continue;
            try {
                q.x[j] = std::stod(v);
                q.r[j] = 1;
            } catch (const std::exception&) {
                throw DataError(path + ":" + std::to_string(line_no) + ": non-numeric cell '" + v + "'");
            }
        }
        queries.push_back(std::move(q));
    }
    if (queries.empty()) throw DataError("no query rows in " + path);
    return queries;
}

}  // namespace

int cmd_fit(const RunConfig& cfg) {
    return guarded([&]() {
        cfg.validate();
        if (cfg.data.empty()) throw ConfigError("fit requires --data");
        const Dataset raw = load_csv(cfg.data, cfg.csv_schema());
        const Standardization cov_scale = standardize(raw);
        const ResponseScale y_scale = fit_response_scale(raw);
        const Dataset ready = apply_response_scale(y_scale, apply_standardization(cov_scale, raw));

        const SimilarityConfig sim = cfg.similarity_config(ready.p);
        const PosteriorDraws draws = run_chain(ready, cfg.mcmc_config(), sim, cfg.cohesion_config(), cfg.outcome_priors());

        ensure_out_dir(cfg.out);
        write_draws_jsonl(draws, cfg.out + "/draws.jsonl");
        write_partitions_txt(draws, cfg.out + "/partitions.txt");
        write_diagnostics_json(diagnostics(draws), cfg.out + "/diagnostics.json");
        write_manifest(cfg, cfg.out + "/manifest.json");
        std::printf("fit: %zu draws -> %s\n", draws.draws.size(), cfg.out.c_str());
    });
}

int cmd_predict(const RunConfig& cfg) {
    return guarded([&]() {
        if (cfg.fit_dir.empty()) throw ConfigError("predict requires --fit (a fit output directory)");
        if (cfg.queries.empty()) throw ConfigError("predict requires --queries");
        RunConfig fit_cfg = read_manifest(cfg.fit_dir + "/manifest.json");

        const std::string data_path = cfg.data.empty() ? fit_cfg.data : cfg.data;
        if (data_path.empty()) throw ConfigError("training data path unknown; pass --data");
        const Dataset raw = load_csv(data_path, fit_cfg.csv_schema());
        const Standardization cov_scale = standardize(raw);
        const ResponseScale y_scale = fit_response_scale(raw);
        const Dataset train = apply_response_scale(y_scale, apply_standardization(cov_scale, raw));

        const PosteriorDraws draws = read_draws_jsonl(cfg.fit_dir + "/draws.jsonl");
        if (draws.n != train.n || draws.p != train.p)
            throw ConfigError("draws file does not match the training data dimensions");

        PredictContext ctx;
        ctx.sim = fit_cfg.similarity_config(train.p);
        ctx.coh = fit_cfg.cohesion_config();
        ctx.priors = fit_cfg.outcome_priors();
        ctx.cov_scale = cov_scale;
        ctx.y_scale = y_scale;
        ctx.include_new_cluster = cfg.include_new_cluster;
        ctx.new_cluster_mc = cfg.new_cluster_mc;
        ctx.seed = cfg.seed_set ? cfg.seed : fit_cfg.seed;

        const auto queries = load_queries(cfg.queries, train, fit_cfg.na_token, fit_cfg.response);
        Predictor predictor(train, draws, ctx);

        ensure_out_dir(cfg.out);
        {
            std::ofstream out(cfg.out + "/predictions.csv");
            if (!out) throw DataError("cannot write " + cfg.out + "/predictions.csv");
            out << "query,prediction\n";
            for (std::size_t i = 0; i < queries.size(); ++i)
                out << i << ',' << format_double(predictor.predictive_mean(queries[i])) << '\n';
        }
        if (!cfg.ygrid.empty()) {
            const YGrid grid = parse_ygrid(cfg.ygrid);
            const auto ys = grid.values();
            std::ofstream out(cfg.out + "/densities.csv");
            if (!out) throw DataError("cannot write " + cfg.out + "/densities.csv");
            out << "query,y,density\n";
            for (std::size_t i = 0; i < queries.size(); ++i) {
                const auto dens = predictor.predictive_density(queries[i], ys);
                for (std::size_t g = 0; g < ys.size(); ++g)
                    out << i << ',' << format_double(ys[g]) << ',' << format_double(dens[g]) << '\n';
            }
        }
        RunConfig manifest_cfg = cfg;
        manifest_cfg.data = data_path;
        manifest_cfg.seed = ctx.seed;
        manifest_cfg.seed_set = true;
        write_manifest(manifest_cfg, cfg.out + "/manifest.json");
        std::printf("predict: %zu queries -> %s\n", queries.size(), cfg.out.c_str());
    });
}

int cmd_simulate(const RunConfig& cfg) {
    return guarded([&]() {
        cfg.validate();
        const SimConfig sim_cfg = cfg.sim_config();
        const std::vector<Method> methods = cfg.method_list();

        StudySettings settings;
        settings.mcmc = cfg.mcmc_config();
        settings.cohesion = cfg.cohesion_config();
        settings.priors = cfg.outcome_priors();
        settings.jobs = cfg.jobs;

        const StudyResult result = run_study(sim_cfg, methods, settings);

        ensure_out_dir(cfg.out);
        {
            std::ofstream out(cfg.out + "/mspe_replicates.csv");
            if (!out) throw DataError("cannot write " + cfg.out + "/mspe_replicates.csv");
            out << "replicate,method,mspe,error\n";
            for (const auto& rep : result.replicates)
                for (std::size_t m = 0; m < methods.size(); ++m) {
                    out << rep.replicate << ',' << to_string(methods[m]) << ',';
                    if (std::isfinite(rep.mspe[m])) out << format_double(rep.mspe[m]);
                    else out << "NA";
                    out << ',' << rep.errors[m] << '\n';
                }
        }
        {
            std::ofstream out(cfg.out + "/mspe_summary.csv");
            if (!out) throw DataError("cannot write " + cfg.out + "/mspe_summary.csv");
            out << "method,mean_mspe,replicates_ok\n";
            for (std::size_t m = 0; m < methods.size(); ++m) {
                out << to_string(methods[m]) << ',';
                const double mean = result.mean_mspe(static_cast<int>(m));
                if (std::isfinite(mean)) out << format_double(mean);
                else out << "NA";
                out << ',' << result.n_ok(static_cast<int>(m)) << '\n';
            }
        }
        {
            std::ofstream out(cfg.out + "/summary.txt");
            if (!out) throw DataError("cannot write " + cfg.out + "/summary.txt");
            char buf[128];
            out << "MSPE averaged over " << sim_cfg.replicates << " simulated datasets\n";
            for (std::size_t m = 0; m < methods.size(); ++m) {
                const double mean = result.mean_mspe(static_cast<int>(m));
                std::snprintf(buf, sizeof(buf), "  %-8s %10.4f  (%d/%d replicates)\n", to_string(methods[m]).c_str(),
                              mean, result.n_ok(static_cast<int>(m)), sim_cfg.replicates);
                out << buf;
            }
        }
        if (cfg.keep_datasets) {
            ensure_out_dir(cfg.out + "/datasets");
            for (int rep = 0; rep < sim_cfg.replicates; ++rep) {
                const Dataset d = generate_dataset(sim_cfg, derive_seed(sim_cfg.base_seed, "rep/" + std::to_string(rep)));
                save_csv(d, cfg.out + "/datasets/rep_" + std::to_string(rep) + ".csv", cfg.na_token);
            }
        }
        write_manifest(cfg, cfg.out + "/manifest.json");

        for (std::size_t m = 0; m < methods.size(); ++m)
            std::printf("%-8s mean MSPE %.4f (%d/%d ok)\n", to_string(methods[m]).c_str(),
                        result.mean_mspe(static_cast<int>(m)), result.n_ok(static_cast<int>(m)), sim_cfg.replicates);
    });
}

}  // namespace vdreg
