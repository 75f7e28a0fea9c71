#include "vdreg/draws_io.hpp"

#include <fstream>

#include <json.hpp>

#include "vdreg/errors.hpp"
#include "vdreg/partition.hpp"

namespace vdreg {

using nlohmann::json;

void write_draws_jsonl(const PosteriorDraws& draws, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    json meta{{"type", "meta"},
              {"model", to_string(draws.model)},
              {"n", draws.n},
              {"p", draws.p},
              {"iterations", draws.iterations},
              {"burn_in", draws.burn_in},
              {"thin", draws.thin},
              {"count", draws.draws.size()}};
    out << meta.dump() << '\n';
    for (const Draw& dr : draws.draws) {
        json rec{{"alloc", dr.alloc}};
        json clusters = json::array();
        for (const ClusterParams& th : dr.params) {
            json c{{"mu", th.mu}, {"sigma2", th.sigma2}};
            if (!th.beta.empty()) c["beta"] = th.beta;
            clusters.push_back(std::move(c));
        }
        rec["clusters"] = std::move(clusters);
        out << rec.dump() << '\n';
    }
}

PosteriorDraws read_draws_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open draws file " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty draws file " + path);

    PosteriorDraws draws;
    try {
        const json meta = json::parse(line);
        const auto model = model_from_string(meta.at("model").get<std::string>());
        if (!model) throw DataError("unknown model in draws file");
        draws.model = *model;
        draws.n = meta.at("n").get<int>();
        draws.p = meta.at("p").get<int>();
        draws.iterations = meta.at("iterations").get<int>();
        draws.burn_in = meta.at("burn_in").get<int>();
        draws.thin = meta.at("thin").get<int>();

        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const json rec = json::parse(line);
            Draw dr;
            dr.alloc = rec.at("alloc").get<std::vector<int>>();
            for (const auto& c : rec.at("clusters")) {
                ClusterParams th;
                th.mu = c.at("mu").get<double>();
                th.sigma2 = c.at("sigma2").get<double>();
                if (c.contains("beta")) th.beta = c.at("beta").get<std::vector<double>>();
                dr.params.push_back(std::move(th));
            }
            draws.draws.push_back(std::move(dr));
        }
    } catch (const json::exception& e) {
        throw DataError("malformed draws file " + path + ": " + e.what());
    }
    return draws;
}

void write_partitions_txt(const PosteriorDraws& draws, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    for (const Draw& dr : draws.draws) out << partition_key(dr.partition()) << '\n';
}

void write_diagnostics_json(const DiagnosticsSummary& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    json j{{"n_draws", s.n_draws},
           {"ess_K", s.degenerate_K ? json(nullptr) : json(s.ess_K)},
           {"ess_mean_sigma2", s.degenerate_sigma2 ? json(nullptr) : json(s.ess_mean_sigma2)},
           {"degenerate_K", s.degenerate_K},
           {"degenerate_sigma2", s.degenerate_sigma2},
           {"accept_beta", s.accept_beta ? json(*s.accept_beta) : json(nullptr)},
           {"accept_logsigma", s.accept_logsigma ? json(*s.accept_logsigma) : json(nullptr)},
           {"seconds", s.seconds}};
    out << j.dump(2) << '\n';
}

}  // namespace vdreg
