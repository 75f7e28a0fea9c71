#include "vdreg/partition.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace vdreg {

Partition Partition::from_alloc(std::vector<int> labels) {
    Partition p;
    p.alloc = std::move(labels);
    int k_max = -1;
    for (int c : p.alloc) k_max = std::max(k_max, c);
    p.clusters.assign(k_max + 1, {});
    for (int i = 0; i < p.n(); ++i) p.clusters[p.alloc[i]].push_back(i);
    p.sizes.resize(p.clusters.size());
    for (std::size_t k = 0; k < p.clusters.size(); ++k) {
        if (p.clusters[k].empty()) throw std::invalid_argument("Partition::from_alloc: labels are not dense");
        p.sizes[k] = static_cast<int>(p.clusters[k].size());
    }
    return p;
}

bool Partition::consistent() const {
    if (clusters.size() != sizes.size()) return false;
    int total = 0;
    for (std::size_t k = 0; k < clusters.size(); ++k) {
        if (clusters[k].empty() || static_cast<int>(clusters[k].size()) != sizes[k]) return false;
        for (int i : clusters[k]) {
            if (i < 0 || i >= n() || alloc[i] != static_cast<int>(k)) return false;
        }
        total += sizes[k];
    }
    return total == n();
}

double log_cohesion(int size, const CohesionConfig& coh) {
    if (size < 1) throw std::invalid_argument("log_cohesion: empty cluster");
    return std::log(coh.M) + std::lgamma(static_cast<double>(size));
}

double log_ppmx_prior(const Partition& part, const Dataset& d, const SimilarityConfig& cfg, const CohesionConfig& coh) {
    double total = 0.0;
    for (int k = 0; k < part.K(); ++k) {
        total += log_cohesion(part.sizes[k], coh);
        total += log_similarity_cluster(d, part.clusters[k], cfg);
    }
    return total;
}

std::vector<Partition> enumerate_partitions(int n) {
    if (n < 1 || n > 10) throw std::invalid_argument("enumerate_partitions: n must be in [1,10]");
    std::vector<Partition> out;
    std::vector<int> rgs(n, 0);
    // lexicographic iteration over restricted growth strings:
    // rgs[0] = 0, rgs[i] <= 1 + max(rgs[0..i-1])
    for (;;) {
        out.push_back(Partition::from_alloc(rgs));
        int i = n - 1;
        for (; i > 0; --i) {
            int mx = 0;
            for (int t = 0; t < i; ++t) mx = std::max(mx, rgs[t]);
            if (rgs[i] <= mx) break;
        }
        if (i == 0) break;
        ++rgs[i];
        std::fill(rgs.begin() + i + 1, rgs.end(), 0);
    }
    return out;
}

Partition normalize_labels(std::span<const int> labels) {
    std::unordered_map<int, int> remap;
    std::vector<int> dense(labels.size());
    int next = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto [it, inserted] = remap.emplace(labels[i], next);
        if (inserted) ++next;
        dense[i] = it->second;
    }
    return Partition::from_alloc(std::move(dense));
}

std::string partition_key(const Partition& part) {
    std::string s;
    s.reserve(part.n() * 2);
    for (int i = 0; i < part.n(); ++i) {
        if (i) s.push_back(' ');
        s += std::to_string(part.alloc[i]);
    }
    return s;
}

}  // namespace vdreg
