#pragma once

#include <span>
#include <string>
#include <vector>

#include "vdreg/dataset.hpp"
#include "vdreg/similarity.hpp"

namespace vdreg {

// Allocation of n units to K clusters. Labels are dense and 0-based; cluster k
// lists its members in increasing unit order.
struct Partition {
    std::vector<int> alloc;
    std::vector<std::vector<int>> clusters;
    std::vector<int> sizes;

    int n() const { return static_cast<int>(alloc.size()); }
    int K() const { return static_cast<int>(clusters.size()); }

    static Partition from_alloc(std::vector<int> labels);  // labels must already be dense
    bool consistent() const;
};

struct CohesionConfig {
    double M = 1.0;  // Dirichlet-process mass; c(C) = M * (|C|-1)!
};

double log_cohesion(int size, const CohesionConfig& coh);

// Unnormalized log prior: sum over clusters of cohesion plus covariate similarity.
double log_ppmx_prior(const Partition& part, const Dataset& d, const SimilarityConfig& cfg, const CohesionConfig& coh);

// All set partitions of {0..n-1} in lexicographic restricted-growth order; n <= 10.
std::vector<Partition> enumerate_partitions(int n);

// Relabels in order of first appearance (labels may be sparse, e.g. after a cluster death).
Partition normalize_labels(std::span<const int> labels);

// canonical serialization: space-separated dense labels
std::string partition_key(const Partition& part);

}  // namespace vdreg
