#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace vdreg {

enum class CovKind { continuous, binary, categorical };

std::string to_string(CovKind k);
std::optional<CovKind> cov_kind_from_string(const std::string& s);

// Covariate table with explicit missingness mask. Missing cells hold NaN in
// addition to mask() == 0, so any accidental read of a missing value poisons
// downstream results instead of silently using stale numbers.
struct Dataset {
    int n = 0;
    int p = 0;
    std::vector<double> x;        // n*p row-major, NaN where missing
    std::vector<std::uint8_t> r;  // n*p, 1 = reported
    std::vector<CovKind> kinds;
    std::vector<double> y;
    std::vector<std::string> names;
    std::string response_name = "y";
    std::vector<int> n_levels;  // per covariate; categorical: max observed code + 1

    double value(int i, int j) const { return x[static_cast<std::size_t>(i) * p + j]; }
    bool observed(int i, int j) const { return r[static_cast<std::size_t>(i) * p + j] != 0; }

    std::span<const double> row(int i) const { return {x.data() + static_cast<std::size_t>(i) * p, static_cast<std::size_t>(p)}; }
    std::span<const std::uint8_t> row_mask(int i) const { return {r.data() + static_cast<std::size_t>(i) * p, static_cast<std::size_t>(p)}; }

    // recomputes n_levels and validates kind/value contracts; throws DataError
    void finalize();
};

struct CsvSchema {
    std::string response = "y";
    std::string na_token = "NA";
    std::vector<CovKind> kinds;  // empty => infer from observed values
};

Dataset load_csv(const std::string& path, const CsvSchema& schema);
void save_csv(const Dataset& d, const std::string& path, const std::string& na_token = "NA");

// Per-covariate location/scale computed from observed entries only.
// Non-continuous covariates get the identity transform.
struct Standardization {
    std::vector<double> mu;
    std::vector<double> sd;
};

Standardization standardize(const Dataset& d);

// z = (x - mu)/sd on observed continuous cells; mask and other kinds untouched
Dataset apply_standardization(const Standardization& s, Dataset d);

struct ResponseScale {
    double mu = 0.0;
    double sd = 1.0;
    double to_internal(double y) const { return (y - mu) / sd; }
    double to_original(double z) const { return mu + sd * z; }
};

ResponseScale fit_response_scale(const Dataset& d);
Dataset apply_response_scale(const ResponseScale& s, Dataset d);

// Deterministic row split; the second element holds floor(fraction*n) test rows.
std::pair<Dataset, Dataset> split_train_test(const Dataset& d, double fraction, std::uint64_t seed);

Dataset select_rows(const Dataset& d, std::span<const int> rows);

}  // namespace vdreg
