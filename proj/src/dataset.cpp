#include "vdreg/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "vdreg/errors.hpp"
#include "vdreg/rng.hpp"

namespace vdreg {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        // trim surrounding whitespace
        auto first = cell.find_first_not_of(" \t\r");
        auto last = cell.find_last_not_of(" \t\r");
        out.push_back(first == std::string::npos ? std::string{} : cell.substr(first, last - first + 1));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_double(const std::string& cell, const std::string& context) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(cell, &pos);
        if (pos != cell.size()) throw std::invalid_argument(cell);
        return v;
    } catch (const std::exception&) {
        throw DataError("non-numeric cell '" + cell + "' " + context);
    }
}

std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

bool is_integral_value(double v) {
    return std::isfinite(v) && v == std::floor(v);
}

}  // namespace

std::string to_string(CovKind k) {
    switch (k) {
        case CovKind::continuous: return "continuous";
        case CovKind::binary: return "binary";
        case CovKind::categorical: return "categorical";
    }
    return "?";
}

std::optional<CovKind> cov_kind_from_string(const std::string& s) {
    if (s == "continuous" || s == "cont" || s == "c") return CovKind::continuous;
    if (s == "binary" || s == "bin" || s == "b") return CovKind::binary;
    if (s == "categorical" || s == "cat" || s == "k") return CovKind::categorical;
    return std::nullopt;
}

void Dataset::finalize() {
    n_levels.assign(p, 0);
    for (int j = 0; j < p; ++j) {
        for (int i = 0; i < n; ++i) {
            if (!observed(i, j)) continue;
            const double v = value(i, j);
            if (!std::isfinite(v)) throw DataError("non-finite observed value in covariate " + names[j]);
            switch (kinds[j]) {
                case CovKind::continuous:
                    break;
                case CovKind::binary:
                    if (v != 0.0 && v != 1.0)
                        throw DataError("invalid binary value " + format_double(v) + " in covariate " + names[j]);
                    break;
                case CovKind::categorical:
                    if (!is_integral_value(v) || v < 0.0)
                        throw DataError("invalid categorical code " + format_double(v) + " in covariate " + names[j]);
                    n_levels[j] = std::max(n_levels[j], static_cast<int>(v) + 1);
                    break;
            }
        }
        if (kinds[j] == CovKind::binary) n_levels[j] = 2;
    }
    for (double v : y)
        if (!std::isfinite(v)) throw DataError("response contains a missing or non-finite value");
}

Dataset load_csv(const std::string& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open data file " + path);

    std::string line;
    if (!std::getline(in, line)) throw DataError("empty file " + path);
    const auto header = split_line(line);

    int response_col = -1;
    for (std::size_t c = 0; c < header.size(); ++c)
        if (header[c] == schema.response) response_col = static_cast<int>(c);
    if (response_col < 0) throw DataError("response column '" + schema.response + "' not found in " + path);

    Dataset d;
    d.p = static_cast<int>(header.size()) - 1;
    if (d.p < 1) throw DataError("no covariate columns in " + path);
    if (!schema.kinds.empty() && static_cast<int>(schema.kinds.size()) != d.p)
        throw DataError("schema declares " + std::to_string(schema.kinds.size()) + " covariates but file has " + std::to_string(d.p));
    d.response_name = schema.response;
    for (std::size_t c = 0; c < header.size(); ++c)
        if (static_cast<int>(c) != response_col) d.names.push_back(header[c]);

    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = split_line(line);
        if (cells.size() != header.size())
            throw DataError(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                            " columns, got " + std::to_string(cells.size()));
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const std::string ctx = "at " + path + ":" + std::to_string(line_no);
            if (static_cast<int>(c) == response_col) {
                if (cells[c] == schema.na_token) throw DataError("missing response " + ctx);
                d.y.push_back(parse_double(cells[c], ctx));
            } else if (cells[c] == schema.na_token) {
                d.x.push_back(kNaN);
                d.r.push_back(0);
            } else {
                d.x.push_back(parse_double(cells[c], ctx));
                d.r.push_back(1);
            }
        }
        ++d.n;
    }
    if (d.n == 0) throw DataError("no data rows in " + path);

    if (!schema.kinds.empty()) {
        d.kinds = schema.kinds;
    } else {
        // infer: {0,1} only -> binary; small nonnegative integers -> categorical; else continuous
        d.kinds.assign(d.p, CovKind::continuous);
        for (int j = 0; j < d.p; ++j) {
            bool all01 = true, all_small_int = true, any = false;
            for (int i = 0; i < d.n; ++i) {
                if (!d.observed(i, j)) continue;
                any = true;
                const double v = d.value(i, j);
                if (v != 0.0 && v != 1.0) all01 = false;
                if (!is_integral_value(v) || v < 0.0 || v > 20.0) all_small_int = false;
            }
            if (!any) continue;
            if (all01) d.kinds[j] = CovKind::binary;
            else if (all_small_int) d.kinds[j] = CovKind::categorical;
        }
    }
    d.finalize();
    return d;
}

void save_csv(const Dataset& d, const std::string& path, const std::string& na_token) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    for (int j = 0; j < d.p; ++j) out << d.names[j] << ',';
    out << d.response_name << '\n';
    for (int i = 0; i < d.n; ++i) {
        for (int j = 0; j < d.p; ++j) {
            if (d.observed(i, j)) out << format_double(d.value(i, j));
            else out << na_token;
            out << ',';
        }
        out << format_double(d.y[i]) << '\n';
    }
}

Standardization standardize(const Dataset& d) {
    Standardization s;
    s.mu.assign(d.p, 0.0);
    s.sd.assign(d.p, 1.0);
    for (int j = 0; j < d.p; ++j) {
        if (d.kinds[j] != CovKind::continuous) continue;
        double sum = 0.0;
        int m = 0;
        for (int i = 0; i < d.n; ++i)
            if (d.observed(i, j)) {
                sum += d.value(i, j);
                ++m;
            }
        if (m < 2) throw DataError("covariate " + d.names[j] + " has fewer than 2 observed values");
        const double mean = sum / m;
        double ss = 0.0;
        for (int i = 0; i < d.n; ++i)
            if (d.observed(i, j)) {
                const double c = d.value(i, j) - mean;
                ss += c * c;
            }
        const double sd = std::sqrt(ss / (m - 1));
        if (sd <= 0.0) throw DataError("covariate " + d.names[j] + " has zero spread among observed values");
        s.mu[j] = mean;
        s.sd[j] = sd;
    }
    return s;
}

Dataset apply_standardization(const Standardization& s, Dataset d) {
    for (int j = 0; j < d.p; ++j) {
        if (d.kinds[j] != CovKind::continuous) continue;
        for (int i = 0; i < d.n; ++i)
            if (d.observed(i, j)) d.x[static_cast<std::size_t>(i) * d.p + j] = (d.value(i, j) - s.mu[j]) / s.sd[j];
    }
    return d;
}

ResponseScale fit_response_scale(const Dataset& d) {
    ResponseScale rs;
    const int n = static_cast<int>(d.y.size());
    rs.mu = std::accumulate(d.y.begin(), d.y.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : d.y) ss += (v - rs.mu) * (v - rs.mu);
    rs.sd = n > 1 ? std::sqrt(ss / (n - 1)) : 1.0;
    if (rs.sd <= 0.0) rs.sd = 1.0;  // constant response: center only
    return rs;
}

Dataset apply_response_scale(const ResponseScale& s, Dataset d) {
    for (auto& v : d.y) v = s.to_internal(v);
    return d;
}

Dataset select_rows(const Dataset& d, std::span<const int> rows) {
    Dataset out;
    out.p = d.p;
    out.kinds = d.kinds;
    out.names = d.names;
    out.response_name = d.response_name;
    out.n = static_cast<int>(rows.size());
    out.x.reserve(rows.size() * d.p);
    out.r.reserve(rows.size() * d.p);
    for (int i : rows) {
        for (int j = 0; j < d.p; ++j) {
            out.x.push_back(d.x[static_cast<std::size_t>(i) * d.p + j]);
            out.r.push_back(d.r[static_cast<std::size_t>(i) * d.p + j]);
        }
        out.y.push_back(d.y[i]);
    }
    out.finalize();
    return out;
}

std::pair<Dataset, Dataset> split_train_test(const Dataset& d, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("test fraction must lie in (0,1)");
    const int n_test = static_cast<int>(std::floor(fraction * d.n));
    if (n_test < 1) throw ConfigError("test fraction too small: no test rows");

    std::vector<int> order(d.n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(seed, "split"));
    for (int i = d.n - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(i) + 1));
        std::swap(order[i], order[j]);
    }
    std::vector<int> test(order.begin(), order.begin() + n_test);
    std::vector<int> train(order.begin() + n_test, order.end());
    std::sort(test.begin(), test.end());
    std::sort(train.begin(), train.end());
    return {select_rows(d, train), select_rows(d, test)};
}

}  // namespace vdreg
