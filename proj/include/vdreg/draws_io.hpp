#pragma once

#include <string>

#include "vdreg/sampler.hpp"

namespace vdreg {

// Newline-delimited JSON: a meta record followed by one record per retained
// iteration. Doubles round-trip exactly.
void write_draws_jsonl(const PosteriorDraws& draws, const std::string& path);
PosteriorDraws read_draws_jsonl(const std::string& path);

// one line per draw, space-separated dense 0-based labels
void write_partitions_txt(const PosteriorDraws& draws, const std::string& path);

void write_diagnostics_json(const DiagnosticsSummary& s, const std::string& path);

}  // namespace vdreg
