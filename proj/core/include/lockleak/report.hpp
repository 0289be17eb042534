#pragma once

#include "lockleak/batch.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace lockleak {

/// Exact ratio num/den rounded half-to-even to 4 decimals, e.g. "33.3333".
std::string round4(std::uint64_t num, std::uint64_t den);

struct BitDistribution {
    int bit = 0;
    std::uint64_t dt = 0, s = 0, nd = 0;
};

/// Aggregate over one (scheme, key size, scenario, mode) group.
struct AggregateReport {
    std::string scheme, key_size, scenario, mode;
    std::uint64_t variants = 0;
    std::uint64_t secret_length = 0;
    std::vector<BitDistribution> bits;
    std::vector<std::uint64_t> histogram; // histogram[k] = variants with k DT bits, k = 0..secret_length
    std::uint64_t total_dt = 0;
    std::uint64_t min_dt = 0, max_dt = 0;

    /// 100 * total_dt / (secret_length * variants), rounded.
    std::string average_detection_rate() const;
    std::string file_stem() const; // "<scheme>_<size>_<scenario>" with filesystem-safe characters
};

/// All rows must belong to one group and cover every (variant, bit) exactly once;
/// otherwise InputError.
AggregateReport aggregate(const std::vector<VerdictRow>& rows);
/// Splits a table by group (first-appearance order) and aggregates each.
std::vector<AggregateReport> aggregate_groups(const std::vector<VerdictRow>& rows);

std::string bits_csv(const AggregateReport& r); // "bit,dt_pct,s_pct,nd_pct"
std::string hist_csv(const AggregateReport& r); // "leaked_bits,variant_count"
std::string report_json(const std::vector<AggregateReport>& groups, std::size_t control_failures,
                        std::size_t variant_errors);

/// Writes the JSON report to `json_path` and the per-group CSVs next to it.
void write_report(const std::vector<AggregateReport>& groups, std::size_t control_failures,
                  std::size_t variant_errors, const std::string& json_path);

} // namespace lockleak
