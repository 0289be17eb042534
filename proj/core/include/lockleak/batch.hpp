#pragma once

#include "lockleak/benchgen.hpp"
#include "lockleak/leakage.hpp"
#include "lockleak/sat.hpp"
#include "lockleak/sensitize.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lockleak {

/// One locking campaign. Variant i of every (scheme, size) group uses seed
/// base_seed + i.
struct BatchSpec {
    std::string benchmark;            // generator name, or empty when `benchmark_file` is set
    BenchmarkParams params;
    std::string benchmark_file;       // netlist / locked netlist / word design JSON
    std::vector<std::string> schemes; // "epic", "dmux", "assure"
    std::vector<std::string> key_sizes{"25%"};            // epic and dmux
    std::vector<std::string> assure_modes{"const", "ops", "branch"};
    int variants = 100;
    std::uint64_t base_seed = 1;
    std::vector<ScenarioKind> scenarios{ScenarioKind::SetAll, ScenarioKind::SetLlKey};
    AnalysisMode mode = AnalysisMode::DualRail;
    SolveBudget budget = SolveBudget::classification_default();
    int unroll = 8;
    std::size_t exact_unknown_cap = kDefaultExactUnknownCap;
    int dmux_retries = 1000;
    bool persist_variants = false;
    bool record_timing = false;
};

/// Strict JSON reader; unknown fields are rejected.
BatchSpec parse_batch_spec(std::string_view text);

struct VerdictRow {
    int variant_id = 0;
    std::uint64_t seed = 0;
    std::string scheme;
    std::string key_size;
    std::string scenario;
    std::string mode;
    int bit_index = 0;
    Verdict verdict = Verdict::S;
    std::string output_id; // output net label, empty unless DT
    std::string polarity;  // "0"/"1", empty unless DT
    std::string witness;   // hex, empty unless DT
    double solve_ms = 0.0;
    std::int64_t conflicts = 0;
};

/// Correct-key equivalence check of one variant against the unlocked design.
struct ControlRow {
    int variant_id = 0;
    std::uint64_t seed = 0;
    std::string scheme;
    std::string key_size;
    std::size_t key_bits = 0;
    std::string method; // "exhaustive" or "sat_miter"
    bool equivalent = true;
};

struct ErrorRow {
    int variant_id = 0;
    std::uint64_t seed = 0;
    std::string scheme;
    std::string key_size;
    std::string stage; // "lock", "classify"
    std::string message;
};

struct BatchResult {
    std::vector<VerdictRow> verdicts;
    std::vector<ControlRow> controls;
    std::vector<ErrorRow> errors;
};

/// Reads a design file: BLIF by ".blif" suffix, otherwise JSON holding a word
/// design (has "nodes") or a (locked) netlist.
GeneratedBenchmark load_benchmark_file(const std::string& path);

/// One row per verdict of a single analyzed netlist; `analyzed` is the netlist the
/// witness output indices refer to. `mode` overrides the verdict's own mode label.
VerdictRow make_verdict_row(const Netlist& analyzed, const LeakageVerdict& v, int variant_id, std::uint64_t seed,
                            const std::string& scheme, const std::string& key_size, ScenarioKind scenario,
                            std::string_view mode = {});

/// Runs every (variant, scenario, bit) task on `jobs` worker threads (0 = all
/// cores). Results do not depend on `jobs`. The unlocked design is classified as
/// scheme "none" with key size "0". When `out_dir` is non-empty and
/// `persist_variants` is set, locked variants are written under out_dir/variants.
BatchResult run_batch(const BatchSpec& spec, int jobs, const std::string& out_dir = {});

inline constexpr std::string_view kVerdictHeader =
    "variant_id,seed,scheme,key_size,scenario,mode,bit_index,verdict,output_id,polarity,witness,solve_ms,conflicts";

std::string verdicts_to_csv(const std::vector<VerdictRow>& rows, bool with_timing);
std::vector<VerdictRow> parse_verdicts_csv(std::string_view text);
std::string controls_to_csv(const std::vector<ControlRow>& rows);
std::string errors_to_csv(const std::vector<ErrorRow>& rows);

/// Writes verdicts.csv, controls.csv, errors.csv and the aggregate report.
void write_batch_outputs(const BatchResult& result, const BatchSpec& spec, const std::string& out_dir);

} // namespace lockleak
