#include "lockleak/batch.hpp"
#include "lockleak/benchgen.hpp"
#include "lockleak/gatelock.hpp"
#include "lockleak/netlist_io.hpp"
#include "lockleak/sensitize.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace lockleak;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = fs::path(LOCKLEAK_SOURCE_DIR) / "tests" / "fixtures";

bool regenerating() {
    const char* v = std::getenv("LOCKLEAK_REGEN_FIXTURES");
    return v && std::string(v) == "1";
}

std::string first_difference(const std::string& want, const std::string& got) {
    std::istringstream a(want), b(got);
    std::string la, lb;
    for (int line = 1;; ++line) {
        const bool ha = static_cast<bool>(std::getline(a, la));
        const bool hb = static_cast<bool>(std::getline(b, lb));
        if (!ha && !hb) return "trailing bytes differ";
        if (ha != hb || la != lb)
            return "line " + std::to_string(line) + "\n  fixture:     " + (ha ? la : "<eof>") +
                   "\n  regenerated: " + (hb ? lb : "<eof>");
    }
}

// Compares against the shipped file, or rewrites it under LOCKLEAK_REGEN_FIXTURES=1.
void check_fixture(const fs::path& rel, const std::string& got) {
    const fs::path path = kFixtures / rel;
    if (regenerating()) {
        fs::create_directories(path.parent_path());
        std::ofstream(path, std::ios::binary) << got;
        return;
    }
    ASSERT_TRUE(fs::exists(path)) << path << " missing; rerun with LOCKLEAK_REGEN_FIXTURES=1";
    const std::string want = read_file(path.string());
    EXPECT_TRUE(want == got) << rel.string() << " drifted at " << first_difference(want, got);
}

std::vector<VerdictRow> analyze_rows(const LockedNetlist& l, ScenarioKind kind, const std::string& scheme) {
    ClassifyOptions opt;
    opt.mode = AnalysisMode::Exact;
    std::vector<VerdictRow> rows;
    for (const auto& v : classify_all_bits(l.netlist, kind, opt))
        rows.push_back(make_verdict_row(l.netlist, v, 0, 0, scheme, std::to_string(l.key.size()), kind));
    return rows;
}

std::string scheme_of(const LockedNetlist& l) {
    return l.provenance.empty() ? "none" : l.provenance.front().scheme;
}

std::vector<VerdictRow> both_scenarios(const LockedNetlist& l) {
    const std::string scheme = scheme_of(l);
    auto rows = analyze_rows(l, ScenarioKind::SetAll, scheme);
    const auto more = analyze_rows(l, ScenarioKind::SetLlKey, scheme);
    rows.insert(rows.end(), more.begin(), more.end());
    return rows;
}

} // namespace

TEST(Golden, Fig5Verdicts) {
    const auto rows = both_scenarios(fig5_example());
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(rows[2].verdict, Verdict::DT);
    EXPECT_EQ(rows[2].witness, "3");
    EXPECT_EQ(rows[3].verdict, Verdict::S);
    check_fixture("fig5/verdicts.csv", verdicts_to_csv(rows, false));

    const auto ref = both_scenarios(as_locked(fig5_reference()));
    for (const auto& r : ref) EXPECT_EQ(r.verdict, Verdict::S);
    check_fixture("fig5/reference_verdicts.csv", verdicts_to_csv(ref, false));
}

TEST(Golden, UnlockedControls) {
    for (const auto& name : {"toy_spn", "toy_xtea", "passthrough"}) {
        const auto rows = both_scenarios(gen_benchmark(name).gate_level());
        for (const auto& r : rows) EXPECT_EQ(r.verdict, Verdict::S) << name << " bit " << r.bit_index;
        check_fixture(fs::path("control") / (std::string(name) + ".csv"), verdicts_to_csv(rows, false));
    }
}

TEST(Golden, SeededToyBatch) {
    const std::string spec_text = read_file((kFixtures / "toy_batch" / "spec.json").string());
    const BatchSpec spec = parse_batch_spec(spec_text);
    ASSERT_EQ(spec.base_seed, 1u);

    const fs::path out = fs::temp_directory_path() / "lockleak_golden_batch";
    fs::remove_all(out);
    fs::create_directories(out);
    write_batch_outputs(run_batch(spec, 0), spec, out.string());

    std::vector<fs::path> produced;
    for (const auto& e : fs::directory_iterator(out)) produced.push_back(e.path().filename());
    std::sort(produced.begin(), produced.end());
    ASSERT_FALSE(produced.empty());
    for (const auto& f : produced) check_fixture(fs::path("toy_batch") / "expected" / f, read_file((out / f).string()));

    if (!regenerating()) {
        std::vector<fs::path> shipped;
        for (const auto& e : fs::directory_iterator(kFixtures / "toy_batch" / "expected"))
            shipped.push_back(e.path().filename());
        std::sort(shipped.begin(), shipped.end());
        EXPECT_EQ(shipped, produced);
    }
    fs::remove_all(out);
}
