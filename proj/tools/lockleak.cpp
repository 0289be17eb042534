#include "lockleak/assure.hpp"
#include "lockleak/batch.hpp"
#include "lockleak/blif.hpp"
#include "lockleak/errors.hpp"
#include "lockleak/gatelock.hpp"
#include "lockleak/netlist_io.hpp"
#include "lockleak/oracle.hpp"
#include "lockleak/report.hpp"
#include "lockleak/sensitize.hpp"
#include "lockleak/sim.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <sstream>

using namespace lockleak;
using nlohmann::json;

namespace {

void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") std::cout << text;
    else write_file(path, text);
}

bool ends_with(const std::string& s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string emit_design(const LockedNetlist& l, const std::string& path) {
    if (ends_with(path, ".blif")) return emit_blif(l.netlist);
    return emit_locked_json(l);
}

LockedNetlist load_locked(const std::string& path) { return load_benchmark_file(path).gate_level(); }

std::string scheme_label(const LockedNetlist& l) {
    if (l.provenance.empty()) return "none";
    const std::string& s = l.provenance.front().scheme;
    return s.rfind("assure", 0) == 0 ? "assure" : s;
}

ScenarioKind scenario_arg(const std::string& s) {
    const auto sc = scenario_from_string(s);
    if (!sc) throw InputError("unknown scenario '" + s + "'");
    return *sc;
}

int run_gen(const std::string& name, const std::vector<std::string>& params, const std::string& out) {
    BenchmarkParams p;
    for (const auto& kv : params) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw InputError("--param expects name=value, got '" + kv + "'");
        try {
            p[kv.substr(0, eq)] = std::stoi(kv.substr(eq + 1));
        } catch (const std::exception&) {
            throw InputError("--param " + kv + ": value is not an integer");
        }
    }
    const GeneratedBenchmark b = gen_benchmark(name, p);
    emit(out, b.is_word() ? emit_word_json(*b.word) : emit_design(*b.gate, out));
    return 0;
}

std::string key_json(const AssureKey& key) {
    nlohmann::ordered_json j;
    j["key"] = key_to_string(key.bits);
    auto segs = nlohmann::ordered_json::array();
    for (const auto& s : key.segments) {
        nlohmann::ordered_json e;
        e["mode"] = assure_modes_label(s.mode);
        e["offset"] = s.offset;
        e["width"] = s.width;
        e["site"] = s.site;
        e["input"] = s.input;
        segs.push_back(std::move(e));
    }
    j["segments"] = std::move(segs);
    return j.dump(2) + "\n";
}

int run_assure(const std::string& in, const std::string& modes, std::uint64_t seed, const std::string& out,
               const std::string& key_out, const std::string& gates_out) {
    const WordDesign d = parse_word_json(read_file(in));
    const AssureResult r = assure_lock(d, parse_assure_modes(modes), seed);
    emit(out, emit_word_json(r.design));
    if (!key_out.empty()) write_file(key_out, key_json(r.key));
    if (!gates_out.empty()) write_file(gates_out, emit_design(lower_locked(r), gates_out));
    return 0;
}

int run_lower(const std::string& in, const std::string& key_file, const std::string& out) {
    const WordDesign d = parse_word_json(read_file(in));
    LockedNetlist l;
    l.netlist = lower_to_gates(d);
    for (std::size_t idx : l.netlist.inputs_with_role(PortRole::LockingKey)) l.key_inputs.push_back(l.netlist.inputs[idx].net);
    if (!key_file.empty()) {
        json k;
        try {
            k = json::parse(read_file(key_file));
        } catch (const json::parse_error& e) {
            throw InputError(key_file + ": " + e.what());
        }
        if (!k.is_object() || !k.contains("key") || !k["key"].is_string()) throw InputError(key_file + ": missing \"key\"");
        l.key = key_from_string(k["key"].get<std::string>());
        if (l.key.size() != l.key_inputs.size())
            throw InputError("key has " + std::to_string(l.key.size()) + " bits, design has " +
                             std::to_string(l.key_inputs.size()) + " key inputs");
    }
    emit(out, emit_design(l, out));
    return 0;
}

int run_lock(const std::string& in, const std::string& scheme, std::optional<double> pct, std::optional<int> bits,
             std::uint64_t seed, int retries, const std::string& out) {
    LockingConfig cfg;
    const auto s = lock_scheme_from_string(scheme);
    if (!s) throw InputError("unknown scheme '" + scheme + "'");
    cfg.scheme = *s;
    cfg.size = pct ? KeySize::pct(*pct) : bits ? KeySize::bits(*bits) : KeySize{};
    cfg.seed = seed;
    cfg.max_retries = retries;
    const LockedNetlist locked = lock(load_locked(in), cfg);
    emit(out, emit_design(locked, out));
    std::cerr << "locked with " << locked.key.size() << " key bits, key " << key_to_string(locked.key) << '\n';
    return 0;
}

void summarize(const std::vector<VerdictRow>& rows) {
    std::size_t dt = 0, s = 0, nd = 0;
    for (const auto& r : rows) (r.verdict == Verdict::DT ? dt : r.verdict == Verdict::S ? s : nd)++;
    std::cerr << rows.size() << " bits: " << dt << " DT, " << s << " S, " << nd << " ND\n";
}

int run_analyze(const std::string& in, const std::string& scenario, const std::string& mode, std::int64_t timeout_ms,
                std::int64_t conflicts, std::size_t unknown_cap, int unroll_depth, const std::string& out,
                bool timing) {
    const LockedNetlist l = load_locked(in);
    const ScenarioKind sc = scenario_arg(scenario);
    ClassifyOptions opt;
    const auto m = mode_from_string(mode);
    if (!m) throw InputError("unknown mode '" + mode + "'");
    opt.mode = *m;
    opt.budget.time_ms = timeout_ms;
    opt.budget.conflicts = conflicts;
    opt.exact_unknown_cap = unknown_cap;
    if (unroll_depth < 1) throw InputError("--unroll must be at least 1");
    const Netlist analyzed = l.netlist.is_sequential() ? unroll(l.netlist, unroll_depth) : l.netlist;
    const auto verdicts = classify_all_bits(analyzed, sc, opt);
    std::vector<VerdictRow> rows;
    for (const auto& v : verdicts)
        rows.push_back(make_verdict_row(analyzed, v, 0, 0, scheme_label(l), std::to_string(l.key.size()), sc));
    emit(out, verdicts_to_csv(rows, timing));
    summarize(rows);
    for (const auto& v : verdicts)
        if (v.nd_cause == NdCause::Error) std::cerr << "bit " << v.bit << ": " << v.message << '\n';
    return 0;
}

int run_oracle(const std::string& in, const std::string& scenario, int unroll_depth, const std::string& out) {
    const LockedNetlist l = load_locked(in);
    const ScenarioKind sc = scenario_arg(scenario);
    const Netlist analyzed = l.netlist.is_sequential() ? unroll(l.netlist, unroll_depth) : l.netlist;
    std::vector<VerdictRow> rows;
    for (int b : secret_bits(analyzed))
        rows.push_back(make_verdict_row(analyzed, brute_force_leakage(analyzed, b, sc), 0, 0, scheme_label(l),
                                        std::to_string(l.key.size()), sc, "oracle"));
    emit(out, verdicts_to_csv(rows, false));
    summarize(rows);
    return 0;
}

int run_batch_cmd(const std::string& spec_path, int jobs, const std::string& out_dir) {
    const BatchSpec spec = parse_batch_spec(read_file(spec_path));
    const BatchResult res = run_batch(spec, jobs, out_dir);
    write_batch_outputs(res, spec, out_dir);
    std::size_t failures = 0;
    for (const auto& c : res.controls) failures += c.equivalent ? 0 : 1;
    summarize(res.verdicts);
    std::cerr << res.controls.size() << " correct-key controls, " << failures << " failed; " << res.errors.size()
              << " errors\n";
    return 0;
}

std::vector<std::vector<std::string>> read_csv_rows(const std::string& path, std::string_view header) {
    std::istringstream in(read_file(path));
    std::string line;
    if (!std::getline(in, line) || line != header) throw InputError(path + ": unexpected header");
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::istringstream ls(line);
        for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
        rows.push_back(std::move(f));
    }
    return rows;
}

int run_report(const std::string& in_dir, const std::string& out) {
    namespace fs = std::filesystem;
    const fs::path dir(in_dir);
    const auto rows = parse_verdicts_csv(read_file((dir / "verdicts.csv").string()));
    std::size_t failures = 0, errors = 0;
    if (fs::exists(dir / "controls.csv"))
        for (const auto& r : read_csv_rows((dir / "controls.csv").string(),
                                           "variant_id,seed,scheme,key_size,key_bits,method,equivalent"))
            failures += (r.size() == 7 && r[6] == "1") ? 0 : 1;
    if (fs::exists(dir / "errors.csv"))
        errors = read_csv_rows((dir / "errors.csv").string(), "variant_id,seed,scheme,key_size,stage,message").size();
    const auto groups = aggregate_groups(rows);
    write_report(groups, failures, errors, out.empty() ? (dir / "report.json").string() : out);
    for (const auto& g : groups)
        std::cout << g.scheme << ' ' << g.key_size << ' ' << g.scenario << ' ' << g.mode << ": average detection rate "
                  << g.average_detection_rate() << "% over " << g.variants << " variants\n";
    return 0;
}

LogicValue logic_of(const json& v, const std::string& where) {
    if (v.is_boolean()) return v.get<bool>() ? LogicValue::One : LogicValue::Zero;
    if (v.is_number_integer() && (v.get<int>() == 0 || v.get<int>() == 1))
        return v.get<int>() ? LogicValue::One : LogicValue::Zero;
    if (v.is_string() && (v.get<std::string>() == "x" || v.get<std::string>() == "X")) return LogicValue::X;
    throw InputError(where + ": expected 0, 1 or \"x\"");
}

std::vector<LogicValue> input_vector(const Netlist& n, const json& obj, const std::string& where) {
    if (!obj.is_object()) throw InputError(where + ": expected an object of input values");
    std::vector<LogicValue> v(n.inputs.size(), LogicValue::X);
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        const auto idx = n.find_input(it.key());
        if (!idx) throw InputError(where + ": no input named '" + it.key() + "'");
        v[*idx] = logic_of(*it, where + "." + it.key());
    }
    return v;
}

int run_sim(const std::string& in, const std::string& inputs_path) {
    const Netlist n = load_locked(in).netlist;
    json doc;
    try {
        doc = json::parse(read_file(inputs_path));
    } catch (const json::parse_error& e) {
        throw InputError(inputs_path + ": " + e.what());
    }
    nlohmann::ordered_json out;
    if (doc.is_array()) {
        std::vector<std::vector<bool>> trace;
        for (std::size_t f = 0; f < doc.size(); ++f) {
            const auto v = input_vector(n, doc[f], "cycle " + std::to_string(f));
            std::vector<bool> bits;
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (v[i] == LogicValue::X)
                    throw InputError("cycle " + std::to_string(f) + ": input '" + n.label(n.inputs[i].net) + "' is unset");
                bits.push_back(v[i] == LogicValue::One);
            }
            trace.push_back(std::move(bits));
        }
        auto cycles = nlohmann::ordered_json::array();
        for (const auto& outs : simulate_sequence(n, trace)) {
            nlohmann::ordered_json c;
            for (std::size_t o = 0; o < outs.size(); ++o) c[n.label(n.outputs[o].net)] = outs[o] ? 1 : 0;
            cycles.push_back(std::move(c));
        }
        out["cycles"] = std::move(cycles);
    } else {
        const auto res = simulate3(n, input_vector(n, doc, "inputs"));
        nlohmann::ordered_json o;
        for (std::size_t i = 0; i < res.size(); ++i) {
            const std::string key = n.label(n.outputs[i].net);
            if (res[i] == LogicValue::X) o[key] = "x";
            else o[key] = res[i] == LogicValue::One ? 1 : 0;
        }
        out["outputs"] = std::move(o);
    }
    std::cout << out.dump(2) << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"lockleak: leakage analysis of logic-locked netlists"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "lockleak 0.3.0");

    std::string in, out, key_out, gates_out, name, scheme, scenario = "set-all", mode = "dualrail", modes = "const,ops,branch";
    std::string spec, out_dir, in_dir, inputs, key_in;
    std::vector<std::string> params;
    std::uint64_t seed = 1;
    std::optional<double> key_pct;
    std::optional<int> key_bits;
    int retries = 1000, jobs = 0, unroll_depth = kDefaultUnrollDepth;
    std::int64_t timeout_ms = *SolveBudget::classification_default().time_ms;
    std::int64_t conflicts = *SolveBudget::classification_default().conflicts;
    std::size_t unknown_cap = kDefaultExactUnknownCap;
    bool timing = false;

    auto* gen = app.add_subcommand("gen", "Write a built-in benchmark");
    gen->add_option("--name", name, "Benchmark name")->required();
    gen->add_option("--param", params, "Generator parameter name=value");
    gen->add_option("--out", out, "Output file (.json or .blif)");

    auto* assure = app.add_subcommand("assure-lock", "Lock a word-level design");
    assure->add_option("--in", in, "Word design JSON")->required();
    assure->add_option("--modes", modes, "Comma separated subset of const,ops,branch");
    assure->add_option("--seed", seed, "RNG seed");
    assure->add_option("--out", out, "Locked word design");
    assure->add_option("--key-out", key_out, "Key and segment map");
    assure->add_option("--gates-out", gates_out, "Also write the lowered locked netlist");

    auto* lower = app.add_subcommand("lower", "Lower a word design to gates");
    lower->add_option("--in", in, "Word design JSON")->required();
    lower->add_option("--key", key_in, "Key file written by assure-lock");
    lower->add_option("--out", out, "Output netlist");

    auto* lk = app.add_subcommand("lock", "Lock a gate-level netlist");
    lk->add_option("--in", in, "Netlist")->required();
    lk->add_option("--scheme", scheme, "epic or dmux")->required();
    auto* pct_opt = lk->add_option("--key-pct", key_pct, "Key size as a percentage of locations");
    lk->add_option("--key-bits", key_bits, "Key size in bits")->excludes(pct_opt);
    lk->add_option("--seed", seed, "RNG seed");
    lk->add_option("--retries", retries, "D-MUX attempts per key bit");
    lk->add_option("--out", out, "Locked netlist");

    auto* an = app.add_subcommand("analyze", "Classify every secret bit");
    an->add_option("--in", in, "Locked netlist")->required();
    an->add_option("--scenario", scenario, "set-all or set-ll-key");
    an->add_option("--mode", mode, "dualrail or exact");
    an->add_option("--timeout-ms", timeout_ms, "Wall clock budget per bit");
    an->add_option("--conflicts", conflicts, "Conflict budget per bit");
    an->add_option("--unknown-cap", unknown_cap, "Exact mode limit on unknown inputs");
    an->add_option("--unroll", unroll_depth, "Frames for sequential designs");
    an->add_option("--out", out, "Verdict CSV");
    an->add_flag("--timing", timing, "Record solve times");

    auto* ba = app.add_subcommand("batch", "Run a locking campaign");
    ba->add_option("--spec", spec, "Batch spec JSON")->required();
    ba->add_option("--jobs", jobs, "Worker threads, 0 for all cores");
    ba->add_option("--out-dir", out_dir, "Output directory")->required();

    auto* rep = app.add_subcommand("report", "Aggregate a verdict table");
    rep->add_option("--in-dir", in_dir, "Batch output directory")->required();
    rep->add_option("--out", out, "Report JSON");

    auto* orc = app.add_subcommand("oracle", "Brute-force ground truth");
    orc->add_option("--in", in, "Locked netlist")->required();
    orc->add_option("--scenario", scenario, "set-all or set-ll-key");
    orc->add_option("--unroll", unroll_depth, "Frames for sequential designs");
    orc->add_option("--out", out, "Verdict CSV");

    auto* sim = app.add_subcommand("sim", "Simulate a netlist");
    sim->add_option("--in", in, "Netlist")->required();
    sim->add_option("--inputs", inputs, "Input values: an object, or an array of objects per cycle")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*gen) return run_gen(name, params, out);
        if (*assure) return run_assure(in, modes, seed, out, key_out, gates_out);
        if (*lower) return run_lower(in, key_in, out);
        if (*lk) return run_lock(in, scheme, key_pct, key_bits, seed, retries, out);
        if (*an) return run_analyze(in, scenario, mode, timeout_ms, conflicts, unknown_cap, unroll_depth, out, timing);
        if (*ba) return run_batch_cmd(spec, jobs, out_dir);
        if (*rep) return run_report(in_dir, out);
        if (*orc) return run_oracle(in, scenario, unroll_depth, out);
        if (*sim) return run_sim(in, inputs);
    } catch (const SoundnessError& e) {
        std::cerr << "internal soundness failure: " << e.what() << '\n';
        return 3;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const CycleError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const CapacityError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 3;
    }
    return 1;
}
