#include "lockleak/batch.hpp"

#include "lockleak/assure.hpp"
#include "lockleak/blif.hpp"
#include "lockleak/errors.hpp"
#include "lockleak/gatelock.hpp"
#include "lockleak/netlist_io.hpp"
#include "lockleak/report.hpp"
#include "lockleak/sensitize.hpp"
#include "lockleak/sim.hpp"

#include <json.hpp>

#include <atomic>
#include <charconv>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <mutex>
#include <sstream>
#include <thread>

namespace lockleak {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& why) {
    throw InputError("batch spec: " + where + ": " + why);
}

std::vector<std::string> string_list(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) fail(where, "expected a non-empty array of strings");
    std::vector<std::string> out;
    for (const auto& e : j) {
        if (!e.is_string()) fail(where, "expected strings");
        out.push_back(e.get<std::string>());
    }
    return out;
}

std::int64_t positive(const json& j, const std::string& where) {
    if (!j.is_number_integer() || j.get<std::int64_t>() < 1) fail(where, "expected a positive integer");
    return j.get<std::int64_t>();
}

template <class Fn>
void parallel_for(std::size_t count, int jobs, Fn&& fn) {
    unsigned workers = jobs > 0 ? static_cast<unsigned>(jobs) : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(count, 1)));
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(count);
    auto body = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        body();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
        for (auto& t : pool) t.join();
    }
    // Lowest task index wins so the reported failure does not depend on timing.
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

struct Group {
    std::string scheme;
    std::string key_size;
    int variants = 0;
};

struct Variant {
    std::size_t group = 0;
    int id = 0;
    std::uint64_t seed = 0;
    Netlist analysis;
    bool ok = false;
    ControlRow control;
    bool has_control = false;
    std::string error;
};

struct Task {
    std::size_t variant;
    ScenarioKind scenario;
    int bit;
};

std::string clean(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = c == ',' ? ';' : ' ';
    return s;
}

std::string format_ms(double ms) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", ms);
    return buf;
}

template <class T>
T parse_number(std::string_view s, const std::string& where) {
    T v{};
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) throw InputError(where + ": bad number '" + std::string(s) + "'");
    return v;
}

} // namespace

BatchSpec parse_batch_spec(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw InputError(std::string("batch spec: ") + e.what());
    }
    if (!doc.is_object()) fail("<root>", "expected an object");
    BatchSpec spec;
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        const std::string& k = it.key();
        const json& v = *it;
        if (k == "benchmark") {
            if (!v.is_object()) fail(k, "expected an object");
            for (auto b = v.begin(); b != v.end(); ++b) {
                if (b.key() == "name") {
                    if (!b->is_string()) fail("benchmark.name", "expected a string");
                    spec.benchmark = b->get<std::string>();
                } else if (b.key() == "file") {
                    if (!b->is_string()) fail("benchmark.file", "expected a string");
                    spec.benchmark_file = b->get<std::string>();
                } else if (b.key() == "params") {
                    if (!b->is_object()) fail("benchmark.params", "expected an object");
                    for (auto p = b->begin(); p != b->end(); ++p) {
                        if (!p->is_number_integer()) fail("benchmark.params." + p.key(), "expected an integer");
                        spec.params[p.key()] = p->get<int>();
                    }
                } else {
                    fail("benchmark", "unknown field '" + b.key() + "'");
                }
            }
        } else if (k == "schemes") {
            spec.schemes = string_list(v, k);
            for (const auto& s : spec.schemes)
                if (s != "epic" && s != "dmux" && s != "assure") fail(k, "unknown scheme '" + s + "'");
        } else if (k == "key_sizes") {
            spec.key_sizes = string_list(v, k);
            for (const auto& s : spec.key_sizes) KeySize::parse(s);
        } else if (k == "assure_modes") {
            spec.assure_modes = string_list(v, k);
            for (auto& s : spec.assure_modes) s = assure_modes_label(parse_assure_modes(s));
        } else if (k == "variants") {
            spec.variants = static_cast<int>(positive(v, k));
        } else if (k == "base_seed") {
            if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
                fail(k, "expected a non-negative integer");
            spec.base_seed = v.get<std::uint64_t>();
        } else if (k == "scenarios") {
            spec.scenarios.clear();
            for (const auto& s : string_list(v, k)) {
                const auto sc = scenario_from_string(s);
                if (!sc) fail(k, "unknown scenario '" + s + "'");
                spec.scenarios.push_back(*sc);
            }
        } else if (k == "mode") {
            const auto m = v.is_string() ? mode_from_string(v.get<std::string>()) : std::nullopt;
            if (!m) fail(k, "expected \"dualrail\" or \"exact\"");
            spec.mode = *m;
        } else if (k == "timeout_ms") {
            spec.budget.time_ms = positive(v, k);
        } else if (k == "conflicts") {
            spec.budget.conflicts = positive(v, k);
        } else if (k == "unroll") {
            spec.unroll = static_cast<int>(positive(v, k));
        } else if (k == "exact_unknown_cap") {
            spec.exact_unknown_cap = static_cast<std::size_t>(positive(v, k));
        } else if (k == "dmux_retries") {
            spec.dmux_retries = static_cast<int>(positive(v, k));
        } else if (k == "persist_variants" || k == "record_timing") {
            if (!v.is_boolean()) fail(k, "expected a boolean");
            (k == "persist_variants" ? spec.persist_variants : spec.record_timing) = v.get<bool>();
        } else {
            fail("<root>", "unknown field '" + k + "'");
        }
    }
    if (spec.benchmark.empty() == spec.benchmark_file.empty()) fail("benchmark", "give exactly one of 'name' and 'file'");
    if (!spec.benchmark_file.empty() && !spec.params.empty()) fail("benchmark.params", "only valid with 'name'");
    if (spec.schemes.empty()) fail("schemes", "missing");
    return spec;
}

GeneratedBenchmark load_benchmark_file(const std::string& path) {
    GeneratedBenchmark bench;
    bench.name = path;
    const std::string text = read_file(path);
    if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".blif") == 0) {
        bench.gate = as_locked(parse_blif(text));
    } else if (text.find("\"nodes\"") != std::string::npos) {
        bench.word = parse_word_json(text);
    } else {
        bench.gate = parse_locked_json(text);
    }
    return bench;
}

VerdictRow make_verdict_row(const Netlist& analyzed, const LeakageVerdict& v, int variant_id, std::uint64_t seed,
                            const std::string& scheme, const std::string& key_size, ScenarioKind scenario,
                            std::string_view mode) {
    VerdictRow r{variant_id, seed, scheme, key_size, std::string(to_string(scenario)),
                 std::string(mode.empty() ? to_string(v.mode) : mode), v.bit, v.verdict, {}, {}, {}, v.solve_ms,
                 v.conflicts};
    if (v.verdict == Verdict::DT && v.witness) {
        r.output_id = analyzed.label(analyzed.outputs.at(v.witness->output).net);
        r.polarity = v.witness->polarity ? "1" : "0";
        r.witness = bits_to_hex(v.witness->controllable);
    }
    return r;
}

BatchResult run_batch(const BatchSpec& spec, int jobs, const std::string& out_dir) {
    if (spec.variants < 1) throw InputError("batch needs at least one variant");
    GeneratedBenchmark bench = spec.benchmark_file.empty() ? gen_benchmark(spec.benchmark, spec.params)
                                                           : load_benchmark_file(spec.benchmark_file);
    const LockedNetlist base = bench.gate_level();
    if (base.key.size() != base.key_inputs.size())
        throw InputError("benchmark carries locking-key inputs without a key");
    const Netlist reference = base.key.empty() ? base.netlist : apply_key(base, base.key);
    const bool sequential = reference.is_sequential();
    auto flatten = [&](const Netlist& n) { return sequential ? unroll(n, spec.unroll) : n; };
    const Netlist reference_flat = flatten(reference);

    std::vector<Group> groups{{"none", "0", 1}};
    for (const auto& s : spec.schemes) {
        if (s == "assure") {
            if (!bench.is_word()) throw InputError("scheme assure needs a word-level benchmark");
            for (const auto& m : spec.assure_modes) groups.push_back({s, m, spec.variants});
        } else {
            for (const auto& k : spec.key_sizes) groups.push_back({s, KeySize::parse(k).label(), spec.variants});
        }
    }

    std::vector<Variant> variants;
    for (std::size_t g = 0; g < groups.size(); ++g)
        for (int i = 0; i < groups[g].variants; ++i)
            variants.push_back({g, i, g == 0 ? 0 : spec.base_seed + static_cast<std::uint64_t>(i), {}, false, {}, false, {}});

    const bool persist = spec.persist_variants && !out_dir.empty();
    if (persist) std::filesystem::create_directories(std::filesystem::path(out_dir) / "variants");

    parallel_for(variants.size(), jobs, [&](std::size_t vi) {
        Variant& v = variants[vi];
        const Group& g = groups[v.group];
        if (v.group == 0) {
            v.analysis = reference_flat;
            v.ok = true;
            return;
        }
        LockedNetlist locked;
        try {
            if (g.scheme == "assure") {
                locked = lower_locked(assure_lock(*bench.word, parse_assure_modes(g.key_size), v.seed));
            } else {
                LockingConfig cfg;
                cfg.scheme = *lock_scheme_from_string(g.scheme);
                cfg.size = KeySize::parse(g.key_size);
                cfg.seed = v.seed;
                cfg.max_retries = spec.dmux_retries;
                locked = lock(base, cfg);
            }
        } catch (const SoundnessError&) {
            throw;
        } catch (const Error& e) {
            v.error = e.what();
            return;
        }
        const Netlist unlocked_flat = flatten(apply_key(locked, locked.key));
        const bool small = unlocked_flat.inputs.size() <= 16;
        const auto eq = equivalence_check(unlocked_flat, reference_flat,
                                          small ? EquivalenceMethod::Exhaustive : EquivalenceMethod::SatMiter);
        v.control = {v.id, v.seed, g.scheme, g.key_size, locked.key.size(), small ? "exhaustive" : "sat_miter", eq.equal};
        v.has_control = true;
        if (persist) {
            std::string stem = g.scheme + "_" + g.key_size + "_v" + std::to_string(v.id) + ".json";
            for (char& c : stem)
                if (c == '%') c = 'p';
                else if (c == '+') c = '-';
            write_file((std::filesystem::path(out_dir) / "variants" / stem).string(), emit_locked_json(locked));
        }
        v.analysis = flatten(locked.netlist);
        v.ok = true;
    });

    std::vector<Task> tasks;
    for (std::size_t vi = 0; vi < variants.size(); ++vi) {
        if (!variants[vi].ok) continue;
        const auto bits = secret_bits(variants[vi].analysis);
        for (ScenarioKind sc : spec.scenarios)
            for (int b : bits) tasks.push_back({vi, sc, b});
    }

    ClassifyOptions opt;
    opt.mode = spec.mode;
    opt.budget = spec.budget;
    opt.exact_unknown_cap = spec.exact_unknown_cap;
    std::vector<VerdictRow> rows(tasks.size());
    std::vector<std::string> task_errors(tasks.size());
    parallel_for(tasks.size(), jobs, [&](std::size_t ti) {
        const Task& t = tasks[ti];
        const Variant& v = variants[t.variant];
        const Group& g = groups[v.group];
        try {
            const LeakageVerdict lv = classify_bit(v.analysis, t.bit, t.scenario, opt);
            rows[ti] = make_verdict_row(v.analysis, lv, v.id, v.seed, g.scheme, g.key_size, t.scenario);
        } catch (const SoundnessError&) {
            throw;
        } catch (const Error& e) {
            rows[ti] = {v.id, v.seed, g.scheme, g.key_size, std::string(to_string(t.scenario)),
                        std::string(to_string(spec.mode)), t.bit, Verdict::ND, {}, {}, {}, 0.0, 0};
            task_errors[ti] = e.what();
        }
    });

    BatchResult res;
    res.verdicts = std::move(rows);
    for (const Variant& v : variants) {
        const Group& g = groups[v.group];
        if (v.has_control) res.controls.push_back(v.control);
        if (!v.error.empty()) res.errors.push_back({v.id, v.seed, g.scheme, g.key_size, "lock", clean(v.error)});
    }
    for (std::size_t ti = 0; ti < tasks.size(); ++ti) {
        if (task_errors[ti].empty()) continue;
        const VerdictRow& r = res.verdicts[ti];
        res.errors.push_back({r.variant_id, r.seed, r.scheme, r.key_size, "classify",
                              clean("bit " + std::to_string(r.bit_index) + ": " + task_errors[ti])});
    }
    return res;
}

std::string verdicts_to_csv(const std::vector<VerdictRow>& rows, bool with_timing) {
    std::ostringstream out;
    out << kVerdictHeader << '\n';
    for (const auto& r : rows) {
        out << r.variant_id << ',' << r.seed << ',' << r.scheme << ',' << r.key_size << ',' << r.scenario << ','
            << r.mode << ',' << r.bit_index << ',' << to_string(r.verdict) << ',' << r.output_id << ',' << r.polarity
            << ',' << r.witness << ',' << (with_timing ? format_ms(r.solve_ms) : "0") << ',' << r.conflicts << '\n';
    }
    return out.str();
}

std::vector<VerdictRow> parse_verdicts_csv(std::string_view text) {
    std::vector<VerdictRow> rows;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        const std::string where = "verdicts.csv line " + std::to_string(line_no);
        if (line_no == 1) {
            if (line != kVerdictHeader) throw InputError(where + ": unexpected header");
            continue;
        }
        if (line.empty()) continue;
        std::vector<std::string_view> f;
        std::size_t start = 0;
        for (;;) {
            const std::size_t c = line.find(',', start);
            f.push_back(line.substr(start, c == std::string_view::npos ? std::string_view::npos : c - start));
            if (c == std::string_view::npos) break;
            start = c + 1;
        }
        if (f.size() != 13) throw InputError(where + ": expected 13 fields, got " + std::to_string(f.size()));
        VerdictRow r;
        r.variant_id = parse_number<int>(f[0], where);
        r.seed = parse_number<std::uint64_t>(f[1], where);
        r.scheme = f[2];
        r.key_size = f[3];
        r.scenario = f[4];
        r.mode = f[5];
        r.bit_index = parse_number<int>(f[6], where);
        if (f[7] == "DT") r.verdict = Verdict::DT;
        else if (f[7] == "S") r.verdict = Verdict::S;
        else if (f[7] == "ND") r.verdict = Verdict::ND;
        else throw InputError(where + ": unknown verdict '" + std::string(f[7]) + "'");
        r.output_id = f[8];
        r.polarity = f[9];
        r.witness = f[10];
        r.solve_ms = std::stod(std::string(f[11]));
        r.conflicts = parse_number<std::int64_t>(f[12], where);
        rows.push_back(std::move(r));
    }
    if (line_no == 0) throw InputError("verdicts.csv is empty");
    return rows;
}

std::string controls_to_csv(const std::vector<ControlRow>& rows) {
    std::ostringstream out;
    out << "variant_id,seed,scheme,key_size,key_bits,method,equivalent\n";
    for (const auto& r : rows)
        out << r.variant_id << ',' << r.seed << ',' << r.scheme << ',' << r.key_size << ',' << r.key_bits << ','
            << r.method << ',' << (r.equivalent ? "1" : "0") << '\n';
    return out.str();
}

std::string errors_to_csv(const std::vector<ErrorRow>& rows) {
    std::ostringstream out;
    out << "variant_id,seed,scheme,key_size,stage,message\n";
    for (const auto& r : rows)
        out << r.variant_id << ',' << r.seed << ',' << r.scheme << ',' << r.key_size << ',' << r.stage << ','
            << r.message << '\n';
    return out.str();
}

void write_batch_outputs(const BatchResult& result, const BatchSpec& spec, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    write_file((dir / "verdicts.csv").string(), verdicts_to_csv(result.verdicts, spec.record_timing));
    write_file((dir / "controls.csv").string(), controls_to_csv(result.controls));
    write_file((dir / "errors.csv").string(), errors_to_csv(result.errors));
    std::size_t failures = 0;
    for (const auto& c : result.controls) failures += c.equivalent ? 0 : 1;
    write_report(aggregate_groups(result.verdicts), failures, result.errors.size(), (dir / "report.json").string());
}

} // namespace lockleak
