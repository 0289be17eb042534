#include "lockleak/report.hpp"

#include "lockleak/errors.hpp"
#include "lockleak/netlist_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

namespace lockleak {

std::string round4(std::uint64_t num, std::uint64_t den) {
    if (den == 0) throw InputError("percentage with zero denominator");
    __extension__ typedef unsigned __int128 u128;
    const u128 scaled = static_cast<u128>(num) * 1000000u; // percent with 4 decimals
    u128 q = scaled / den;
    const u128 r = scaled % den;
    if (2 * r > den || (2 * r == den && (q & 1))) ++q;
    const auto whole = static_cast<std::uint64_t>(q / 10000);
    const auto frac = static_cast<unsigned>(q % 10000);
    char buf[8];
    std::snprintf(buf, sizeof buf, "%04u", frac);
    return std::to_string(whole) + "." + buf;
}

std::string AggregateReport::average_detection_rate() const {
    if (secret_length == 0 || variants == 0) return round4(0, 1);
    return round4(total_dt, secret_length * variants);
}

std::string AggregateReport::file_stem() const {
    std::string out;
    for (char c : scheme + "_" + key_size + "_" + scenario) {
        if (c == '%') out += "pct";
        else if (c == '+') out += '-';
        else if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-') out += c;
        else out += '_';
    }
    return out;
}

AggregateReport aggregate(const std::vector<VerdictRow>& rows) {
    if (rows.empty()) throw InputError("cannot aggregate an empty verdict table");
    AggregateReport r;
    r.scheme = rows[0].scheme;
    r.key_size = rows[0].key_size;
    r.scenario = rows[0].scenario;
    r.mode = rows[0].mode;
    std::set<int> bit_set;
    std::map<std::uint64_t, std::uint64_t> dt_per_variant; // keyed by variant_id
    std::set<std::pair<int, int>> seen;
    for (const auto& row : rows) {
        if (row.scheme != r.scheme || row.key_size != r.key_size || row.scenario != r.scenario || row.mode != r.mode)
            throw InputError("verdict table mixes groups");
        if (!seen.insert({row.variant_id, row.bit_index}).second)
            throw InputError("duplicate verdict for variant " + std::to_string(row.variant_id) + " bit " +
                             std::to_string(row.bit_index));
        bit_set.insert(row.bit_index);
        dt_per_variant[static_cast<std::uint64_t>(row.variant_id)] += row.verdict == Verdict::DT ? 1 : 0;
    }
    r.variants = dt_per_variant.size();
    r.secret_length = bit_set.size();
    if (seen.size() != r.variants * r.secret_length) throw InputError("verdict table is incomplete");

    std::map<int, std::size_t> slot;
    for (int b : bit_set) {
        slot[b] = r.bits.size();
        r.bits.push_back({b, 0, 0, 0});
    }
    for (const auto& row : rows) {
        BitDistribution& d = r.bits[slot[row.bit_index]];
        (row.verdict == Verdict::DT ? d.dt : row.verdict == Verdict::S ? d.s : d.nd) += 1;
    }
    r.histogram.assign(r.secret_length + 1, 0);
    r.min_dt = r.secret_length;
    for (const auto& [v, dt] : dt_per_variant) {
        ++r.histogram[dt];
        r.total_dt += dt;
        r.min_dt = std::min(r.min_dt, dt);
        r.max_dt = std::max(r.max_dt, dt);
    }
    return r;
}

std::vector<AggregateReport> aggregate_groups(const std::vector<VerdictRow>& rows) {
    using Key = std::tuple<std::string, std::string, std::string, std::string>;
    std::vector<Key> order;
    std::map<Key, std::vector<VerdictRow>> split;
    for (const auto& row : rows) {
        Key k{row.scheme, row.key_size, row.scenario, row.mode};
        auto [it, fresh] = split.try_emplace(k);
        if (fresh) order.push_back(k);
        it->second.push_back(row);
    }
    std::vector<AggregateReport> out;
    for (const auto& k : order) out.push_back(aggregate(split[k]));
    return out;
}

std::string bits_csv(const AggregateReport& r) {
    std::ostringstream out;
    out << "bit,dt_pct,s_pct,nd_pct\n";
    for (const auto& b : r.bits)
        out << b.bit << ',' << round4(b.dt, r.variants) << ',' << round4(b.s, r.variants) << ','
            << round4(b.nd, r.variants) << '\n';
    return out.str();
}

std::string hist_csv(const AggregateReport& r) {
    std::ostringstream out;
    out << "leaked_bits,variant_count\n";
    for (std::size_t k = 0; k < r.histogram.size(); ++k) out << k << ',' << r.histogram[k] << '\n';
    return out.str();
}

std::string report_json(const std::vector<AggregateReport>& groups, std::size_t control_failures,
                        std::size_t variant_errors) {
    using nlohmann::ordered_json;
    ordered_json doc;
    doc["format"] = "lockleak-report";
    doc["version"] = 1;
    ordered_json gs = ordered_json::array();
    for (const auto& g : groups) {
        ordered_json j;
        j["scheme"] = g.scheme;
        j["key_size"] = g.key_size;
        j["scenario"] = g.scenario;
        j["mode"] = g.mode;
        j["variants"] = g.variants;
        j["secret_length"] = g.secret_length;
        j["average_detection_rate"] = g.average_detection_rate();
        j["total_dt"] = g.total_dt;
        j["min_dt"] = g.min_dt;
        j["max_dt"] = g.max_dt;
        ordered_json bits = ordered_json::array();
        for (const auto& b : g.bits) {
            ordered_json e;
            e["bit"] = b.bit;
            e["dt"] = b.dt;
            e["s"] = b.s;
            e["nd"] = b.nd;
            e["dt_pct"] = round4(b.dt, g.variants);
            e["s_pct"] = round4(b.s, g.variants);
            e["nd_pct"] = round4(b.nd, g.variants);
            bits.push_back(std::move(e));
        }
        j["bits"] = std::move(bits);
        j["histogram"] = g.histogram;
        j["bits_csv"] = g.file_stem() + "_bits.csv";
        j["hist_csv"] = g.file_stem() + "_hist.csv";
        gs.push_back(std::move(j));
    }
    doc["groups"] = std::move(gs);
    doc["control_failures"] = control_failures;
    doc["variant_errors"] = variant_errors;
    return doc.dump(2) + "\n";
}

void write_report(const std::vector<AggregateReport>& groups, std::size_t control_failures,
                  std::size_t variant_errors, const std::string& json_path) {
    namespace fs = std::filesystem;
    const fs::path path(json_path);
    const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
    fs::create_directories(dir);
    for (const auto& g : groups) {
        write_file((dir / (g.file_stem() + "_bits.csv")).string(), bits_csv(g));
        write_file((dir / (g.file_stem() + "_hist.csv")).string(), hist_csv(g));
    }
    write_file(json_path, report_json(groups, control_failures, variant_errors));
}

} // namespace lockleak
