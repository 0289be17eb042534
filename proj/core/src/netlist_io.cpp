#include "lockleak/netlist_io.hpp"

#include "lockleak/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

namespace lockleak {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

std::string key_to_string(const std::vector<bool>& key) {
    std::string s;
    s.reserve(key.size());
    for (bool b : key) s.push_back(b ? '1' : '0');
    return s;
}

std::vector<bool> key_from_string(const std::string& text) {
    std::vector<bool> key;
    key.reserve(text.size());
    for (char c : text) {
        if (c != '0' && c != '1') throw InputError("key string may only contain '0' and '1': " + text);
        key.push_back(c == '1');
    }
    return key;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
}

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& why) {
    throw InputError("netlist JSON: " + field + ": " + why);
}

json parse_document(std::string_view text) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        // Translate the byte offset into a line number for the diagnostic.
        std::size_t line = 1;
        for (std::size_t i = 0; i < e.byte && i < text.size(); ++i)
            if (text[i] == '\n') ++line;
        throw InputError("netlist JSON: line " + std::to_string(line) + ": " + e.what());
    }
}

void check_fields(const json& obj, const std::string& where, std::initializer_list<std::string_view> allowed) {
    if (!obj.is_object()) fail(where, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (std::string_view a : allowed) ok = ok || it.key() == a;
        if (!ok) fail(where, "unknown field '" + it.key() + "'");
    }
}

const json& require(const json& obj, const std::string& where, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) fail(where, std::string("missing field '") + key + "'");
    return *it;
}

std::string require_string(const json& v, const std::string& where) {
    if (!v.is_string()) fail(where, "expected a string");
    return v.get<std::string>();
}

std::string stored_name(const std::string& ref) { return !ref.empty() && ref[0] == '$' ? std::string{} : ref; }

class NetTable {
public:
    explicit NetTable(Netlist& n) : n_(n) {}

    NetId define(const std::string& ref, const std::string& where) {
        if (ref.empty()) fail(where, "empty net name");
        if (by_ref_.count(ref)) fail(where, "net '" + ref + "' is driven more than once");
        const NetId id = n_.add_net(stored_name(ref));
        by_ref_.emplace(ref, id);
        return id;
    }

    NetId resolve(const std::string& ref, const std::string& where) const {
        auto it = by_ref_.find(ref);
        if (it == by_ref_.end()) fail(where, "reference to undriven net '" + ref + "'");
        return it->second;
    }

    std::unordered_map<std::string, NetId> take() { return std::move(by_ref_); }

private:
    Netlist& n_;
    std::unordered_map<std::string, NetId> by_ref_;
};

using RefMap = std::unordered_map<std::string, NetId>;

Netlist netlist_from_json(const json& doc, std::initializer_list<std::string_view> allowed_top, RefMap* refs = nullptr) {
    check_fields(doc, "<root>", allowed_top);
    Netlist n;
    NetTable nets(n);

    const json& inputs = require(doc, "<root>", "inputs");
    if (!inputs.is_array()) fail("inputs", "expected an array");
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const std::string where = "inputs[" + std::to_string(i) + "]";
        const json& in = inputs[i];
        check_fields(in, where, {"name", "role", "bit"});
        const std::string name = require_string(require(in, where, "name"), where + ".name");
        const auto role = port_role_from_string(require_string(require(in, where, "role"), where + ".role"));
        if (!role) fail(where + ".role", "expected secret|lolo_key|operational");
        const json& bit = require(in, where, "bit");
        if (!bit.is_number_integer() || bit.get<long long>() < 0) fail(where + ".bit", "expected a non-negative integer");
        const NetId net = nets.define(name, where + ".name");
        n.inputs.push_back({net, *role, bit.get<int>()});
    }

    const json empty = json::array();
    const json& gates = doc.contains("gates") ? doc["gates"] : empty;
    const json& dffs = doc.contains("dffs") ? doc["dffs"] : empty;
    if (!gates.is_array()) fail("gates", "expected an array");
    if (!dffs.is_array()) fail("dffs", "expected an array");

    // Nets are numbered inputs, DFF outputs, gate outputs: the canonical order.
    std::vector<NetId> dff_q;
    for (std::size_t i = 0; i < dffs.size(); ++i) {
        const std::string where = "dffs[" + std::to_string(i) + "]";
        check_fields(dffs[i], where, {"d", "q", "init"});
        dff_q.push_back(nets.define(require_string(require(dffs[i], where, "q"), where + ".q"), where + ".q"));
    }
    std::vector<NetId> gate_out;
    for (std::size_t i = 0; i < gates.size(); ++i) {
        const std::string where = "gates[" + std::to_string(i) + "]";
        check_fields(gates[i], where, {"kind", "in", "out"});
        gate_out.push_back(nets.define(require_string(require(gates[i], where, "out"), where + ".out"), where + ".out"));
    }

    for (std::size_t i = 0; i < gates.size(); ++i) {
        const std::string where = "gates[" + std::to_string(i) + "]";
        const auto kind = gate_kind_from_string(require_string(require(gates[i], where, "kind"), where + ".kind"));
        if (!kind || *kind == GateKind::Dff) fail(where + ".kind", "unknown combinational gate kind");
        const json& ins = require(gates[i], where, "in");
        if (!ins.is_array()) fail(where + ".in", "expected an array");
        std::vector<NetId> in_nets;
        for (std::size_t p = 0; p < ins.size(); ++p) {
            const std::string pw = where + ".in[" + std::to_string(p) + "]";
            in_nets.push_back(nets.resolve(require_string(ins[p], pw), pw));
        }
        n.add_gate_driving(*kind, std::move(in_nets), gate_out[i]);
    }
    for (std::size_t i = 0; i < dffs.size(); ++i) {
        const std::string where = "dffs[" + std::to_string(i) + "]";
        const NetId d = nets.resolve(require_string(require(dffs[i], where, "d"), where + ".d"), where + ".d");
        InitValue init = InitValue::Zero;
        if (auto it = dffs[i].find("init"); it != dffs[i].end()) {
            if (it->is_number_integer() && (it->get<int>() == 0 || it->get<int>() == 1))
                init = it->get<int>() == 1 ? InitValue::One : InitValue::Zero;
            else if (it->is_string() && it->get<std::string>() == "x")
                init = InitValue::X;
            else
                fail(where + ".init", "expected 0, 1 or \"x\"");
        }
        n.gates.push_back(Gate{GateKind::Dff, {d}, dff_q[i], init});
    }

    const json& outputs = require(doc, "<root>", "outputs");
    if (!outputs.is_array()) fail("outputs", "expected an array");
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        const std::string where = "outputs[" + std::to_string(i) + "]";
        n.add_output(nets.resolve(require_string(outputs[i], where), where));
    }

    const auto violations = validate(n);
    if (!violations.empty()) {
        std::string msg = "netlist JSON: invalid netlist:";
        for (const Violation& v : violations) msg += "\n  [" + v.rule + "] " + v.message;
        throw InputError(msg);
    }
    if (refs) *refs = nets.take();
    return n;
}

ojson netlist_to_json(const Netlist& n) {
    ojson doc;
    ojson inputs = ojson::array();
    for (const PrimaryInput& in : n.inputs)
        inputs.push_back(ojson{{"name", n.label(in.net)}, {"role", std::string(to_string(in.role))}, {"bit", in.bit}});
    doc["inputs"] = std::move(inputs);
    ojson outputs = ojson::array();
    for (const PrimaryOutput& o : n.outputs) outputs.push_back(n.label(o.net));
    doc["outputs"] = std::move(outputs);
    ojson gates = ojson::array();
    ojson dffs = ojson::array();
    for (const Gate& g : n.gates) {
        if (g.kind == GateKind::Dff) {
            ojson d{{"d", n.label(g.inputs.at(0))}, {"q", n.label(g.output)}};
            if (g.init == InitValue::X)
                d["init"] = "x";
            else
                d["init"] = g.init == InitValue::One ? 1 : 0;
            dffs.push_back(std::move(d));
            continue;
        }
        ojson ins = ojson::array();
        for (NetId in : g.inputs) ins.push_back(n.label(in));
        gates.push_back(ojson{{"kind", std::string(to_string(g.kind))}, {"in", std::move(ins)}, {"out", n.label(g.output)}});
    }
    doc["gates"] = std::move(gates);
    doc["dffs"] = std::move(dffs);
    return doc;
}

// One array element per line keeps large files diffable.
std::string format_document(const ojson& doc) {
    std::string out = "{\n";
    std::size_t k = 0;
    for (auto it = doc.begin(); it != doc.end(); ++it, ++k) {
        out += "  \"" + it.key() + "\": ";
        if (it->is_array() && !it->empty()) {
            out += "[\n";
            for (std::size_t i = 0; i < it->size(); ++i) {
                out += "    " + (*it)[i].dump();
                out += i + 1 < it->size() ? ",\n" : "\n";
            }
            out += "  ]";
        } else {
            out += it->dump();
        }
        out += k + 1 < doc.size() ? ",\n" : "\n";
    }
    out += "}\n";
    return out;
}

// Gates are emitted combinational-first; DFF gates live in a separate array and
// parse back after them. Reorder so the in-memory gate list matches the file.
Netlist file_order(const Netlist& n) {
    Netlist out = n;
    out.gates.clear();
    for (const Gate& g : n.gates)
        if (g.kind != GateKind::Dff) out.gates.push_back(g);
    for (const Gate& g : n.gates)
        if (g.kind == GateKind::Dff) out.gates.push_back(g);
    return out;
}

std::vector<std::size_t> gate_index_map(const Netlist& n) {
    std::vector<std::size_t> map(n.gates.size());
    std::size_t next = 0;
    for (std::size_t g = 0; g < n.gates.size(); ++g)
        if (n.gates[g].kind != GateKind::Dff) map[g] = next++;
    for (std::size_t g = 0; g < n.gates.size(); ++g)
        if (n.gates[g].kind == GateKind::Dff) map[g] = next++;
    return map;
}

} // namespace

Netlist parse_json(std::string_view text) {
    return netlist_from_json(parse_document(text), {"inputs", "outputs", "gates", "dffs"});
}

std::string emit_json(const Netlist& netlist) {
    return format_document(netlist_to_json(canonicalize(file_order(netlist))));
}

LockedNetlist parse_locked_json(std::string_view text) {
    const json doc = parse_document(text);
    LockedNetlist locked;
    RefMap refs;
    locked.netlist = netlist_from_json(doc, {"inputs", "outputs", "gates", "dffs", "key", "key_inputs", "provenance"}, &refs);
    const Netlist& n = locked.netlist;
    auto lookup = [&](const std::string& ref) -> std::optional<NetId> {
        auto it = refs.find(ref);
        if (it == refs.end()) return std::nullopt;
        return it->second;
    };
    if (doc.contains("key")) locked.key = key_from_string(require_string(doc["key"], "key"));
    if (doc.contains("key_inputs")) {
        const json& ki = doc["key_inputs"];
        if (!ki.is_array()) fail("key_inputs", "expected an array");
        for (std::size_t i = 0; i < ki.size(); ++i) {
            const std::string where = "key_inputs[" + std::to_string(i) + "]";
            const std::string name = require_string(ki[i], where);
            auto net = lookup(name);
            if (net && std::none_of(n.inputs.begin(), n.inputs.end(),
                                    [&](const PrimaryInput& in) { return in.net == *net; }))
                net.reset();
            if (!net) fail(where, "'" + name + "' is not a primary input");
            locked.key_inputs.push_back(*net);
        }
    }
    if (locked.key.size() != locked.key_inputs.size())
        fail("key", "length " + std::to_string(locked.key.size()) + " does not match " +
                        std::to_string(locked.key_inputs.size()) + " key inputs");
    if (doc.contains("provenance")) {
        const json& prov = doc["provenance"];
        if (!prov.is_array()) fail("provenance", "expected an array");
        for (std::size_t i = 0; i < prov.size(); ++i) {
            const std::string where = "provenance[" + std::to_string(i) + "]";
            check_fields(prov[i], where, {"scheme", "detail", "gates", "hosts"});
            KeyBitProvenance p;
            p.scheme = require_string(require(prov[i], where, "scheme"), where + ".scheme");
            if (prov[i].contains("detail")) p.detail = require_string(prov[i]["detail"], where + ".detail");
            if (prov[i].contains("gates"))
                for (const json& g : prov[i]["gates"]) {
                    if (!g.is_number_unsigned() || g.get<std::size_t>() >= n.gates.size())
                        fail(where + ".gates", "gate index out of range");
                    p.inserted_gates.push_back(g.get<std::size_t>());
                }
            if (prov[i].contains("hosts"))
                for (const json& h : prov[i]["hosts"]) {
                    const std::string name = require_string(h, where + ".hosts");
                    const auto net = lookup(name);
                    if (!net) fail(where + ".hosts", "unknown net '" + name + "'");
                    p.hosts.push_back(*net);
                }
            locked.provenance.push_back(std::move(p));
        }
    }
    return locked;
}

std::string emit_locked_json(const LockedNetlist& locked) {
    const Netlist ordered = file_order(locked.netlist);
    const auto gmap = gate_index_map(locked.netlist);
    // canonicalize() keeps gate order, so only net ids need translating.
    const Netlist canon = canonicalize(ordered);
    std::vector<NetId> net_map(ordered.net_count());
    {
        // Recover the renumbering by replaying canonicalize's assignment order.
        std::vector<NetId> remap(ordered.net_count(), kNoNet);
        NetId next = 0;
        auto assign = [&](NetId old) {
            if (remap[old] == kNoNet) remap[old] = next++;
        };
        for (const PrimaryInput& in : ordered.inputs) assign(in.net);
        for (const Gate& g : ordered.gates)
            if (g.kind == GateKind::Dff) assign(g.output);
        for (const Gate& g : ordered.gates) assign(g.output);
        for (NetId old = 0; old < ordered.net_count(); ++old) assign(old);
        net_map = std::move(remap);
    }

    ojson doc = netlist_to_json(canon);
    doc["key"] = key_to_string(locked.key);
    ojson ki = ojson::array();
    for (NetId net : locked.key_inputs) ki.push_back(canon.label(net_map[net]));
    doc["key_inputs"] = std::move(ki);
    ojson prov = ojson::array();
    for (const KeyBitProvenance& p : locked.provenance) {
        ojson gates = ojson::array();
        for (std::size_t g : p.inserted_gates) gates.push_back(gmap[g]);
        ojson hosts = ojson::array();
        for (NetId h : p.hosts) hosts.push_back(canon.label(net_map[h]));
        prov.push_back(ojson{{"scheme", p.scheme}, {"detail", p.detail}, {"gates", std::move(gates)}, {"hosts", std::move(hosts)}});
    }
    doc["provenance"] = std::move(prov);
    return format_document(doc);
}

} // namespace lockleak
