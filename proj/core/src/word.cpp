#include "lockleak/word.hpp"

#include "lockleak/errors.hpp"

#include <json.hpp>

#include <array>
#include <set>

namespace lockleak {

namespace {

constexpr std::array<std::string_view, 12> kOpNames = {"const", "input", "add",  "sub", "xor", "xnor",
                                                       "and",   "or",    "cmp",  "mux", "shl", "shr"};
constexpr std::array<std::string_view, 4> kCmpNames = {"gt", "le", "eq", "ne"};

int arity(WordOp op) {
    switch (op) {
    case WordOp::Const:
    case WordOp::Input: return 0;
    case WordOp::Shl:
    case WordOp::Shr: return 1;
    case WordOp::Mux: return 3;
    default: return 2;
    }
}

} // namespace

std::string_view to_string(WordOp op) { return kOpNames[static_cast<std::size_t>(op)]; }

std::optional<WordOp> word_op_from_string(std::string_view text) {
    for (std::size_t i = 0; i < kOpNames.size(); ++i)
        if (kOpNames[i] == text) return static_cast<WordOp>(i);
    return std::nullopt;
}

std::string_view to_string(CmpKind k) { return kCmpNames[static_cast<std::size_t>(k)]; }

std::optional<CmpKind> cmp_kind_from_string(std::string_view text) {
    for (std::size_t i = 0; i < kCmpNames.size(); ++i)
        if (kCmpNames[i] == text) return static_cast<CmpKind>(i);
    return std::nullopt;
}

CmpKind complement(CmpKind k) {
    switch (k) {
    case CmpKind::Gt: return CmpKind::Le;
    case CmpKind::Le: return CmpKind::Gt;
    case CmpKind::Eq: return CmpKind::Ne;
    case CmpKind::Ne: return CmpKind::Eq;
    }
    return k;
}

std::uint64_t width_mask(int width) { return width >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << width) - 1; }

std::size_t WordDesign::constant(int width, std::uint64_t value) {
    WordNode n;
    n.op = WordOp::Const;
    n.width = width;
    n.value = value;
    nodes.push_back(std::move(n));
    return nodes.size() - 1;
}

std::size_t WordDesign::input(std::string name, int width, PortRole role) {
    WordNode n;
    n.op = WordOp::Input;
    n.width = width;
    n.name = std::move(name);
    n.role = role;
    nodes.push_back(std::move(n));
    return nodes.size() - 1;
}

std::size_t WordDesign::op(WordOp o, std::size_t a, std::size_t b) {
    WordNode n;
    n.op = o;
    n.args = {a, b};
    n.width = nodes.at(a).width;
    nodes.push_back(std::move(n));
    return nodes.size() - 1;
}

std::size_t WordDesign::cmp(CmpKind kind, std::size_t a, std::size_t b) {
    WordNode n;
    n.op = WordOp::Cmp;
    n.cmp = kind;
    n.args = {a, b};
    n.width = 1;
    nodes.push_back(std::move(n));
    return nodes.size() - 1;
}

std::size_t WordDesign::mux(std::size_t cond, std::size_t then_node, std::size_t else_node) {
    WordNode n;
    n.op = WordOp::Mux;
    n.args = {cond, then_node, else_node};
    n.width = nodes.at(then_node).width;
    nodes.push_back(std::move(n));
    return nodes.size() - 1;
}

std::size_t WordDesign::shift(WordOp o, std::size_t a, int amount) {
    WordNode n;
    n.op = o;
    n.args = {a};
    n.amount = amount;
    n.width = nodes.at(a).width;
    nodes.push_back(std::move(n));
    return nodes.size() - 1;
}

std::vector<std::size_t> WordDesign::input_nodes() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].op == WordOp::Input) out.push_back(i);
    return out;
}

void validate(const WordDesign& d) {
    auto bad = [](std::size_t i, const std::string& why) {
        throw InputError("word design: node " + std::to_string(i) + ": " + why);
    };
    std::set<std::string> names;
    for (std::size_t i = 0; i < d.nodes.size(); ++i) {
        const WordNode& n = d.nodes[i];
        if (n.width < 1 || n.width > 64) bad(i, "width must be in 1..64");
        if (static_cast<int>(n.args.size()) != arity(n.op))
            bad(i, std::string(to_string(n.op)) + " takes " + std::to_string(arity(n.op)) + " operands");
        for (std::size_t a : n.args)
            if (a >= i) bad(i, "operand " + std::to_string(a) + " is not an earlier node");
        switch (n.op) {
        case WordOp::Const:
            if (n.value & ~width_mask(n.width)) bad(i, "constant does not fit its width");
            break;
        case WordOp::Input:
            if (n.name.empty()) bad(i, "input without a name");
            if (!names.insert(n.name).second) bad(i, "duplicate name '" + n.name + "'");
            break;
        case WordOp::Cmp:
            if (n.width != 1) bad(i, "comparison yields width 1");
            if (d.nodes[n.args[0]].width != d.nodes[n.args[1]].width) bad(i, "operand widths differ");
            break;
        case WordOp::Mux:
            if (d.nodes[n.args[0]].width != 1) bad(i, "mux condition must have width 1");
            if (d.nodes[n.args[1]].width != n.width || d.nodes[n.args[2]].width != n.width)
                bad(i, "mux operand widths differ");
            break;
        case WordOp::Shl:
        case WordOp::Shr:
            if (d.nodes[n.args[0]].width != n.width) bad(i, "shift width differs from its operand");
            if (n.amount < 0 || n.amount > n.width) bad(i, "shift amount out of range");
            break;
        default:
            if (d.nodes[n.args[0]].width != n.width || d.nodes[n.args[1]].width != n.width)
                bad(i, "operand widths differ");
            break;
        }
    }
    if (d.outputs.empty()) throw InputError("word design: no outputs");
    for (const auto& o : d.outputs) {
        if (o.node >= d.nodes.size()) throw InputError("word design: output '" + o.name + "' references a missing node");
        if (o.name.empty() || !names.insert(o.name).second)
            throw InputError("word design: output name '" + o.name + "' is empty or already used");
    }
}

std::vector<std::uint64_t> word_eval(const WordDesign& d, const std::map<std::string, std::uint64_t>& inputs) {
    std::vector<std::uint64_t> val(d.nodes.size(), 0);
    for (std::size_t i = 0; i < d.nodes.size(); ++i) {
        const WordNode& n = d.nodes[i];
        const std::uint64_t m = width_mask(n.width);
        auto arg = [&](std::size_t k) { return val[n.args[k]]; };
        std::uint64_t r = 0;
        switch (n.op) {
        case WordOp::Const: r = n.value; break;
        case WordOp::Input: {
            auto it = inputs.find(n.name);
            if (it == inputs.end()) throw InputError("word_eval: missing value for input '" + n.name + "'");
            r = it->second;
            break;
        }
        case WordOp::Add: r = arg(0) + arg(1); break;
        case WordOp::Sub: r = arg(0) - arg(1); break;
        case WordOp::BitXor: r = arg(0) ^ arg(1); break;
        case WordOp::BitXnor: r = ~(arg(0) ^ arg(1)); break;
        case WordOp::BitAnd: r = arg(0) & arg(1); break;
        case WordOp::BitOr: r = arg(0) | arg(1); break;
        case WordOp::Cmp:
            switch (n.cmp) {
            case CmpKind::Gt: r = arg(0) > arg(1); break;
            case CmpKind::Le: r = arg(0) <= arg(1); break;
            case CmpKind::Eq: r = arg(0) == arg(1); break;
            case CmpKind::Ne: r = arg(0) != arg(1); break;
            }
            break;
        case WordOp::Mux: r = arg(0) ? arg(1) : arg(2); break;
        case WordOp::Shl: r = n.amount >= 64 ? 0 : arg(0) << n.amount; break;
        case WordOp::Shr: r = n.amount >= 64 ? 0 : arg(0) >> n.amount; break;
        }
        val[i] = r & m;
    }
    std::vector<std::uint64_t> out;
    for (const auto& o : d.outputs) out.push_back(val[o.node]);
    return out;
}

namespace {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& where, const std::string& why) {
    throw InputError("word JSON: " + where + ": " + why);
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

std::int64_t require_int(const json& v, const std::string& where) {
    if (!v.is_number_integer()) fail(where, "expected an integer");
    return v.get<std::int64_t>();
}

std::string require_string(const json& v, const std::string& where) {
    if (!v.is_string()) fail(where, "expected a string");
    return v.get<std::string>();
}

} // namespace

WordDesign parse_word_json(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        std::size_t line = 1;
        for (std::size_t i = 0; i < e.byte && i < text.size(); ++i)
            if (text[i] == '\n') ++line;
        throw InputError("word JSON: line " + std::to_string(line) + ": " + e.what());
    }
    check_fields(doc, "<root>", {"inputs", "nodes", "outputs"});
    WordDesign d;
    const json& inputs = require(doc, "<root>", "inputs");
    if (!inputs.is_array()) fail("inputs", "expected an array");
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const std::string where = "inputs[" + std::to_string(i) + "]";
        check_fields(inputs[i], where, {"name", "width", "role"});
        const auto role = port_role_from_string(require_string(require(inputs[i], where, "role"), where + ".role"));
        if (!role) fail(where + ".role", "unknown role");
        d.input(require_string(require(inputs[i], where, "name"), where + ".name"),
                static_cast<int>(require_int(require(inputs[i], where, "width"), where + ".width")), *role);
    }
    const json empty = json::array();
    const json& nodes = doc.contains("nodes") ? doc["nodes"] : empty;
    if (!nodes.is_array()) fail("nodes", "expected an array");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const std::string where = "nodes[" + std::to_string(i) + "]";
        const json& j = nodes[i];
        check_fields(j, where, {"op", "args", "width", "value", "cmp", "amount"});
        const auto op = word_op_from_string(require_string(require(j, where, "op"), where + ".op"));
        if (!op || *op == WordOp::Input) fail(where + ".op", "unknown operation");
        WordNode n;
        n.op = *op;
        if (j.contains("args")) {
            if (!j["args"].is_array()) fail(where + ".args", "expected an array");
            for (const auto& a : j["args"]) {
                const auto idx = require_int(a, where + ".args");
                if (idx < 0 || static_cast<std::size_t>(idx) >= d.nodes.size())
                    fail(where + ".args", "reference " + std::to_string(idx) + " is not an earlier node");
                n.args.push_back(static_cast<std::size_t>(idx));
            }
        }
        if (static_cast<int>(n.args.size()) != arity(n.op)) fail(where + ".args", "wrong operand count");
        if (n.op == WordOp::Const) {
            n.width = static_cast<int>(require_int(require(j, where, "width"), where + ".width"));
            const json& v = require(j, where, "value");
            if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
                fail(where + ".value", "expected a non-negative integer");
            n.value = v.get<std::uint64_t>();
        } else if (n.op == WordOp::Cmp) {
            const auto k = cmp_kind_from_string(require_string(require(j, where, "cmp"), where + ".cmp"));
            if (!k) fail(where + ".cmp", "unknown comparison");
            n.cmp = *k;
            n.width = 1;
        } else if (n.op == WordOp::Mux) {
            n.width = d.nodes[n.args[1]].width;
        } else {
            n.width = d.nodes[n.args[0]].width;
        }
        if (n.op == WordOp::Shl || n.op == WordOp::Shr)
            n.amount = static_cast<int>(require_int(require(j, where, "amount"), where + ".amount"));
        d.nodes.push_back(std::move(n));
    }
    const json& outputs = require(doc, "<root>", "outputs");
    if (!outputs.is_array()) fail("outputs", "expected an array");
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        const std::string where = "outputs[" + std::to_string(i) + "]";
        check_fields(outputs[i], where, {"name", "node"});
        const auto node = require_int(require(outputs[i], where, "node"), where + ".node");
        if (node < 0 || static_cast<std::size_t>(node) >= d.nodes.size()) fail(where + ".node", "no such node");
        d.output(require_string(require(outputs[i], where, "name"), where + ".name"), static_cast<std::size_t>(node));
    }
    validate(d);
    return d;
}

std::string emit_word_json(const WordDesign& d) {
    // Inputs first, other nodes after, both in original order.
    std::vector<std::size_t> remap(d.nodes.size());
    std::size_t next = 0;
    for (std::size_t i = 0; i < d.nodes.size(); ++i)
        if (d.nodes[i].op == WordOp::Input) remap[i] = next++;
    for (std::size_t i = 0; i < d.nodes.size(); ++i)
        if (d.nodes[i].op != WordOp::Input) remap[i] = next++;

    std::string out = "{\n  \"inputs\": [";
    bool first = true;
    for (const WordNode& n : d.nodes) {
        if (n.op != WordOp::Input) continue;
        out += first ? "\n    " : ",\n    ";
        first = false;
        out += ojson{{"name", n.name}, {"width", n.width}, {"role", std::string(to_string(n.role))}}.dump();
    }
    out += first ? "],\n" : "\n  ],\n";
    out += "  \"nodes\": [";
    first = true;
    for (const WordNode& n : d.nodes) {
        if (n.op == WordOp::Input) continue;
        ojson j;
        j["op"] = std::string(to_string(n.op));
        if (!n.args.empty()) {
            ojson args = ojson::array();
            for (std::size_t a : n.args) args.push_back(remap[a]);
            j["args"] = std::move(args);
        }
        if (n.op == WordOp::Const) {
            j["width"] = n.width;
            j["value"] = n.value;
        }
        if (n.op == WordOp::Cmp) j["cmp"] = std::string(to_string(n.cmp));
        if (n.op == WordOp::Shl || n.op == WordOp::Shr) j["amount"] = n.amount;
        out += first ? "\n    " : ",\n    ";
        first = false;
        out += j.dump();
    }
    out += first ? "],\n" : "\n  ],\n";
    out += "  \"outputs\": [";
    first = true;
    for (const auto& o : d.outputs) {
        out += first ? "\n    " : ",\n    ";
        first = false;
        out += ojson{{"name", o.name}, {"node", remap[o.node]}}.dump();
    }
    out += first ? "]\n}\n" : "\n  ]\n}\n";
    return out;
}

namespace {

class Lowerer {
public:
    explicit Lowerer(const WordDesign& d) : d_(d) {}

    Netlist run() {
        validate(d_);
        assign_input_bits();
        bits_.resize(d_.nodes.size());
        for (std::size_t i = 0; i < d_.nodes.size(); ++i) bits_[i] = lower(i);
        for (const auto& o : d_.outputs) {
            const auto& b = bits_[o.node];
            for (std::size_t i = 0; i < b.size(); ++i)
                n_.add_output(n_.add_gate(GateKind::Buf, {b[i]}, o.name + "[" + std::to_string(i) + "]"));
        }
        return n_;
    }

private:
    void assign_input_bits() {
        int next[3] = {0, 0, 0};
        input_nets_.resize(d_.nodes.size());
        for (std::size_t i = 0; i < d_.nodes.size(); ++i) {
            const WordNode& n = d_.nodes[i];
            if (n.op != WordOp::Input) continue;
            int& base = next[static_cast<int>(n.role)];
            for (int b = 0; b < n.width; ++b) {
                const int bit = n.role == PortRole::LockingKey ? base + n.width - 1 - b : base + b;
                input_nets_[i].push_back(n_.add_input(n.name + "[" + std::to_string(b) + "]", n.role, bit));
            }
            base += n.width;
        }
    }

    NetId tie(bool one) {
        NetId& t = one ? one_ : zero_;
        if (t == kNoNet) t = n_.add_gate(one ? GateKind::Const1 : GateKind::Const0, {});
        return t;
    }

    NetId g(GateKind k, std::vector<NetId> in) { return n_.add_gate(k, std::move(in)); }

    std::vector<NetId> adder(const std::vector<NetId>& a, const std::vector<NetId>& b, bool subtract) {
        std::vector<NetId> out;
        NetId carry = kNoNet;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const NetId bi = subtract ? g(GateKind::Not, {b[i]}) : b[i];
            const NetId p = g(GateKind::Xor, {a[i], bi});
            if (carry == kNoNet && !subtract) {
                out.push_back(p);
                carry = g(GateKind::And, {a[i], bi});
                continue;
            }
            if (carry == kNoNet) carry = tie(true);
            out.push_back(g(GateKind::Xor, {p, carry}));
            if (i + 1 < a.size())
                carry = g(GateKind::Or, {g(GateKind::And, {a[i], bi}), g(GateKind::And, {p, carry})});
        }
        return out;
    }

    NetId greater(const std::vector<NetId>& a, const std::vector<NetId>& b) {
        NetId gt = kNoNet;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const NetId here = g(GateKind::And, {a[i], g(GateKind::Not, {b[i]})});
            gt = gt == kNoNet ? here : g(GateKind::Or, {here, g(GateKind::And, {g(GateKind::Xnor, {a[i], b[i]}), gt})});
        }
        return gt;
    }

    NetId equal(const std::vector<NetId>& a, const std::vector<NetId>& b) {
        NetId eq = kNoNet;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const NetId x = g(GateKind::Xnor, {a[i], b[i]});
            eq = eq == kNoNet ? x : g(GateKind::And, {eq, x});
        }
        return eq;
    }

    std::vector<NetId> lower(std::size_t i) {
        const WordNode& n = d_.nodes[i];
        const auto w = static_cast<std::size_t>(n.width);
        auto arg = [&](std::size_t k) -> const std::vector<NetId>& { return bits_[n.args[k]]; };
        std::vector<NetId> out;
        auto bitwise = [&](GateKind k) {
            for (std::size_t b = 0; b < w; ++b) out.push_back(g(k, {arg(0)[b], arg(1)[b]}));
        };
        switch (n.op) {
        case WordOp::Const:
            for (std::size_t b = 0; b < w; ++b) out.push_back(tie(((n.value >> b) & 1u) != 0));
            break;
        case WordOp::Input: out = input_nets_[i]; break;
        case WordOp::Add: out = adder(arg(0), arg(1), false); break;
        case WordOp::Sub: out = adder(arg(0), arg(1), true); break;
        case WordOp::BitXor: bitwise(GateKind::Xor); break;
        case WordOp::BitXnor: bitwise(GateKind::Xnor); break;
        case WordOp::BitAnd: bitwise(GateKind::And); break;
        case WordOp::BitOr: bitwise(GateKind::Or); break;
        case WordOp::Cmp:
            switch (n.cmp) {
            case CmpKind::Gt: out = {greater(arg(0), arg(1))}; break;
            case CmpKind::Le: out = {g(GateKind::Not, {greater(arg(0), arg(1))})}; break;
            case CmpKind::Eq: out = {equal(arg(0), arg(1))}; break;
            case CmpKind::Ne: out = {g(GateKind::Not, {equal(arg(0), arg(1))})}; break;
            }
            break;
        case WordOp::Mux:
            for (std::size_t b = 0; b < w; ++b) out.push_back(g(GateKind::Mux2, {arg(0)[0], arg(2)[b], arg(1)[b]}));
            break;
        case WordOp::Shl:
            for (std::size_t b = 0; b < w; ++b)
                out.push_back(b >= static_cast<std::size_t>(n.amount) ? arg(0)[b - static_cast<std::size_t>(n.amount)] : tie(false));
            break;
        case WordOp::Shr:
            for (std::size_t b = 0; b < w; ++b)
                out.push_back(b + static_cast<std::size_t>(n.amount) < w ? arg(0)[b + static_cast<std::size_t>(n.amount)] : tie(false));
            break;
        }
        return out;
    }

    const WordDesign& d_;
    Netlist n_;
    std::vector<std::vector<NetId>> bits_;
    std::vector<std::vector<NetId>> input_nets_;
    NetId zero_ = kNoNet;
    NetId one_ = kNoNet;
};

} // namespace

Netlist lower_to_gates(const WordDesign& design) { return Lowerer(design).run(); }

} // namespace lockleak
