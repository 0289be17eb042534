#include "lockleak/blif.hpp"

#include "lockleak/errors.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <sstream>
#include <unordered_map>

namespace lockleak {

GateLibrary GateLibrary::standard() {
    return {{{"AND2", GateKind::And},
             {"NAND2", GateKind::Nand},
             {"OR2", GateKind::Or},
             {"NOR2", GateKind::Nor},
             {"XOR2", GateKind::Xor},
             {"XNOR2", GateKind::Xnor},
             {"INV", GateKind::Not},
             {"BUF", GateKind::Buf},
             {"MUX2", GateKind::Mux2},
             {"TIE0", GateKind::Const0},
             {"TIE1", GateKind::Const1}}};
}

namespace {

std::string upper(std::string s) {
    for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

struct Line {
    std::size_t no;
    std::vector<std::string> tok;
};

// Joins continuations and strips comments.
std::vector<Line> tokenize(std::string_view text) {
    std::vector<Line> lines;
    std::size_t pos = 0, no = 0;
    Line pending{0, {}};
    bool continuing = false;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view raw = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++no;
        if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
        while (!raw.empty() && std::isspace(static_cast<unsigned char>(raw.back()))) raw.remove_suffix(1);
        bool cont = !raw.empty() && raw.back() == '\\';
        if (cont) raw.remove_suffix(1);
        if (!continuing) pending = Line{no, {}};
        std::istringstream ss{std::string(raw)};
        for (std::string t; ss >> t;) pending.tok.push_back(t);
        continuing = cont;
        if (!continuing && !pending.tok.empty()) lines.push_back(std::move(pending));
        if (eol == text.size()) break;
    }
    if (continuing && !pending.tok.empty()) lines.push_back(std::move(pending));
    return lines;
}

[[noreturn]] void bad(std::size_t line, const std::string& msg) {
    throw InputError("blif line " + std::to_string(line) + ": " + msg);
}
[[noreturn]] void unsupported(std::size_t line, const std::string& msg) {
    throw UnsupportedFeature("blif line " + std::to_string(line) + ": " + msg);
}

PortRole role_of(const std::string& name) {
    auto starts = [&](std::string_view p) { return name.rfind(p, 0) == 0; };
    if (starts("enc_key") || starts("secret")) return PortRole::Secret;
    if (starts("keyinput") || starts("lolo_key")) return PortRole::LockingKey;
    return PortRole::Operational;
}

struct Cover {
    std::size_t line = 0;
    std::vector<std::string> signals; // inputs then output
    std::vector<std::string> cubes;
    char out_value = '1';
};

// Truth table over n <= 3 inputs, index bit i = input i.
std::vector<bool> table_of(const Cover& c, std::size_t n) {
    std::vector<bool> on(std::size_t{1} << n, false);
    for (std::size_t m = 0; m < on.size(); ++m) {
        for (const auto& cube : c.cubes) {
            bool hit = true;
            for (std::size_t i = 0; i < n && hit; ++i) {
                const bool v = (m >> i) & 1u;
                hit = cube[i] == '-' || (cube[i] == '1') == v;
            }
            if (hit) {
                on[m] = true;
                break;
            }
        }
    }
    if (c.out_value == '0') on.flip();
    return on;
}

std::vector<bool> table_from(std::size_t n, auto fn) {
    std::vector<bool> t(std::size_t{1} << n);
    for (std::size_t m = 0; m < t.size(); ++m) t[m] = fn(m);
    return t;
}

class Builder {
public:
    explicit Builder(Netlist& n) : n_(n) {}

    NetId net(const std::string& name) {
        auto [it, fresh] = ids_.try_emplace(name, 0);
        if (fresh) it->second = n_.add_net(name);
        return it->second;
    }
    bool known(const std::string& name) const { return ids_.count(name) != 0; }
    void bind(const std::string& name, NetId id) { ids_[name] = id; }

    void drive(GateKind k, std::vector<NetId> ins, NetId out) { n_.add_gate_driving(k, std::move(ins), out); }

    // Two-input tree of `k`; the root drives `out`.
    void reduce(GateKind k, std::vector<NetId> terms, NetId out) {
        if (terms.size() == 1) {
            drive(GateKind::Buf, {terms[0]}, out);
            return;
        }
        while (terms.size() > 2) {
            std::vector<NetId> next;
            for (std::size_t i = 0; i + 1 < terms.size(); i += 2) next.push_back(n_.add_gate(k, {terms[i], terms[i + 1]}));
            if (terms.size() % 2) next.push_back(terms.back());
            terms = std::move(next);
        }
        drive(k, {terms[0], terms[1]}, out);
    }

    NetId fresh(GateKind k, std::vector<NetId> ins) { return n_.add_gate(k, std::move(ins)); }

private:
    Netlist& n_;
    std::unordered_map<std::string, NetId> ids_;
};

void lower_cover(Builder& b, const Cover& c) {
    const std::size_t n = c.signals.size() - 1;
    const NetId out = b.net(c.signals.back());
    std::vector<NetId> ins;
    for (std::size_t i = 0; i < n; ++i) ins.push_back(b.net(c.signals[i]));

    if (n <= 3) {
        const auto t = table_of(c, n);
        const bool all1 = std::all_of(t.begin(), t.end(), [](bool v) { return v; });
        const bool all0 = std::none_of(t.begin(), t.end(), [](bool v) { return v; });
        if (all0 || all1) {
            b.drive(all1 ? GateKind::Const1 : GateKind::Const0, {}, out);
            return;
        }
        if (n == 1) {
            b.drive(t[1] ? GateKind::Buf : GateKind::Not, {ins[0]}, out);
            return;
        }
        if (n == 2) {
            static constexpr std::array<std::pair<GateKind, std::array<bool, 4>>, 6> kTwo{{
                {GateKind::And, {false, false, false, true}},
                {GateKind::Nand, {true, true, true, false}},
                {GateKind::Or, {false, true, true, true}},
                {GateKind::Nor, {true, false, false, false}},
                {GateKind::Xor, {false, true, true, false}},
                {GateKind::Xnor, {true, false, false, true}},
            }};
            for (const auto& [k, tt] : kTwo) {
                if (std::equal(tt.begin(), tt.end(), t.begin())) {
                    b.drive(k, ins, out);
                    return;
                }
            }
        }
        if (n == 3) {
            std::array<std::size_t, 3> p{0, 1, 2};
            do {
                const auto mux = table_from(3, [&](std::size_t m) {
                    const bool s = (m >> p[0]) & 1u, a = (m >> p[1]) & 1u, bb = (m >> p[2]) & 1u;
                    return s ? bb : a;
                });
                if (mux == t) {
                    b.drive(GateKind::Mux2, {ins[p[0]], ins[p[1]], ins[p[2]]}, out);
                    return;
                }
            } while (std::next_permutation(p.begin(), p.end()));
        }
    }

    // Sum of products.
    if (c.cubes.empty()) {
        b.drive(c.out_value == '1' ? GateKind::Const0 : GateKind::Const1, {}, out);
        return;
    }
    std::vector<NetId> negated(n, kNoNet);
    std::vector<NetId> products;
    for (const auto& cube : c.cubes) {
        std::vector<NetId> lits;
        for (std::size_t i = 0; i < n; ++i) {
            if (cube[i] == '1') {
                lits.push_back(ins[i]);
            } else if (cube[i] == '0') {
                if (negated[i] == kNoNet) negated[i] = b.fresh(GateKind::Not, {ins[i]});
                lits.push_back(negated[i]);
            }
        }
        if (lits.empty()) {
            // A full don't-care cube makes the cover constant.
            b.drive(c.out_value == '1' ? GateKind::Const1 : GateKind::Const0, {}, out);
            return;
        }
        if (lits.size() == 1) {
            products.push_back(lits[0]);
        } else {
            NetId acc = b.fresh(GateKind::And, {lits[0], lits[1]});
            for (std::size_t i = 2; i < lits.size(); ++i) acc = b.fresh(GateKind::And, {acc, lits[i]});
            products.push_back(acc);
        }
    }
    if (c.out_value == '1') {
        b.reduce(GateKind::Or, products, out);
    } else {
        NetId any = products[0];
        for (std::size_t i = 1; i < products.size(); ++i) any = b.fresh(GateKind::Or, {any, products[i]});
        b.drive(GateKind::Not, {any}, out);
    }
}

} // namespace

Netlist parse_blif(std::string_view text, const GateLibrary& library) {
    std::map<std::string, GateKind> cells;
    for (const auto& [name, kind] : library.cells) cells[upper(name)] = kind;

    const auto lines = tokenize(text);
    std::vector<std::pair<std::size_t, std::string>> inputs, outputs;
    std::vector<Cover> covers;
    struct Latch {
        std::size_t line;
        std::string d, q;
        InitValue init;
    };
    std::vector<Latch> latches;
    struct Cell {
        std::size_t line;
        GateKind kind;
        std::vector<std::string> pins;
    };
    std::vector<Cell> gates;

    bool model_seen = false, ended = false;
    Cover* open = nullptr;
    for (const auto& ln : lines) {
        const auto& t = ln.tok;
        if (t[0][0] != '.') {
            if (!open) bad(ln.no, "cover row outside .names");
            const std::size_t n = open->signals.size() - 1;
            std::string cube, value;
            if (n == 0) {
                if (t.size() != 1) bad(ln.no, "constant cover row must be a single 0 or 1");
                value = t[0];
            } else {
                if (t.size() != 2) bad(ln.no, "cover row needs an input cube and an output value");
                cube = t[0];
                value = t[1];
            }
            if (cube.size() != n) bad(ln.no, "cube width " + std::to_string(cube.size()) + " != " + std::to_string(n));
            if (cube.find_first_not_of("01-") != std::string::npos) bad(ln.no, "cube characters must be 0, 1 or -");
            if (value != "0" && value != "1") bad(ln.no, "output value must be 0 or 1");
            if (!open->cubes.empty() && open->out_value != value[0]) bad(ln.no, "cover mixes on-set and off-set rows");
            open->out_value = value[0];
            open->cubes.push_back(cube);
            continue;
        }
        open = nullptr;
        const std::string& cmd = t[0];
        if (cmd == ".model" && model_seen) unsupported(ln.no, "multiple models");
        if (ended) bad(ln.no, "content after .end");
        if (cmd == ".model") {
            if (model_seen) unsupported(ln.no, "multiple models");
            model_seen = true;
        } else if (cmd == ".inputs") {
            for (std::size_t i = 1; i < t.size(); ++i) inputs.push_back({ln.no, t[i]});
        } else if (cmd == ".outputs") {
            for (std::size_t i = 1; i < t.size(); ++i) outputs.push_back({ln.no, t[i]});
        } else if (cmd == ".names") {
            if (t.size() < 2) bad(ln.no, ".names needs an output");
            covers.push_back({ln.no, {t.begin() + 1, t.end()}, {}, '1'});
            open = &covers.back();
        } else if (cmd == ".latch") {
            if (t.size() < 3 || t.size() > 6) bad(ln.no, ".latch takes <in> <out> [<type> <control>] [<init>]");
            std::string init = "3";
            if (t.size() == 4) init = t[3];
            if (t.size() >= 5) {
                if (t[3] != "re" && t[3] != "fe") unsupported(ln.no, "latch type '" + t[3] + "' is not an edge-triggered DFF");
                if (t.size() == 6) init = t[5];
            }
            InitValue iv;
            if (init == "0") iv = InitValue::Zero;
            else if (init == "1") iv = InitValue::One;
            else if (init == "2" || init == "3") iv = InitValue::X;
            else bad(ln.no, "latch init must be 0, 1, 2 or 3");
            latches.push_back({ln.no, t[1], t[2], iv});
        } else if (cmd == ".gate") {
            if (t.size() < 2) bad(ln.no, ".gate needs a cell name");
            const auto it = cells.find(upper(t[1]));
            if (it == cells.end()) bad(ln.no, "cell '" + t[1] + "' is not in the gate library");
            std::vector<std::string> pins;
            for (std::size_t i = 2; i < t.size(); ++i) {
                const auto eq = t[i].find('=');
                if (eq == std::string::npos || eq + 1 == t[i].size()) bad(ln.no, "pin binding must be formal=actual");
                pins.push_back(t[i].substr(eq + 1));
            }
            if (static_cast<int>(pins.size()) != arity(it->second) + 1)
                bad(ln.no, "cell '" + t[1] + "' expects " + std::to_string(arity(it->second) + 1) + " pins");
            gates.push_back({ln.no, it->second, std::move(pins)});
        } else if (cmd == ".end") {
            ended = true;
        } else if (cmd == ".subckt" || cmd == ".exdc" || cmd == ".search" || cmd == ".mlatch") {
            unsupported(ln.no, cmd + " is not supported");
        } else {
            unsupported(ln.no, "unknown directive " + cmd);
        }
    }
    if (!model_seen && lines.empty()) throw InputError("blif: empty file");
    if (outputs.empty()) throw InputError("blif: no outputs");

    Netlist nl;
    Builder b(nl);
    std::array<int, 3> next_bit{0, 0, 0};
    for (const auto& [line, name] : inputs) {
        if (b.known(name)) bad(line, "input '" + name + "' declared twice");
        const PortRole r = role_of(name);
        b.bind(name, nl.add_input(name, r, next_bit[static_cast<std::size_t>(r)]++));
    }
    for (const auto& l : latches) {
        const NetId q = b.net(l.q);
        nl.add_gate_driving(GateKind::Dff, {b.net(l.d)}, q);
        nl.gates.back().init = l.init;
    }
    for (const auto& g : gates) {
        std::vector<NetId> ins;
        for (std::size_t i = 0; i + 1 < g.pins.size(); ++i) ins.push_back(b.net(g.pins[i]));
        b.drive(g.kind, std::move(ins), b.net(g.pins.back()));
    }
    for (const auto& c : covers) lower_cover(b, c);
    for (const auto& [line, name] : outputs) {
        if (!b.known(name)) bad(line, "output '" + name + "' is never driven");
        nl.add_output(b.net(name));
    }
    const auto violations = validate(nl);
    if (!violations.empty()) throw InputError("blif: " + violations.front().message);
    topo_order(nl);
    return nl;
}

std::string emit_blif(const Netlist& nl, std::string_view model) {
    std::ostringstream out;
    out << ".model " << model << "\n.inputs";
    for (const auto& in : nl.inputs) out << ' ' << nl.label(in.net);
    out << "\n.outputs";
    for (const auto& o : nl.outputs) out << ' ' << nl.label(o.net);
    out << '\n';
    for (const auto& g : nl.gates) {
        const std::string y = nl.label(g.output);
        if (g.kind == GateKind::Dff) {
            out << ".latch " << nl.label(g.inputs[0]) << ' ' << y << ' '
                << (g.init == InitValue::Zero ? '0' : g.init == InitValue::One ? '1' : '3') << '\n';
            continue;
        }
        out << ".names";
        for (NetId n : g.inputs) out << ' ' << nl.label(n);
        out << ' ' << y << '\n';
        switch (g.kind) {
        case GateKind::And: out << "11 1\n"; break;
        case GateKind::Nand: out << "11 0\n"; break;
        case GateKind::Or: out << "1- 1\n-1 1\n"; break;
        case GateKind::Nor: out << "00 1\n"; break;
        case GateKind::Xor: out << "01 1\n10 1\n"; break;
        case GateKind::Xnor: out << "00 1\n11 1\n"; break;
        case GateKind::Not: out << "0 1\n"; break;
        case GateKind::Buf: out << "1 1\n"; break;
        case GateKind::Mux2: out << "01- 1\n1-1 1\n"; break;
        case GateKind::Const0: break;
        case GateKind::Const1: out << "1\n"; break;
        case GateKind::Dff: break;
        }
    }
    out << ".end\n";
    return out.str();
}

} // namespace lockleak
