#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lockleak {

using NetId = std::uint32_t;
inline constexpr NetId kNoNet = std::numeric_limits<NetId>::max();

enum class GateKind : std::uint8_t {
    And, Nand, Or, Nor, Xor, Xnor, Not, Buf, Mux2, Const0, Const1, Dff
};

enum class PortRole : std::uint8_t { Secret, LockingKey, Operational };

enum class InitValue : std::uint8_t { Zero, One, X };

int arity(GateKind kind);
std::string_view to_string(GateKind kind);
std::optional<GateKind> gate_kind_from_string(std::string_view text);

// JSON spellings: "secret", "lolo_key", "operational".
std::string_view to_string(PortRole role);
std::optional<PortRole> port_role_from_string(std::string_view text);

inline bool is_constant(GateKind k) { return k == GateKind::Const0 || k == GateKind::Const1; }

/// A gate drives exactly one net. For MUX2 the inputs are (sel, a, b) and the
/// output is `a` when sel = 0, `b` when sel = 1. DFF gates take their D input in
/// `inputs[0]`, drive Q on `output` and reset to `init`.
struct Gate {
    GateKind kind = GateKind::Buf;
    std::vector<NetId> inputs;
    NetId output = kNoNet;
    InitValue init = InitValue::Zero;
};

/// `bit` is the position of this input inside its role group (secret bit 0, 1, ...).
struct PrimaryInput {
    NetId net = kNoNet;
    PortRole role = PortRole::Operational;
    int bit = 0;
};

/// `frame` is non-zero only on time-frame expanded netlists.
struct PrimaryOutput {
    NetId net = kNoNet;
    int frame = 0;
};

struct Netlist {
    std::vector<std::string> net_names; // one entry per net; empty string = unnamed
    std::vector<PrimaryInput> inputs;
    std::vector<PrimaryOutput> outputs;
    std::vector<Gate> gates;

    std::size_t net_count() const { return net_names.size(); }

    NetId add_net(std::string name = {});
    NetId add_input(std::string name, PortRole role, int bit);
    /// Adds a gate driving a fresh net and returns that net.
    NetId add_gate(GateKind kind, std::vector<NetId> inputs, std::string name = {});
    void add_gate_driving(GateKind kind, std::vector<NetId> inputs, NetId output);
    /// Adds a DFF whose Q is a fresh net; D may be connected later via `gates[i].inputs`.
    NetId add_dff(NetId d, InitValue init, std::string name = {});
    void add_output(NetId net, int frame = 0) { outputs.push_back({net, frame}); }

    std::optional<NetId> find_net(std::string_view name) const;
    std::optional<std::size_t> find_input(std::string_view name) const;
    /// Name if present, otherwise "$<id>".
    std::string label(NetId net) const;

    bool is_sequential() const;
    std::size_t combinational_gate_count() const;
    /// Input indices with the given role, ordered by their `bit` field.
    std::vector<std::size_t> inputs_with_role(PortRole role) const;
    std::size_t count_role(PortRole role) const;
};

enum class DriverKind : std::uint8_t { None, Input, Gate, Multiple };

struct Driver {
    DriverKind kind = DriverKind::None;
    std::size_t index = 0; // input index or gate index
};

std::vector<Driver> compute_drivers(const Netlist& netlist);

struct LoadPin {
    std::size_t gate;
    std::size_t pin;
};
std::vector<std::vector<LoadPin>> compute_loads(const Netlist& netlist);

struct Violation {
    std::string rule;    // "arity", "single-driver", "dangling", ...
    std::string message; // names the offending element
};

std::vector<Violation> validate(const Netlist& netlist);

/// Combinational gates in evaluation order; DFF outputs act as sources and DFF
/// gates themselves are not part of the result. Throws CycleError listing the loop.
std::vector<std::size_t> topo_order(const Netlist& netlist);

/// Nets reachable forward from `seeds` through combinational gates (seeds included).
std::vector<bool> combinational_fanout(const Netlist& netlist, const std::vector<NetId>& seeds);
/// Nets whose value can influence any of `seeds` combinationally (seeds included).
std::vector<bool> combinational_fanin(const Netlist& netlist, const std::vector<NetId>& seeds);

/// Renumbers nets as: primary inputs (listed order), DFF outputs (gate order),
/// remaining gate outputs (gate order). Gate order is kept.
Netlist canonicalize(const Netlist& netlist);

/// Time-frame expansion into a purely combinational netlist with `frames` copies.
/// Operational inputs are replicated per frame, Secret and LockingKey inputs are
/// shared. Frame-0 DFF outputs take the reset value; an X reset becomes a fresh
/// operational input named "<q>@init". Every frame's outputs are exposed.
/// A combinational netlist with frames == 1 is returned unchanged.
Netlist unroll(const Netlist& netlist, int frames);

} // namespace lockleak
