#include "lockleak/sensitize.hpp"

#include "lockleak/errors.hpp"
#include "lockleak/rng.hpp"
#include "lockleak/sim.hpp"
#include "lockleak/tseitin.hpp"
#include "pattern_eval.hpp"

#include <algorithm>
#include <chrono>
#include <climits>
#include <set>

namespace lockleak {

std::vector<int> secret_bits(const Netlist& netlist) {
    std::vector<int> bits;
    for (const auto& in : netlist.inputs)
        if (in.role == PortRole::Secret) bits.push_back(in.bit);
    std::sort(bits.begin(), bits.end());
    return bits;
}

namespace {

void require_combinational(const Netlist& netlist) {
    if (netlist.is_sequential()) throw InputError("sequential netlist: unroll before building a leakage query");
}

// Three-valued signal in dual-rail form. d == 0: always defined; d == kAlwaysX: never defined.
struct Rail {
    int v = 0;
    int d = 0;
};
constexpr int kAlwaysX = INT_MIN;

class DualRailEncoder {
public:
    explicit DualRailEncoder(Cnf& cnf) : cnf_(cnf) {}

    Rail gate(GateKind kind, const std::vector<Rail>& in) {
        bool all_defined = true, all_x = !in.empty();
        for (const Rail& r : in) {
            all_defined = all_defined && r.d == 0;
            all_x = all_x && r.d == kAlwaysX;
        }
        if (kind == GateKind::Buf) return in[0];
        if (kind == GateKind::Not) return {-in[0].v, in[0].d};
        if (all_defined) {
            const int out = cnf_.new_var();
            std::vector<int> lits;
            for (const Rail& r : in) lits.push_back(r.v);
            encode_gate(cnf_, kind, lits, out);
            return {out, 0};
        }
        if (all_x) return {cnf_.new_var(), kAlwaysX};

        // Enumerate every reachable input combination and tabulate eval3.
        std::vector<std::vector<LogicValue>> domains;
        for (const Rail& r : in) {
            if (r.d == 0) domains.push_back({LogicValue::Zero, LogicValue::One});
            else if (r.d == kAlwaysX) domains.push_back({LogicValue::X});
            else domains.push_back({LogicValue::Zero, LogicValue::One, LogicValue::X});
        }
        struct Row {
            std::vector<LogicValue> ins;
            LogicValue out;
        };
        std::vector<Row> rows;
        std::vector<std::size_t> idx(in.size(), 0);
        bool any_x = false, any_def = false;
        for (;;) {
            Row row;
            for (std::size_t i = 0; i < in.size(); ++i) row.ins.push_back(domains[i][idx[i]]);
            row.out = eval3(kind, row.ins);
            (row.out == LogicValue::X ? any_x : any_def) = true;
            rows.push_back(std::move(row));
            std::size_t k = 0;
            while (k < in.size() && ++idx[k] == domains[k].size()) idx[k++] = 0;
            if (k == in.size()) break;
        }
        Rail out{cnf_.new_var(), 0};
        if (!any_def) {
            out.d = kAlwaysX;
            return out;
        }
        if (any_x) out.d = cnf_.new_var();
        for (const Row& row : rows) {
            std::vector<int> base;
            for (std::size_t i = 0; i < in.size(); ++i) {
                const Rail& r = in[i];
                switch (row.ins[i]) {
                case LogicValue::Zero:
                    if (r.d != 0) base.push_back(-r.d);
                    base.push_back(r.v);
                    break;
                case LogicValue::One:
                    if (r.d != 0) base.push_back(-r.d);
                    base.push_back(-r.v);
                    break;
                case LogicValue::X:
                    if (r.d != kAlwaysX) base.push_back(r.d);
                    break;
                }
            }
            auto emit = [&](int lit) {
                auto c = base;
                c.push_back(lit);
                cnf_.add_clause(std::move(c));
            };
            if (row.out == LogicValue::X) {
                emit(-out.d);
            } else {
                emit(row.out == LogicValue::One ? out.v : -out.v);
                if (out.d != 0) emit(out.d);
            }
        }
        return out;
    }

private:
    Cnf& cnf_;
};

// Tseitin encoding with constant folding; constants are the literals +/-t.
class FoldingEncoder {
public:
    FoldingEncoder(Cnf& cnf, int t) : cnf_(cnf), t_(t) {}

    bool is_const(int l) const { return l == t_ || l == -t_; }
    int constant(bool b) const { return b ? t_ : -t_; }

    int gate(GateKind kind, const std::vector<int>& in) {
        switch (kind) {
        case GateKind::Const0: return -t_;
        case GateKind::Const1: return t_;
        case GateKind::Buf: return in[0];
        case GateKind::Not: return -in[0];
        case GateKind::And: return and2(in[0], in[1]);
        case GateKind::Nand: return -and2(in[0], in[1]);
        case GateKind::Or: return -and2(-in[0], -in[1]);
        case GateKind::Nor: return and2(-in[0], -in[1]);
        case GateKind::Xor: return xor2(in[0], in[1]);
        case GateKind::Xnor: return -xor2(in[0], in[1]);
        case GateKind::Mux2: return mux(in[0], in[1], in[2]);
        case GateKind::Dff: break;
        }
        throw InputError("DFF in combinational encoding");
    }

private:
    int and2(int a, int b) {
        if (a == -t_ || b == -t_ || a == -b) return -t_;
        if (a == t_ || a == b) return b;
        if (b == t_) return a;
        const int o = cnf_.new_var();
        const int ins[2] = {a, b};
        encode_gate(cnf_, GateKind::And, ins, o);
        return o;
    }
    int xor2(int a, int b) {
        if (is_const(a)) return a == t_ ? -b : b;
        if (is_const(b)) return b == t_ ? -a : a;
        if (a == b) return -t_;
        if (a == -b) return t_;
        const int o = cnf_.new_var();
        const int ins[2] = {a, b};
        encode_gate(cnf_, GateKind::Xor, ins, o);
        return o;
    }
    int mux(int s, int a, int b) {
        if (s == -t_ || a == b) return a;
        if (s == t_) return b;
        if (a == -t_ && b == t_) return s;
        if (a == t_ && b == -t_) return -s;
        if (a == -t_) return and2(s, b);
        if (b == -t_) return and2(-s, a);
        if (a == t_) return -and2(s, -b);
        if (b == t_) return -and2(-s, -a);
        const int o = cnf_.new_var();
        const int ins[3] = {s, a, b};
        encode_gate(cnf_, GateKind::Mux2, ins, o);
        return o;
    }

    Cnf& cnf_;
    int t_;
};

std::vector<std::size_t> reachable_outputs(const Netlist& netlist, NetId tested) {
    const auto fan = combinational_fanout(netlist, {tested});
    std::vector<std::size_t> outs;
    for (std::size_t o = 0; o < netlist.outputs.size(); ++o)
        if (fan[netlist.outputs[o].net]) outs.push_back(o);
    return outs;
}

class BudgetClock {
public:
    explicit BudgetClock(const SolveBudget& b) : budget_(b), start_(std::chrono::steady_clock::now()) {}

    double elapsed_ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    }
    // nullopt once a bound is used up.
    std::optional<SolveBudget> remaining(std::int64_t conflicts_used, NdCause& cause) const {
        SolveBudget r;
        if (budget_.conflicts) {
            r.conflicts = *budget_.conflicts - conflicts_used;
            if (*r.conflicts <= 0) {
                cause = NdCause::Conflicts;
                return std::nullopt;
            }
        }
        if (budget_.time_ms) {
            r.time_ms = *budget_.time_ms - static_cast<std::int64_t>(elapsed_ms());
            if (*r.time_ms <= 0) {
                cause = NdCause::WallClock;
                return std::nullopt;
            }
        }
        return r;
    }

private:
    SolveBudget budget_;
    std::chrono::steady_clock::time_point start_;
};

NdCause cause_of(ExhaustedBound b) { return b == ExhaustedBound::WallClock ? NdCause::WallClock : NdCause::Conflicts; }

LeakageVerdict classify_dualrail(const Netlist& netlist, int bit, ScenarioKind kind, const SolveBudget& budget) {
    LeakageVerdict v;
    v.bit = bit;
    v.mode = AnalysisMode::DualRail;
    v.iterations = 1;
    const LeakageQuery q = build_leakage_query(netlist, bit, kind);
    Solver solver;
    solver.add_cnf(q.cnf);
    const SolveResult res = solver.solve(budget);
    v.solve_ms = res.elapsed_ms;
    v.conflicts = res.conflicts;
    if (res.status == SolveStatus::Unsat) {
        v.verdict = Verdict::S;
    } else if (res.status == SolveStatus::Unknown) {
        v.verdict = Verdict::ND;
        v.nd_cause = cause_of(res.exhausted);
    } else {
        Witness w;
        for (int var : q.controllable_vars) w.controllable.push_back(res.value(var));
        for (std::size_t i = 0; i < q.outputs.size(); ++i) {
            if (!res.value(q.diff_vars[i])) continue;
            w.output = q.outputs[i];
            w.frame = netlist.outputs[w.output].frame;
            w.polarity = res.value(q.copy_a_value[i]);
            break;
        }
        v.verdict = Verdict::DT;
        v.witness = std::move(w);
    }
    return v;
}

struct Counterexample {
    bool secret;
    std::vector<bool> unknown;
    bool operator<(const Counterexample& o) const {
        return secret != o.secret ? secret < o.secret : unknown < o.unknown;
    }
};

LeakageVerdict classify_exact(const Netlist& netlist, int bit, ScenarioKind kind, const ClassifyOptions& opt) {
    LeakageVerdict v;
    v.bit = bit;
    v.mode = AnalysisMode::Exact;
    const Scenario sc = make_scenario(netlist, bit, kind);
    const BudgetClock clock(opt.budget);
    const auto finish = [&](Verdict verdict) {
        v.verdict = verdict;
        v.solve_ms = clock.elapsed_ms();
        return v;
    };

    const NetId tested = netlist.inputs[sc.tested].net;
    const auto outs = reachable_outputs(netlist, tested);
    if (outs.empty()) return finish(Verdict::S);

    std::vector<NetId> out_nets;
    for (std::size_t o : outs) out_nets.push_back(netlist.outputs[o].net);
    const auto cone = combinational_fanin(netlist, out_nets);
    // Unknowns outside the cone cannot influence any candidate output.
    std::size_t live_unknowns = 0;
    for (std::size_t j : sc.unknown) live_unknowns += cone[netlist.inputs[j].net] ? 1 : 0;
    if (live_unknowns > opt.exact_unknown_cap) {
        v.nd_cause = NdCause::UnknownCap;
        return finish(Verdict::ND);
    }
    const auto order = topo_order(netlist);

    // Candidate side: exists c, b and an output selector.
    Solver cand;
    Cnf chunk;
    const int t = chunk.new_var();
    chunk.add_clause({t});
    std::vector<int> cvars;
    for (std::size_t i = 0; i < sc.controllable.size(); ++i) cvars.push_back(chunk.new_var());
    const int bvar = chunk.new_var();
    std::vector<int> sel;
    for (std::size_t i = 0; i < outs.size(); ++i) sel.push_back(chunk.new_var());
    chunk.add_clause(std::vector<int>(sel));

    auto add_counterexample = [&](const Counterexample& cex) {
        FoldingEncoder enc(chunk, t);
        std::vector<int> lit(netlist.net_count(), 0);
        for (std::size_t i = 0; i < sc.controllable.size(); ++i) lit[netlist.inputs[sc.controllable[i]].net] = cvars[i];
        for (std::size_t j = 0; j < sc.unknown.size(); ++j)
            lit[netlist.inputs[sc.unknown[j]].net] = enc.constant(cex.unknown[j]);
        lit[tested] = enc.constant(cex.secret);
        std::vector<int> ins;
        for (std::size_t gi : order) {
            const Gate& g = netlist.gates[gi];
            if (!cone[g.output]) continue;
            ins.clear();
            for (NetId n : g.inputs) ins.push_back(lit[n]);
            lit[g.output] = enc.gate(g.kind, ins);
        }
        // sel_o -> out_o == secret XOR b
        for (std::size_t i = 0; i < outs.size(); ++i) {
            const int o = lit[out_nets[i]];
            const int want = cex.secret ? -bvar : bvar;
            chunk.add_clause({-sel[i], -o, want});
            chunk.add_clause({-sel[i], o, -want});
        }
        cand.add_cnf(chunk);
        chunk.clauses.clear();
    };

    // Verifier side: exists u, s with out_o != s XOR b, for given c, b, o.
    Solver ver;
    std::vector<int> vlit;
    std::vector<int> mismatch;
    int ver_b = 0;
    {
        Cnf vc;
        vlit = tseitin_encode(netlist, vc);
        ver_b = vc.new_var();
        const int s = vlit[tested];
        for (NetId n : out_nets) {
            const int x = vc.new_var();
            const int ins[2] = {vlit[n], s};
            encode_gate(vc, GateKind::Xor, ins, x);
            const int m = vc.new_var();
            vc.add_clause({-m, x, ver_b});
            vc.add_clause({-m, -x, -ver_b});
            mismatch.push_back(m);
        }
        ver.add_cnf(vc);
    }

    std::set<Counterexample> seen;
    for (bool s : {false, true}) {
        Counterexample cex{s, std::vector<bool>(sc.unknown.size(), false)};
        seen.insert(cex);
        add_counterexample(cex);
    }

    std::int64_t used = 0;
    for (;;) {
        ++v.iterations;
        NdCause cause = NdCause::None;
        auto rem = clock.remaining(used, cause);
        if (!rem) {
            v.nd_cause = cause;
            v.conflicts = used;
            return finish(Verdict::ND);
        }
        const SolveResult cr = cand.solve(*rem);
        used += cr.conflicts;
        v.conflicts = used;
        if (cr.status == SolveStatus::Unsat) return finish(Verdict::S);
        if (cr.status == SolveStatus::Unknown) {
            v.nd_cause = cause_of(cr.exhausted);
            return finish(Verdict::ND);
        }

        std::vector<bool> c;
        for (int var : cvars) c.push_back(cr.value(var));
        const bool b = cr.value(bvar);
        std::vector<int> assume;
        for (std::size_t i = 0; i < c.size(); ++i) {
            const int l = vlit[netlist.inputs[sc.controllable[i]].net];
            assume.push_back(c[i] ? l : -l);
        }
        assume.push_back(b ? ver_b : -ver_b);

        bool refined = false;
        for (std::size_t i = 0; i < outs.size(); ++i) {
            if (!cr.value(sel[i])) continue;
            rem = clock.remaining(used, cause);
            if (!rem) {
                v.nd_cause = cause;
                return finish(Verdict::ND);
            }
            assume.push_back(mismatch[i]);
            const SolveResult vr = ver.solve(*rem, assume);
            assume.pop_back();
            used += vr.conflicts;
            v.conflicts = used;
            if (vr.status == SolveStatus::Unknown) {
                v.nd_cause = cause_of(vr.exhausted);
                return finish(Verdict::ND);
            }
            if (vr.status == SolveStatus::Unsat) {
                v.witness = Witness{c, outs[i], netlist.outputs[outs[i]].frame, b};
                return finish(Verdict::DT);
            }
            Counterexample cex;
            cex.secret = vr.value(vlit[tested]);
            for (std::size_t j : sc.unknown) cex.unknown.push_back(vr.value(vlit[netlist.inputs[j].net]));
            if (seen.insert(cex).second) {
                add_counterexample(cex);
                refined = true;
            }
        }
        if (!refined) throw SoundnessError("CEGAR made no progress on secret bit " + std::to_string(bit));
    }
}

} // namespace

LeakageQuery build_leakage_query(const Netlist& netlist, int secret_bit, ScenarioKind kind) {
    require_combinational(netlist);
    LeakageQuery q;
    q.scenario = make_scenario(netlist, secret_bit, kind);
    const Scenario& sc = q.scenario;
    Cnf& cnf = q.cnf;
    const int t = cnf.new_var();
    cnf.add_clause({t});

    const NetId tested = netlist.inputs[sc.tested].net;
    const auto differs = combinational_fanout(netlist, {tested});
    std::vector<Rail> a(netlist.net_count()), b(netlist.net_count());
    for (std::size_t i : sc.controllable) {
        const NetId n = netlist.inputs[i].net;
        a[n] = b[n] = Rail{cnf.new_var(), 0};
        q.controllable_vars.push_back(a[n].v);
    }
    for (std::size_t i : sc.unknown) {
        const NetId n = netlist.inputs[i].net;
        a[n] = b[n] = Rail{cnf.new_var(), kAlwaysX};
    }
    a[tested] = Rail{-t, 0};
    b[tested] = Rail{t, 0};

    DualRailEncoder enc(cnf);
    std::vector<Rail> ins;
    for (std::size_t gi : topo_order(netlist)) {
        const Gate& g = netlist.gates[gi];
        ins.clear();
        for (NetId n : g.inputs) ins.push_back(a[n]);
        a[g.output] = enc.gate(g.kind, ins);
        if (!differs[g.output]) {
            b[g.output] = a[g.output];
            continue;
        }
        ins.clear();
        for (NetId n : g.inputs) ins.push_back(b[n]);
        b[g.output] = enc.gate(g.kind, ins);
    }

    std::vector<int> any;
    for (std::size_t o : reachable_outputs(netlist, tested)) {
        const NetId n = netlist.outputs[o].net;
        const Rail& ra = a[n];
        const Rail& rb = b[n];
        if (ra.d == kAlwaysX || rb.d == kAlwaysX) continue;
        const int d = cnf.new_var();
        if (ra.d != 0) cnf.add_clause({-d, ra.d});
        if (rb.d != 0) cnf.add_clause({-d, rb.d});
        cnf.add_clause({-d, ra.v, rb.v});
        cnf.add_clause({-d, -ra.v, -rb.v});
        q.outputs.push_back(o);
        q.diff_vars.push_back(d);
        q.copy_a_value.push_back(ra.v);
        any.push_back(d);
    }
    cnf.add_clause(std::move(any));
    return q;
}

bool verify_witness(const Netlist& netlist, int secret_bit, ScenarioKind kind, const Witness& w) {
    const Scenario sc = make_scenario(netlist, secret_bit, kind);
    if (w.controllable.size() != sc.controllable.size() || w.output >= netlist.outputs.size()) return false;
    detail::PatternEvaluator ev(netlist, sc);
    ev.set_controllable(w.controllable);
    const std::uint64_t flip = w.polarity ? ~std::uint64_t{0} : 0;
    const std::size_t nu = sc.unknown.size();
    if (nu <= 16) {
        const std::uint64_t patterns = std::uint64_t{1} << (nu + 1);
        const std::uint64_t valid = detail::PatternEvaluator::valid_mask(patterns);
        for (std::uint64_t first = 0; first < patterns; first += 64) {
            ev.eval_patterns(first);
            if ((ev.output_word(w.output) ^ ev.secret_word() ^ flip) & valid) return false;
        }
        return true;
    }
    Rng rng(0x6c65616bULL + static_cast<std::uint64_t>(secret_bit));
    std::vector<std::uint64_t> unknown(nu);
    constexpr int kWords = (10000 + 63) / 64;
    for (int k = 0; k < kWords; ++k) {
        for (auto& u : unknown) u = rng();
        const std::uint64_t s = rng();
        ev.eval_words(s, unknown);
        if (ev.output_word(w.output) ^ s ^ flip) return false;
    }
    return true;
}

LeakageVerdict classify_bit(const Netlist& netlist, int secret_bit, ScenarioKind scenario, const ClassifyOptions& options) {
    require_combinational(netlist);
    LeakageVerdict v = options.mode == AnalysisMode::DualRail
                           ? classify_dualrail(netlist, secret_bit, scenario, options.budget)
                           : classify_exact(netlist, secret_bit, scenario, options);
    if (v.verdict == Verdict::DT && !verify_witness(netlist, secret_bit, scenario, *v.witness))
        throw SoundnessError("witness for secret bit " + std::to_string(secret_bit) + " (" +
                             std::string(to_string(options.mode)) + ") failed verification");
    return v;
}

std::vector<LeakageVerdict> classify_all_bits(const Netlist& netlist, ScenarioKind scenario,
                                              const ClassifyOptions& options, int unroll_depth) {
    const Netlist flat = netlist.is_sequential() ? unroll(netlist, unroll_depth) : Netlist{};
    const Netlist& target = netlist.is_sequential() ? flat : netlist;
    std::vector<LeakageVerdict> out;
    for (int bit : secret_bits(target)) {
        try {
            out.push_back(classify_bit(target, bit, scenario, options));
        } catch (const SoundnessError&) {
            throw;
        } catch (const Error& e) {
            LeakageVerdict v;
            v.bit = bit;
            v.mode = options.mode;
            v.verdict = Verdict::ND;
            v.nd_cause = NdCause::Error;
            v.message = e.what();
            out.push_back(std::move(v));
        }
    }
    return out;
}

} // namespace lockleak
