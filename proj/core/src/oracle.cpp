#include "lockleak/oracle.hpp"

#include "lockleak/errors.hpp"
#include "pattern_eval.hpp"

namespace lockleak {

LeakageVerdict brute_force_leakage(const Netlist& netlist, int secret_bit, ScenarioKind kind) {
    if (netlist.is_sequential()) throw InputError("brute-force oracle needs a combinational netlist; unroll first");
    const Scenario sc = make_scenario(netlist, secret_bit, kind);
    const std::size_t nc = sc.controllable.size();
    const std::size_t nu = sc.unknown.size();
    if (nc > kOracleMaxControllable || nu > kOracleMaxUnknown)
        throw BoundsError("brute-force oracle bounded to 20 controllable and 16 unknown bits, got " +
                          std::to_string(nc) + " and " + std::to_string(nu));

    detail::PatternEvaluator ev(netlist, sc);
    const std::size_t no = netlist.outputs.size();
    const std::uint64_t patterns = std::uint64_t{1} << (nu + 1);
    const std::uint64_t valid = detail::PatternEvaluator::valid_mask(patterns);

    LeakageVerdict v;
    v.bit = secret_bit;
    v.verdict = Verdict::S;
    std::vector<bool> c(nc);
    std::vector<char> ok0(no), ok1(no);
    for (std::uint64_t idx = 0; idx < (std::uint64_t{1} << nc); ++idx) {
        for (std::size_t i = 0; i < nc; ++i) c[i] = ((idx >> (nc - 1 - i)) & 1u) != 0;
        ev.set_controllable(c);
        std::fill(ok0.begin(), ok0.end(), 1);
        std::fill(ok1.begin(), ok1.end(), 1);
        std::size_t alive = 2 * no;
        for (std::uint64_t first = 0; first < patterns && alive > 0; first += 64) {
            ev.eval_patterns(first);
            const std::uint64_t s = ev.secret_word();
            for (std::size_t o = 0; o < no; ++o) {
                const std::uint64_t diff = (ev.output_word(o) ^ s) & valid;
                if (ok0[o] && diff != 0) { ok0[o] = 0; --alive; }
                if (ok1[o] && diff != valid) { ok1[o] = 0; --alive; }
            }
        }
        for (std::size_t o = 0; o < no; ++o) {
            if (!ok0[o] && !ok1[o]) continue;
            v.verdict = Verdict::DT;
            v.witness = Witness{c, o, netlist.outputs[o].frame, !ok0[o]};
            return v;
        }
    }
    return v;
}

} // namespace lockleak
