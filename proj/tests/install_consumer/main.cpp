#include <lockleak/benchgen.hpp>
#include <lockleak/sensitize.hpp>

#include <iostream>

int main() {
    using namespace lockleak;
    const LockedNetlist l = fig5_example();
    const auto v = classify_all_bits(l.netlist, ScenarioKind::SetLlKey);
    for (const auto& r : v) std::cout << r.bit << ' ' << to_string(r.verdict) << '\n';
    return v.size() == 2 && v[0].verdict == Verdict::DT && v[1].verdict == Verdict::S ? 0 : 1;
}
