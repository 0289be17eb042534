#pragma once

#include "lockleak/leakage.hpp"
#include "lockleak/sim.hpp"

#include <cstdint>
#include <vector>

namespace lockleak::detail {

// Evaluates 64 (secret, unknown) patterns at a time with the controllable inputs
// held fixed. Pattern p sets the tested secret to bit 0 of p and unknown j to bit j+1.
class PatternEvaluator {
public:
    PatternEvaluator(const Netlist& netlist, const Scenario& scenario)
        : netlist_(&netlist), scenario_(&scenario), sim_(netlist), nets_(netlist.net_count(), 0) {}

    void set_controllable(const std::vector<bool>& values) {
        for (std::size_t i = 0; i < scenario_->controllable.size(); ++i)
            nets_[netlist_->inputs[scenario_->controllable[i]].net] = values[i] ? ~std::uint64_t{0} : 0;
    }

    // Lanes hold patterns first .. first+63; `first` must be a multiple of 64.
    void eval_patterns(std::uint64_t first) {
        nets_[netlist_->inputs[scenario_->tested].net] = lane_bit(first, 0);
        for (std::size_t j = 0; j < scenario_->unknown.size(); ++j)
            nets_[netlist_->inputs[scenario_->unknown[j]].net] = lane_bit(first, static_cast<unsigned>(j + 1));
        sim_.run(nets_);
    }

    // Explicit lane words; used for random sampling.
    void eval_words(std::uint64_t secret, const std::vector<std::uint64_t>& unknown) {
        nets_[netlist_->inputs[scenario_->tested].net] = secret;
        for (std::size_t j = 0; j < scenario_->unknown.size(); ++j)
            nets_[netlist_->inputs[scenario_->unknown[j]].net] = unknown[j];
        sim_.run(nets_);
    }

    std::uint64_t secret_word() const { return nets_[netlist_->inputs[scenario_->tested].net]; }
    std::uint64_t output_word(std::size_t o) const { return nets_[netlist_->outputs[o].net]; }

    static std::uint64_t lane_bit(std::uint64_t first, unsigned k) {
        static constexpr std::uint64_t kMasks[6] = {0xAAAAAAAAAAAAAAAAull, 0xCCCCCCCCCCCCCCCCull,
                                                    0xF0F0F0F0F0F0F0F0ull, 0xFF00FF00FF00FF00ull,
                                                    0xFFFF0000FFFF0000ull, 0xFFFFFFFF00000000ull};
        if (k < 6) return kMasks[k];
        return ((first >> k) & 1u) ? ~std::uint64_t{0} : 0;
    }

    // Lanes in use when only `count` patterns exist.
    static std::uint64_t valid_mask(std::uint64_t count) {
        return count >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << count) - 1);
    }

private:
    const Netlist* netlist_;
    const Scenario* scenario_;
    WordSimulator sim_;
    std::vector<std::uint64_t> nets_;
};

} // namespace lockleak::detail
