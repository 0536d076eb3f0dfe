#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace dbandit {

// Outcome of one simulated protocol run.
//
// cum_regret[t]  cumulative pseudo-regret summed over all agents through
//                global step t (nondecreasing, length T)
// cum_comm[t]    ledger total after step t, including messages exchanged
//                at the boundary leading into step t (length T)
// pull_counts[a] total pulls of arm/action a across all agents
struct RunResult {
    std::vector<double> cum_regret;
    std::vector<std::int64_t> cum_comm;
    std::int64_t comm_total = 0;
    std::vector<std::pair<std::string, std::int64_t>> comm_by_phase;
    std::vector<std::int64_t> pull_counts;
    std::uint64_t seed = 0;

    double final_regret() const { return cum_regret.empty() ? 0.0 : cum_regret.back(); }
};

}  // namespace dbandit
