#include "dbandit/comm.hpp"

#include <stdexcept>

namespace dbandit::comm {

void CommLedger::record(const std::string& phase, std::int64_t count) {
    if (count < 1) {
        throw std::invalid_argument("CommLedger::record: count must be >= 1");
    }
    total_ += count;
    for (auto& entry : by_phase_) {
        if (entry.first == phase) {
            entry.second += count;
            return;
        }
    }
    by_phase_.emplace_back(phase, count);
}

std::vector<int> public_rand_assign(int num_arms, int num_agents,
                                    PublicRandomness& pub) {
    if (num_arms < 1 || num_agents < 1) {
        throw std::invalid_argument("public_rand_assign: K and M must be >= 1");
    }
    std::vector<int> r(static_cast<std::size_t>(num_arms));
    for (auto& v : r) {
        v = static_cast<int>(pub.stream().uniform_int(
                static_cast<std::uint64_t>(num_agents))) + 1;
    }
    return r;
}

}  // namespace dbandit::comm
