#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dbandit/rng.hpp"

namespace dbandit::comm {

// Metered scalar transfer through the server. One scalar (integer or real)
// costs one unit regardless of type. Totals are monotone; per-phase counts
// are accumulated under insertion-ordered labels.
class CommLedger {
public:
    // count must be >= 1: there are no free messages.
    void record(const std::string& phase, std::int64_t count);

    std::int64_t total() const { return total_; }
    const std::vector<std::pair<std::string, std::int64_t>>& by_phase() const {
        return by_phase_;
    }

private:
    std::int64_t total_ = 0;
    std::vector<std::pair<std::string, std::int64_t>> by_phase_;
};

// Spec operation name; same contract as CommLedger::record.
inline void record_transfer(CommLedger& ledger, const std::string& phase,
                            std::int64_t count) {
    ledger.record(phase, count);
}

// Seeded stream readable by the server and every agent. All readers sharing
// the stream state observe identical values in identical order. Broadcasting
// the seed in a protocol run is charged M scalars by the caller.
class PublicRandomness {
public:
    explicit PublicRandomness(std::uint64_t seed) : stream_(seed) {}
    RandomStream& stream() { return stream_; }

private:
    RandomStream stream_;
};

// r_1..r_K, each uniform on [1, M], drawn from the shared stream.
std::vector<int> public_rand_assign(int num_arms, int num_agents,
                                    PublicRandomness& pub);

}  // namespace dbandit::comm
