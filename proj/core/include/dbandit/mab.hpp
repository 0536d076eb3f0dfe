#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "dbandit/comm.hpp"
#include "dbandit/env.hpp"
#include "dbandit/result.hpp"
#include "dbandit/rng.hpp"

namespace dbandit::mab {

// Phase pull budget m_l = ceil(4^(l+3) * ln(M*K*T)). Values beyond any
// realistic horizon are clamped so callers can compare against remaining
// budget without overflow.
std::int64_t phase_budget(int l, int M, int K, std::int64_t T);

struct BurnInParams {
    std::int64_t burn_in_steps = 0;  // D
    int start_phase = 0;             // l0 (clamped at 0)
    bool horizon_ok = true;          // T > max(M ln M / K, M, K, 2)
};

// D = ceil(T / (M*K)); l0 = max(0, floor(log4(3D / (67 K ln(MKT))))).
BurnInParams burn_in_params(std::int64_t T, int M, int K);

// Keeps arms with mean + 2^-l >= max mean. The empirical argmax always
// survives. Returns surviving arm ids sorted ascending.
std::vector<int> elim_filter(const std::vector<std::pair<int, double>>& phase_means,
                             int l);

// Same, but against an externally supplied maximum (the server broadcast).
std::vector<int> elim_filter_threshold(
    const std::vector<std::pair<int, double>>& phase_means, int l, double u_star);

// true iff max <= 2 * min.
bool is_balanced(const std::vector<int>& counts);

// Rebalances per-agent arm sets through the server: every agent ends with
// floor(N/M) or floor(N/M)+1 arms; the multiset union is preserved. Charges
// one scalar per arm moved plus M scalars for the announcement.
std::vector<std::vector<int>> reallocate(std::vector<std::vector<int>> sets,
                                         comm::CommLedger& ledger);

struct Assignment {
    int agent = 0;
    int arm = 0;
    std::int64_t pulls = 0;
};

// Centralized-mode schedule: arms ascending, agents ascending, moving to the
// next agent when its quota p = ceil(m_l*N/M) fills. Every arm receives
// exactly m_l pulls; per-agent load never exceeds p.
std::vector<Assignment> centralized_assign(const std::vector<int>& arms,
                                           std::int64_t pulls_per_arm, int M);

// Single-agent elimination stepper. Pulls each active arm m_l times in
// ascending order, then eliminates at the phase boundary. The driver decides
// when to apply finish_phase (burn-in applies it immediately; the pooled
// baseline defers it to the step boundary).
class ElimRunner {
public:
    ElimRunner(std::vector<int> arms, int M, int K, std::int64_t T);

    int peek_arm() const;        // not callable while phase_complete()
    void feed(double reward);
    bool phase_complete() const;
    void finish_phase();
    const std::vector<int>& active() const { return active_; }
    int phase() const { return l_; }

private:
    std::vector<int> active_;
    std::vector<double> sums_;
    int M_;
    int K_;
    std::int64_t T_;
    int l_ = 1;
    std::int64_t budget_;
    std::size_t arm_idx_ = 0;
    std::int64_t count_ = 0;
};

// Runs single-agent elimination for exactly `steps` pulls and returns the
// active set (mid-phase pulls are discarded). steps = 0 returns the input.
std::vector<int> single_elim_run(const std::vector<int>& arms, std::int64_t steps,
                                 const env::MabInstance& instance, RandomStream& rng,
                                 int M, int K, std::int64_t T,
                                 std::vector<std::int32_t>* trace = nullptr);

struct DemabPhaseInfo {
    int phase = 0;
    bool centralized = false;
    std::vector<std::vector<int>> agent_sets;  // distributed mode, post-rebalance
    std::vector<int> central_set;              // centralized mode
};

// Test/inspection hooks; all optional.
struct DemabProbe {
    std::function<void(const DemabPhaseInfo&)> on_phase_start;
    std::function<void(const std::vector<int>&, const std::vector<int>&)>
        on_reallocate;                                   // sizes before, after
    std::function<void(const std::vector<int>&)> on_finish;  // surviving union
};

// Distributed elimination for multi-armed bandits. burn_in = false sets
// D = l0 = 0 (the instance-dependent variant). The pull trace, when
// requested, is laid out as trace[t*M + agent].
RunResult demab_run(const env::MabInstance& instance, int M, std::int64_t T,
                    std::uint64_t seed, bool burn_in,
                    std::vector<std::int32_t>* trace = nullptr,
                    const DemabProbe* probe = nullptr);

// Immediate-sharing baseline: every pull's (arm, reward) goes through the
// server to all other agents; all agents jointly drive one elimination
// instance over the pooled stream. Ledger total is exactly
// 2*M*T + 2*M*(M-1)*T.
RunResult immediate_sharing_mab_run(const env::MabInstance& instance, int M,
                                    std::int64_t T, std::uint64_t seed,
                                    std::vector<std::int32_t>* trace = nullptr);

// M isolated copies of single-agent elimination; zero communication.
RunResult independent_run(const env::MabInstance& instance, int M, std::int64_t T,
                          std::uint64_t seed,
                          std::vector<std::int32_t>* trace = nullptr);

}  // namespace dbandit::mab
