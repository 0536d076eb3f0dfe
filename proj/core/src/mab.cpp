// DEMAB engine and MAB baselines.
//
// Time model: one global clock; at every step each of the M agents performs
// exactly one pull, in agent-index order. All communication happens at step
// boundaries (zero latency). Pseudo-regret is accumulated from true gaps.
//
// DEMAB stage 2 runs one phase per loop iteration. Distributed phases:
// size report -> (centralize | rebalance) -> n_max broadcast -> pulls ->
// max-report -> elimination. A phase cut off by the horizon performs no
// end-of-phase communication and no elimination. Once a single arm remains
// in centralized mode the server broadcasts it and all agents pull it for
// the rest of the run with no further communication.

#include "dbandit/mab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dbandit::mab {

namespace {

constexpr std::int64_t kBudgetClamp = 4000000000000000000LL;  // ~4e18

double mean_of(double sum, std::int64_t count) {
    return sum / static_cast<double>(count);
}

struct StepRecorder {
    std::vector<double>* step_regret;
    std::vector<std::int64_t>* pull_counts;
    std::vector<std::int32_t>* trace;
    const std::vector<double>* gaps;
    int M;

    void pull(std::int64_t t, int agent, int arm) const {
        (*step_regret)[static_cast<std::size_t>(t)] += (*gaps)[static_cast<std::size_t>(arm)];
        (*pull_counts)[static_cast<std::size_t>(arm)]++;
        if (trace) {
            (*trace)[static_cast<std::size_t>(t) * static_cast<std::size_t>(M) +
                     static_cast<std::size_t>(agent)] = arm;
        }
    }
};

void finalize_result(RunResult& res, const std::vector<double>& step_regret) {
    double acc = 0.0;
    for (std::size_t t = 0; t < step_regret.size(); ++t) {
        acc += step_regret[t];
        res.cum_regret[t] = acc;
    }
    res.comm_total = res.cum_comm.empty() ? 0 : res.cum_comm.back();
}

std::vector<double> true_gaps(const env::MabInstance& inst) {
    std::vector<double> g(inst.num_arms());
    for (std::size_t k = 0; k < g.size(); ++k) {
        g[k] = env::mab_gap(inst, k);
    }
    return g;
}

std::vector<int> all_arms(int K) {
    std::vector<int> arms(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
        arms[static_cast<std::size_t>(k)] = k;
    }
    return arms;
}

}  // namespace

std::int64_t phase_budget(int l, int M, int K, std::int64_t T) {
    if (l < 1 || M < 1 || K < 1 || T < 1) {
        throw std::invalid_argument("phase_budget: arguments must be positive");
    }
    const long double log_mkt =
        std::log(static_cast<long double>(M) * static_cast<long double>(K) *
                 static_cast<long double>(T));
    const long double v = std::ceil(std::pow(4.0L, l + 3) * log_mkt);
    if (!(v < static_cast<long double>(kBudgetClamp))) {
        return kBudgetClamp;
    }
    return static_cast<std::int64_t>(v);
}

BurnInParams burn_in_params(std::int64_t T, int M, int K) {
    if (T < 1 || M < 1 || K < 2) {
        throw std::invalid_argument("burn_in_params: invalid arguments");
    }
    BurnInParams out;
    const std::int64_t mk = static_cast<std::int64_t>(M) * K;
    out.burn_in_steps = (T + mk - 1) / mk;
    const long double log_mkt =
        std::log(static_cast<long double>(M) * static_cast<long double>(K) *
                 static_cast<long double>(T));
    const long double arg =
        3.0L * static_cast<long double>(out.burn_in_steps) / (67.0L * K * log_mkt);
    if (arg > 1.0L) {
        const long double l0 = std::floor(std::log(arg) / std::log(4.0L));
        out.start_phase = l0 > 0.0L ? static_cast<int>(l0) : 0;
    } else {
        out.start_phase = 0;
    }
    const double m = static_cast<double>(M);
    const double bound =
        std::max({m * std::log(std::max(m, 1.0)) / K, m, static_cast<double>(K), 2.0});
    out.horizon_ok = static_cast<double>(T) > bound;
    return out;
}

std::vector<int> elim_filter(const std::vector<std::pair<int, double>>& phase_means,
                             int l) {
    if (phase_means.empty()) {
        throw std::invalid_argument("elim_filter: empty phase means");
    }
    double u_star = phase_means[0].second;
    for (const auto& [arm, mu] : phase_means) {
        u_star = std::max(u_star, mu);
    }
    return elim_filter_threshold(phase_means, l, u_star);
}

std::vector<int> elim_filter_threshold(
    const std::vector<std::pair<int, double>>& phase_means, int l, double u_star) {
    const double slack = std::ldexp(1.0, -l);
    std::vector<int> surviving;
    for (const auto& [arm, mu] : phase_means) {
        if (mu + slack >= u_star) {
            surviving.push_back(arm);
        }
    }
    std::sort(surviving.begin(), surviving.end());
    return surviving;
}

bool is_balanced(const std::vector<int>& counts) {
    if (counts.empty()) {
        throw std::invalid_argument("is_balanced: empty vector");
    }
    const auto [mn, mx] = std::minmax_element(counts.begin(), counts.end());
    return *mx <= 2 * *mn;
}

std::vector<std::vector<int>> reallocate(std::vector<std::vector<int>> sets,
                                         comm::CommLedger& ledger) {
    const int M = static_cast<int>(sets.size());
    std::int64_t total = 0;
    for (const auto& s : sets) {
        total += static_cast<std::int64_t>(s.size());
    }
    if (M < 1 || total < M) {
        throw std::invalid_argument("reallocate: requires N >= M agents' worth of arms");
    }
    const std::int64_t nbar = total / M;

    // Donors give up their highest-indexed arms down to nbar.
    std::vector<int> pool;
    for (auto& s : sets) {
        std::sort(s.begin(), s.end());
        while (static_cast<std::int64_t>(s.size()) > nbar) {
            pool.push_back(s.back());
            s.pop_back();
        }
    }
    const std::int64_t moved = static_cast<std::int64_t>(pool.size());

    std::size_t cursor = 0;
    for (auto& s : sets) {
        while (static_cast<std::int64_t>(s.size()) < nbar) {
            s.push_back(pool[cursor++]);
        }
    }
    // Remaining pool arms (< M of them) go to agents 0..R-1, one each.
    int agent = 0;
    while (cursor < pool.size()) {
        sets[static_cast<std::size_t>(agent++)].push_back(pool[cursor++]);
    }
    for (auto& s : sets) {
        std::sort(s.begin(), s.end());
    }
    ledger.record("reallocate", moved + M);
    return sets;
}

std::vector<Assignment> centralized_assign(const std::vector<int>& arms,
                                           std::int64_t pulls_per_arm, int M) {
    if (arms.empty() || pulls_per_arm < 1 || M < 1) {
        throw std::invalid_argument("centralized_assign: invalid arguments");
    }
    const auto N = static_cast<std::int64_t>(arms.size());
    const __int128 total = static_cast<__int128>(pulls_per_arm) * N;
    const __int128 quota128 = (total + M - 1) / M;
    const std::int64_t quota = quota128 > static_cast<__int128>(kBudgetClamp)
                                   ? kBudgetClamp
                                   : static_cast<std::int64_t>(quota128);

    std::vector<Assignment> schedule;
    std::vector<int> sorted = arms;
    std::sort(sorted.begin(), sorted.end());
    int agent = 0;
    std::int64_t capacity = quota;
    for (int arm : sorted) {
        std::int64_t need = pulls_per_arm;
        while (need > 0) {
            if (capacity == 0) {
                ++agent;
                capacity = quota;
            }
            const std::int64_t take = std::min(need, capacity);
            schedule.push_back({agent, arm, take});
            need -= take;
            capacity -= take;
        }
    }
    return schedule;
}

ElimRunner::ElimRunner(std::vector<int> arms, int M, int K, std::int64_t T)
    : active_(std::move(arms)), M_(M), K_(K), T_(T) {
    if (active_.empty()) {
        throw std::invalid_argument("ElimRunner: empty arm set");
    }
    std::sort(active_.begin(), active_.end());
    sums_.assign(active_.size(), 0.0);
    budget_ = phase_budget(l_, M_, K_, T_);
}

int ElimRunner::peek_arm() const {
    if (phase_complete()) {
        throw std::logic_error("ElimRunner::peek_arm: phase already complete");
    }
    return active_[arm_idx_];
}

void ElimRunner::feed(double reward) {
    if (phase_complete()) {
        throw std::logic_error("ElimRunner::feed: phase already complete");
    }
    sums_[arm_idx_] += reward;
    if (++count_ == budget_) {
        count_ = 0;
        ++arm_idx_;
    }
}

bool ElimRunner::phase_complete() const { return arm_idx_ == active_.size(); }

void ElimRunner::finish_phase() {
    if (!phase_complete()) {
        throw std::logic_error("ElimRunner::finish_phase: phase not complete");
    }
    std::vector<std::pair<int, double>> means;
    means.reserve(active_.size());
    for (std::size_t k = 0; k < active_.size(); ++k) {
        means.emplace_back(active_[k], mean_of(sums_[k], budget_));
    }
    active_ = elim_filter(means, l_);
    ++l_;
    budget_ = phase_budget(l_, M_, K_, T_);
    sums_.assign(active_.size(), 0.0);
    arm_idx_ = 0;
    count_ = 0;
}

std::vector<int> single_elim_run(const std::vector<int>& arms, std::int64_t steps,
                                 const env::MabInstance& instance, RandomStream& rng,
                                 int M, int K, std::int64_t T,
                                 std::vector<std::int32_t>* trace) {
    ElimRunner runner(arms, M, K, T);
    if (trace) {
        trace->clear();
        trace->reserve(static_cast<std::size_t>(steps));
    }
    for (std::int64_t t = 0; t < steps; ++t) {
        const int arm = runner.peek_arm();
        if (trace) {
            trace->push_back(arm);
        }
        runner.feed(env::mab_sample(instance, static_cast<std::size_t>(arm), rng));
        if (runner.phase_complete()) {
            runner.finish_phase();
        }
    }
    return runner.active();
}

RunResult demab_run(const env::MabInstance& instance, int M, std::int64_t T,
                    std::uint64_t seed, bool burn_in,
                    std::vector<std::int32_t>* trace, const DemabProbe* probe) {
    if (M < 1 || T < 1) {
        throw std::invalid_argument("demab_run: M and T must be >= 1");
    }
    const int K = static_cast<int>(instance.num_arms());

    RunResult res;
    res.seed = seed;
    res.cum_regret.assign(static_cast<std::size_t>(T), 0.0);
    res.cum_comm.assign(static_cast<std::size_t>(T), 0);
    res.pull_counts.assign(static_cast<std::size_t>(K), 0);
    if (trace) {
        trace->assign(static_cast<std::size_t>(T) * static_cast<std::size_t>(M), -1);
    }

    std::vector<double> step_regret(static_cast<std::size_t>(T), 0.0);
    const std::vector<double> gaps = true_gaps(instance);
    StepRecorder rec{&step_regret, &res.pull_counts, trace, &gaps, M};

    std::vector<RandomStream> rng;
    rng.reserve(static_cast<std::size_t>(M));
    for (int i = 0; i < M; ++i) {
        rng.emplace_back(derive_seed(seed, static_cast<std::uint64_t>(i) + 1));
    }
    comm::PublicRandomness pub(derive_seed(seed, 0));
    comm::CommLedger ledger;

    std::int64_t last_filled = -1;
    auto fill_comm_through = [&](std::int64_t upto_exclusive) {
        for (std::int64_t s = last_filled + 1; s < upto_exclusive; ++s) {
            res.cum_comm[static_cast<std::size_t>(s)] = ledger.total();
        }
        last_filled = upto_exclusive - 1;
    };

    // Sharing the public seed costs one scalar per agent.
    ledger.record("seed_broadcast", M);

    // ---- Stage 1: separate burn-in (communication-free).
    BurnInParams bp;
    if (burn_in) {
        bp = burn_in_params(T, M, K);
    }
    const std::int64_t D = std::min<std::int64_t>(bp.burn_in_steps, T);
    std::vector<std::vector<int>> survivors(static_cast<std::size_t>(M));
    for (int i = 0; i < M; ++i) {
        ElimRunner runner(all_arms(K), M, K, T);
        for (std::int64_t t = 0; t < D; ++t) {
            const int arm = runner.peek_arm();
            rec.pull(t, i, arm);
            runner.feed(env::mab_sample(instance, static_cast<std::size_t>(arm), rng[static_cast<std::size_t>(i)]));
            if (runner.phase_complete()) {
                runner.finish_phase();
            }
        }
        survivors[static_cast<std::size_t>(i)] = runner.active();
    }
    std::int64_t t_cur = D;
    fill_comm_through(t_cur);

    // ---- Switching: random allocation via public randomness.
    std::vector<std::vector<int>> bsets(static_cast<std::size_t>(M));
    auto allocate = [&]() {
        const std::vector<int> r = comm::public_rand_assign(K, M, pub);
        for (int i = 0; i < M; ++i) {
            bsets[static_cast<std::size_t>(i)].clear();
            for (int a : survivors[static_cast<std::size_t>(i)]) {
                if (r[static_cast<std::size_t>(a)] == i + 1) {
                    bsets[static_cast<std::size_t>(i)].push_back(a);
                }
            }
        }
    };
    allocate();

    // ---- Stage 2.
    enum class Mode { kDistributed, kCentralized, kCommitted };
    Mode mode = Mode::kDistributed;
    std::vector<int> central;
    int committed_arm = 0;
    std::vector<int> last_pulled(static_cast<std::size_t>(M), 0);
    int l = bp.start_phase + 1;

    while (t_cur < T) {
        if (mode == Mode::kCommitted) {
            for (std::int64_t t = t_cur; t < T; ++t) {
                for (int i = 0; i < M; ++i) {
                    rec.pull(t, i, committed_arm);
                    env::mab_sample(instance, static_cast<std::size_t>(committed_arm),
                                    rng[static_cast<std::size_t>(i)]);
                }
            }
            t_cur = T;
            break;
        }

        if (mode == Mode::kDistributed) {
            ledger.record("size_report", M);
            std::vector<int> sizes(static_cast<std::size_t>(M));
            std::int64_t N = 0;
            auto refresh_sizes = [&]() {
                N = 0;
                for (int i = 0; i < M; ++i) {
                    sizes[static_cast<std::size_t>(i)] =
                        static_cast<int>(bsets[static_cast<std::size_t>(i)].size());
                    N += sizes[static_cast<std::size_t>(i)];
                }
            };
            refresh_sizes();
            // The random allocation can leave every agent empty; the server
            // then signals a redraw from the shared stream.
            int redraws = 0;
            while (N == 0) {
                ledger.record("redraw", M);
                allocate();
                refresh_sizes();
                if (++redraws > 1000) {
                    throw std::runtime_error("demab_run: allocation failed to produce arms");
                }
            }
            if (N <= M) {
                ledger.record("centralize", M + N);
                central.clear();
                for (const auto& s : bsets) {
                    central.insert(central.end(), s.begin(), s.end());
                }
                std::sort(central.begin(), central.end());
                mode = Mode::kCentralized;
                continue;  // same phase l, handled centralized
            }
            if (!is_balanced(sizes)) {
                const std::vector<int> before = sizes;
                bsets = reallocate(std::move(bsets), ledger);
                refresh_sizes();
                const std::int64_t nbar = N / M;
                for (int sz : sizes) {
                    if (sz != nbar && sz != nbar + 1) {
                        throw std::logic_error("demab_run: rebalance bound violated");
                    }
                }
                if (!is_balanced(sizes)) {
                    throw std::logic_error("demab_run: rebalance left sizes unbalanced");
                }
                if (probe && probe->on_reallocate) {
                    probe->on_reallocate(before, sizes);
                }
            }
            ledger.record("nmax_bcast", M);
            const int n_max = *std::max_element(sizes.begin(), sizes.end());
            const std::int64_t m_l = phase_budget(l, M, K, T);
            const __int128 phase_len = static_cast<__int128>(n_max) * m_l;

            if (probe && probe->on_phase_start) {
                probe->on_phase_start({l, false, bsets, {}});
            }

            const bool fits = phase_len <= static_cast<__int128>(T - t_cur);
            const std::int64_t t_end =
                fits ? t_cur + static_cast<std::int64_t>(phase_len) : T;
            std::vector<std::vector<double>> sums(static_cast<std::size_t>(M));
            for (int i = 0; i < M; ++i) {
                sums[static_cast<std::size_t>(i)]
                    .assign(bsets[static_cast<std::size_t>(i)].size(), 0.0);
            }
            for (std::int64_t t = t_cur; t < t_end; ++t) {
                const std::int64_t p = t - t_cur;
                for (int i = 0; i < M; ++i) {
                    const auto& own = bsets[static_cast<std::size_t>(i)];
                    const auto n_i = static_cast<std::int64_t>(own.size());
                    int arm;
                    std::int64_t designated_idx = p / m_l;
                    if (designated_idx < n_i) {
                        arm = own[static_cast<std::size_t>(designated_idx)];
                    } else if (n_i > 0) {
                        designated_idx = -1;
                        arm = own[static_cast<std::size_t>((p - n_i * m_l) % n_i)];
                    } else {
                        designated_idx = -1;
                        arm = last_pulled[static_cast<std::size_t>(i)];
                    }
                    rec.pull(t, i, arm);
                    last_pulled[static_cast<std::size_t>(i)] = arm;
                    const double r = env::mab_sample(
                        instance, static_cast<std::size_t>(arm), rng[static_cast<std::size_t>(i)]);
                    if (designated_idx >= 0) {
                        sums[static_cast<std::size_t>(i)]
                            [static_cast<std::size_t>(designated_idx)] += r;
                    }
                }
            }
            const bool completed = fits;
            t_cur = t_end;
            fill_comm_through(t_cur);
            if (!completed) {
                break;
            }

            // Communication round: (argmax, max) up, u* down, local filter.
            ledger.record("elim_report", 2 * static_cast<std::int64_t>(M));
            double u_star = -std::numeric_limits<double>::infinity();
            for (int i = 0; i < M; ++i) {
                const auto& own = bsets[static_cast<std::size_t>(i)];
                for (std::size_t k = 0; k < own.size(); ++k) {
                    u_star = std::max(
                        u_star, mean_of(sums[static_cast<std::size_t>(i)][k], m_l));
                }
            }
            ledger.record("elim_bcast", M);
            for (int i = 0; i < M; ++i) {
                auto& own = bsets[static_cast<std::size_t>(i)];
                std::vector<std::pair<int, double>> means;
                means.reserve(own.size());
                for (std::size_t k = 0; k < own.size(); ++k) {
                    means.emplace_back(own[k],
                                       mean_of(sums[static_cast<std::size_t>(i)][k], m_l));
                }
                own = means.empty() ? std::vector<int>{}
                                    : elim_filter_threshold(means, l, u_star);
            }
            ++l;
            continue;
        }

        // Centralized mode.
        if (central.size() == 1) {
            ledger.record("commit", M);
            committed_arm = central[0];
            mode = Mode::kCommitted;
            continue;
        }
        const std::int64_t m_l = phase_budget(l, M, K, T);
        const auto schedule = centralized_assign(central, m_l, M);
        ledger.record("central_schedule",
                      2 * static_cast<std::int64_t>(schedule.size()));
        if (probe && probe->on_phase_start) {
            probe->on_phase_start({l, true, {}, central});
        }

        // Group entries per agent (they are emitted in agent order).
        std::vector<std::vector<std::size_t>> per_agent(static_cast<std::size_t>(M));
        std::vector<std::int64_t> load(static_cast<std::size_t>(M), 0);
        for (std::size_t e = 0; e < schedule.size(); ++e) {
            per_agent[static_cast<std::size_t>(schedule[e].agent)].push_back(e);
            load[static_cast<std::size_t>(schedule[e].agent)] += schedule[e].pulls;
        }
        const std::int64_t phase_len = *std::max_element(load.begin(), load.end());
        const bool fits = phase_len <= T - t_cur;
        const std::int64_t t_end = fits ? t_cur + phase_len : T;

        std::vector<double> entry_sums(schedule.size(), 0.0);
        for (std::int64_t t = t_cur; t < t_end; ++t) {
            const std::int64_t p = t - t_cur;
            for (int i = 0; i < M; ++i) {
                int arm = last_pulled[static_cast<std::size_t>(i)];
                std::int64_t entry = -1;
                std::int64_t off = p;
                for (std::size_t e : per_agent[static_cast<std::size_t>(i)]) {
                    if (off < schedule[e].pulls) {
                        entry = static_cast<std::int64_t>(e);
                        arm = schedule[e].arm;
                        break;
                    }
                    off -= schedule[e].pulls;
                }
                rec.pull(t, i, arm);
                last_pulled[static_cast<std::size_t>(i)] = arm;
                const double r = env::mab_sample(
                    instance, static_cast<std::size_t>(arm), rng[static_cast<std::size_t>(i)]);
                if (entry >= 0) {
                    entry_sums[static_cast<std::size_t>(entry)] += r;
                }
            }
        }
        const bool completed = fits;
        t_cur = t_end;
        fill_comm_through(t_cur);
        if (!completed) {
            break;
        }

        ledger.record("central_report",
                      2 * static_cast<std::int64_t>(schedule.size()));
        std::vector<std::pair<int, double>> means;
        for (int arm : central) {
            double sum = 0.0;
            std::int64_t cnt = 0;
            for (std::size_t e = 0; e < schedule.size(); ++e) {
                if (schedule[e].arm == arm) {
                    sum += entry_sums[e];
                    cnt += schedule[e].pulls;
                }
            }
            if (cnt != m_l) {
                throw std::logic_error("demab_run: centralized pull count mismatch");
            }
            means.emplace_back(arm, mean_of(sum, cnt));
        }
        central = elim_filter(means, l);
        ++l;
    }

    fill_comm_through(T);
    finalize_result(res, step_regret);
    if (probe && probe->on_finish) {
        std::vector<int> remaining;
        if (mode == Mode::kCommitted) {
            remaining = {committed_arm};
        } else if (mode == Mode::kCentralized) {
            remaining = central;
        } else {
            for (const auto& s : bsets) {
                remaining.insert(remaining.end(), s.begin(), s.end());
            }
            std::sort(remaining.begin(), remaining.end());
        }
        probe->on_finish(remaining);
    }
    return res;
}

RunResult immediate_sharing_mab_run(const env::MabInstance& instance, int M,
                                    std::int64_t T, std::uint64_t seed,
                                    std::vector<std::int32_t>* trace) {
    if (M < 1 || T < 1) {
        throw std::invalid_argument("immediate_sharing_mab_run: M and T must be >= 1");
    }
    const int K = static_cast<int>(instance.num_arms());

    RunResult res;
    res.seed = seed;
    res.cum_regret.assign(static_cast<std::size_t>(T), 0.0);
    res.cum_comm.assign(static_cast<std::size_t>(T), 0);
    res.pull_counts.assign(static_cast<std::size_t>(K), 0);
    if (trace) {
        trace->assign(static_cast<std::size_t>(T) * static_cast<std::size_t>(M), -1);
    }

    std::vector<double> step_regret(static_cast<std::size_t>(T), 0.0);
    const std::vector<double> gaps = true_gaps(instance);
    StepRecorder rec{&step_regret, &res.pull_counts, trace, &gaps, M};

    std::vector<RandomStream> rng;
    rng.reserve(static_cast<std::size_t>(M));
    for (int i = 0; i < M; ++i) {
        rng.emplace_back(derive_seed(seed, static_cast<std::uint64_t>(i) + 1));
    }
    comm::CommLedger ledger;

    // One elimination instance over the pooled stream; all agents can drive
    // it identically since every sample reaches everyone before the next
    // step. Pulls past a phase boundary within a step fill round-robin and
    // are excluded from the phase means; elimination applies between steps.
    ElimRunner runner(all_arms(K), M, K, T);
    std::size_t filler_pos = 0;
    for (std::int64_t t = 0; t < T; ++t) {
        for (int i = 0; i < M; ++i) {
            int arm;
            bool designated = false;
            if (!runner.phase_complete()) {
                arm = runner.peek_arm();
                designated = true;
            } else {
                const auto& act = runner.active();
                arm = act[filler_pos++ % act.size()];
            }
            rec.pull(t, i, arm);
            const double r = env::mab_sample(instance, static_cast<std::size_t>(arm),
                                             rng[static_cast<std::size_t>(i)]);
            if (designated) {
                runner.feed(r);
            }
        }
        ledger.record("upload", 2 * static_cast<std::int64_t>(M));
        if (M > 1) {
            ledger.record("forward",
                          2 * static_cast<std::int64_t>(M) * (M - 1));
        }
        res.cum_comm[static_cast<std::size_t>(t)] = ledger.total();
        if (runner.phase_complete()) {
            runner.finish_phase();
            filler_pos = 0;
        }
    }
    finalize_result(res, step_regret);
    return res;
}

RunResult independent_run(const env::MabInstance& instance, int M, std::int64_t T,
                          std::uint64_t seed, std::vector<std::int32_t>* trace) {
    if (M < 1 || T < 1) {
        throw std::invalid_argument("independent_run: M and T must be >= 1");
    }
    const int K = static_cast<int>(instance.num_arms());

    RunResult res;
    res.seed = seed;
    res.cum_regret.assign(static_cast<std::size_t>(T), 0.0);
    res.cum_comm.assign(static_cast<std::size_t>(T), 0);
    res.pull_counts.assign(static_cast<std::size_t>(K), 0);
    if (trace) {
        trace->assign(static_cast<std::size_t>(T) * static_cast<std::size_t>(M), -1);
    }

    std::vector<double> step_regret(static_cast<std::size_t>(T), 0.0);
    const std::vector<double> gaps = true_gaps(instance);
    StepRecorder rec{&step_regret, &res.pull_counts, trace, &gaps, M};

    for (int i = 0; i < M; ++i) {
        RandomStream rng(derive_seed(seed, static_cast<std::uint64_t>(i) + 1));
        ElimRunner runner(all_arms(K), M, K, T);
        for (std::int64_t t = 0; t < T; ++t) {
            const int arm = runner.peek_arm();
            rec.pull(t, i, arm);
            runner.feed(env::mab_sample(instance, static_cast<std::size_t>(arm), rng));
            if (runner.phase_complete()) {
                runner.finish_phase();
            }
        }
    }
    finalize_result(res, step_regret);
    return res;
}

}  // namespace dbandit::mab
