// DELB phase machine, DisLinUCB epoch machine, and the pooled baseline.
//
// DELB: server and agents solve the same deterministic G-optimal design on
// A_l, so arm references travel as support indices (1 scalar). Reports carry
// (index, mean, count); the theta broadcast costs d scalars per agent.
// Agents that finish their assignment early pull the locally-best action
// under the last broadcast estimate; those pulls never enter the regression.
//
// DisLinUCB: each agent tracks synchronized and fresh statistics (W, U). A
// round fires when any agent's det-ratio-times-elapsed condition exceeds the
// threshold; everyone then ships its fresh statistics up and the aggregate
// down, d(d+1)/2 + d scalars each way per agent plus one signal scalar.

#include "dbandit/linear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace dbandit::linear {

namespace {

constexpr std::int64_t kCountClamp = 4000000000000000000LL;

double log_det_llt(const Eigen::LLT<Eigen::MatrixXd>& llt) {
    const auto& l = llt.matrixLLT();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < l.rows(); ++i) {
        acc += std::log(l(i, i));
    }
    return 2.0 * acc;
}

Eigen::LLT<Eigen::MatrixXd> checked_llt(const Eigen::MatrixXd& m, const char* who) {
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) {
        throw std::runtime_error(std::string(who) + ": matrix is not positive definite");
    }
    return llt;
}

void finalize_regret(RunResult& res, const std::vector<double>& step_regret) {
    double acc = 0.0;
    for (std::size_t t = 0; t < step_regret.size(); ++t) {
        acc += step_regret[t];
        res.cum_regret[t] = acc;
    }
    res.comm_total = res.cum_comm.empty() ? 0 : res.cum_comm.back();
}

}  // namespace

std::vector<std::int64_t> delb_pull_counts(const design::Design& dsgn, int l, int d,
                                           int M, std::int64_t T) {
    if (l < 1 || d < 1 || M < 1 || T < 1) {
        throw std::invalid_argument("delb_pull_counts: invalid arguments");
    }
    dsgn.validate();
    const long double scale = 600.0L * std::pow(4.0L, l) *
                              static_cast<long double>(d) * d *
                              std::log(static_cast<long double>(M) * T);
    std::vector<std::int64_t> counts(dsgn.weights.size());
    for (std::size_t k = 0; k < dsgn.weights.size(); ++k) {
        const long double v = std::ceil(scale * dsgn.weights[k]);
        counts[k] = (v < static_cast<long double>(kCountClamp))
                        ? static_cast<std::int64_t>(v)
                        : kCountClamp;
    }
    return counts;
}

std::vector<PullAssignment> delb_assign(
    const std::vector<std::pair<int, std::int64_t>>& pull_counts, int M) {
    if (pull_counts.empty() || M < 1) {
        throw std::invalid_argument("delb_assign: invalid arguments");
    }
    std::vector<std::pair<int, std::int64_t>> order = pull_counts;
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) {
            return a.second > b.second;
        }
        return a.first < b.first;
    });
    __int128 total = 0;
    for (const auto& [key, cnt] : order) {
        if (cnt < 1) {
            throw std::invalid_argument("delb_assign: counts must be positive");
        }
        total += cnt;
    }
    const __int128 quota128 = (total + M - 1) / M;
    const std::int64_t quota = quota128 > static_cast<__int128>(kCountClamp)
                                   ? kCountClamp
                                   : static_cast<std::int64_t>(quota128);

    std::vector<PullAssignment> schedule;
    int agent = 0;
    std::int64_t capacity = quota;
    for (const auto& [key, cnt] : order) {
        std::int64_t need = cnt;
        while (need > 0) {
            if (capacity == 0) {
                ++agent;
                capacity = quota;
            }
            const std::int64_t take = std::min(need, capacity);
            schedule.push_back({agent, key, take});
            need -= take;
            capacity -= take;
        }
    }
    return schedule;
}

RegressionResult regression(const std::vector<RegressionSample>& samples,
                            const design::SpanBasis& basis) {
    if (samples.empty()) {
        throw std::invalid_argument("regression: no samples");
    }
    const Eigen::Index r = basis.rank();
    const Eigen::Index d = basis.basis.rows();
    Eigen::MatrixXd vz = Eigen::MatrixXd::Zero(r, r);
    Eigen::VectorXd xz = Eigen::VectorXd::Zero(r);
    Eigen::MatrixXd moment = Eigen::MatrixXd::Zero(d, d);
    for (const auto& s : samples) {
        const Eigen::VectorXd z = basis.basis.transpose() * s.x;
        vz.noalias() += s.weight * (z * z.transpose());
        xz.noalias() += s.weight * s.y * z;
        moment.noalias() += s.weight * (s.x * s.x.transpose());
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(vz);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
        throw std::runtime_error("regression: singular moment matrix on the span");
    }
    RegressionResult out;
    out.theta_hat = basis.basis * ldlt.solve(xz);
    out.moment = std::move(moment);
    return out;
}

std::vector<int> delb_eliminate(const std::vector<int>& active,
                                const std::vector<Eigen::VectorXd>& actions,
                                const Eigen::VectorXd& theta_hat, int l) {
    if (active.empty()) {
        throw std::invalid_argument("delb_eliminate: empty active set");
    }
    double best = -std::numeric_limits<double>::infinity();
    for (int id : active) {
        best = std::max(best, actions[static_cast<std::size_t>(id)].dot(theta_hat));
    }
    const double threshold = std::ldexp(1.0, 1 - l);
    std::vector<int> out;
    for (int id : active) {
        if (best - actions[static_cast<std::size_t>(id)].dot(theta_hat) <= threshold) {
            out.push_back(id);
        }
    }
    return out;
}

double conf_radius(const Eigen::MatrixXd& v_bar, double lambda, double delta) {
    if (!(delta > 0.0 && delta < 1.0) || !(lambda > 0.0)) {
        throw std::invalid_argument("conf_radius: lambda must be > 0, delta in (0,1)");
    }
    const auto llt = checked_llt(v_bar, "conf_radius");
    const auto d = static_cast<double>(v_bar.rows());
    const double inner =
        0.5 * log_det_llt(llt) - 0.5 * d * std::log(lambda) + std::log(1.0 / delta);
    return std::sqrt(2.0 * inner) + std::sqrt(lambda);
}

int ucb_select(const std::vector<Eigen::VectorXd>& actions,
               const Eigen::VectorXd& theta_hat, const Eigen::MatrixXd& v_bar,
               double beta) {
    if (actions.empty()) {
        throw std::invalid_argument("ucb_select: empty action set");
    }
    const auto llt = checked_llt(v_bar, "ucb_select");
    int best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < actions.size(); ++i) {
        const double bonus = std::sqrt(actions[i].dot(llt.solve(actions[i])));
        const double score = actions[i].dot(theta_hat) + beta * bonus;
        if (score > best_score) {
            best_score = score;
            best = static_cast<int>(i);
        }
    }
    return best;
}

bool sync_check(const Eigen::MatrixXd& v_t, const Eigen::MatrixXd& v_last,
                std::int64_t t, std::int64_t t_last, double threshold) {
    if (t < t_last) {
        throw std::invalid_argument("sync_check: t must be >= t_last");
    }
    const double ratio =
        log_det_llt(checked_llt(v_t, "sync_check")) -
        log_det_llt(checked_llt(v_last, "sync_check"));
    return ratio * static_cast<double>(t - t_last) > threshold;
}

RunResult delb_run(const env::LinearInstance& instance, int M, std::int64_t T,
                   std::uint64_t seed, std::vector<std::int32_t>* trace,
                   const DelbProbe* probe) {
    if (M < 1 || T < 1) {
        throw std::invalid_argument("delb_run: M and T must be >= 1");
    }
    const auto n = instance.num_actions();
    const int d = static_cast<int>(instance.dim());

    RunResult res;
    res.seed = seed;
    res.cum_regret.assign(static_cast<std::size_t>(T), 0.0);
    res.cum_comm.assign(static_cast<std::size_t>(T), 0);
    res.pull_counts.assign(n, 0);
    if (trace) {
        trace->assign(static_cast<std::size_t>(T) * static_cast<std::size_t>(M), -1);
    }

    std::vector<double> step_regret(static_cast<std::size_t>(T), 0.0);
    std::vector<double> gaps(n);
    for (std::size_t i = 0; i < n; ++i) {
        gaps[i] = env::lin_gap(instance, i);
    }

    std::vector<RandomStream> rng;
    rng.reserve(static_cast<std::size_t>(M));
    for (int i = 0; i < M; ++i) {
        rng.emplace_back(derive_seed(seed, static_cast<std::uint64_t>(i) + 1));
    }
    comm::CommLedger ledger;

    std::int64_t last_filled = -1;
    auto fill_comm_through = [&](std::int64_t upto_exclusive) {
        for (std::int64_t s = last_filled + 1; s < upto_exclusive; ++s) {
            res.cum_comm[static_cast<std::size_t>(s)] = ledger.total();
        }
        last_filled = upto_exclusive - 1;
    };
    auto record_pull = [&](std::int64_t t, int agent, int id) {
        step_regret[static_cast<std::size_t>(t)] += gaps[static_cast<std::size_t>(id)];
        res.pull_counts[static_cast<std::size_t>(id)]++;
        if (trace) {
            (*trace)[static_cast<std::size_t>(t) * static_cast<std::size_t>(M) +
                     static_cast<std::size_t>(agent)] = id;
        }
    };

    std::vector<int> active(n);
    std::iota(active.begin(), active.end(), 0);
    std::optional<Eigen::VectorXd> theta_prev;
    std::vector<int> last_pulled(static_cast<std::size_t>(M), -1);
    int l = 1;
    std::int64_t t_cur = 0;

    while (t_cur < T) {
        if (active.size() == 1) {
            // Everyone already holds the same single survivor; pulling it out
            // needs no further coordination.
            const int id = active[0];
            for (std::int64_t t = t_cur; t < T; ++t) {
                for (int i = 0; i < M; ++i) {
                    record_pull(t, i, id);
                    env::lin_sample(instance, static_cast<std::size_t>(id),
                                    rng[static_cast<std::size_t>(i)]);
                }
            }
            t_cur = T;
            break;
        }
        if (probe && probe->on_phase_start) {
            probe->on_phase_start(l, active);
        }

        std::vector<Eigen::VectorXd> active_actions;
        active_actions.reserve(active.size());
        for (int id : active) {
            active_actions.push_back(instance.actions[static_cast<std::size_t>(id)]);
        }
        const design::Design dsgn = design::solve_g_optimal(active_actions);
        const std::vector<std::int64_t> counts = delb_pull_counts(dsgn, l, d, M, T);

        std::vector<std::pair<int, std::int64_t>> keyed(counts.size());
        for (std::size_t k = 0; k < counts.size(); ++k) {
            keyed[k] = {static_cast<int>(k), counts[k]};
        }
        const auto schedule = delb_assign(keyed, M);
        ledger.record("delb_schedule", static_cast<std::int64_t>(schedule.size()));

        std::vector<std::vector<std::size_t>> per_agent(static_cast<std::size_t>(M));
        std::vector<std::int64_t> load(static_cast<std::size_t>(M), 0);
        for (std::size_t e = 0; e < schedule.size(); ++e) {
            per_agent[static_cast<std::size_t>(schedule[e].agent)].push_back(e);
            load[static_cast<std::size_t>(schedule[e].agent)] += schedule[e].pulls;
        }
        const std::int64_t phase_len = *std::max_element(load.begin(), load.end());
        const bool fits = phase_len <= T - t_cur;
        const std::int64_t t_end = fits ? t_cur + phase_len : T;

        // Locally-best filler under the previous broadcast estimate.
        int greedy_filler = -1;
        if (theta_prev) {
            double best = -std::numeric_limits<double>::infinity();
            for (int id : active) {
                const double v =
                    instance.actions[static_cast<std::size_t>(id)].dot(*theta_prev);
                if (v > best) {
                    best = v;
                    greedy_filler = id;
                }
            }
        }

        std::vector<double> entry_sums(schedule.size(), 0.0);
        for (std::int64_t t = t_cur; t < t_end; ++t) {
            const std::int64_t p = t - t_cur;
            for (int i = 0; i < M; ++i) {
                int id;
                std::int64_t entry = -1;
                std::int64_t off = p;
                for (std::size_t e : per_agent[static_cast<std::size_t>(i)]) {
                    if (off < schedule[e].pulls) {
                        entry = static_cast<std::int64_t>(e);
                        break;
                    }
                    off -= schedule[e].pulls;
                }
                if (entry >= 0) {
                    id = active[static_cast<std::size_t>(
                        dsgn.support[static_cast<std::size_t>(
                            schedule[static_cast<std::size_t>(entry)].key)])];
                } else if (greedy_filler >= 0) {
                    id = greedy_filler;
                } else if (last_pulled[static_cast<std::size_t>(i)] >= 0) {
                    id = last_pulled[static_cast<std::size_t>(i)];
                } else {
                    id = active[0];
                }
                record_pull(t, i, id);
                last_pulled[static_cast<std::size_t>(i)] = id;
                const double y = env::lin_sample(instance, static_cast<std::size_t>(id),
                                                 rng[static_cast<std::size_t>(i)]);
                if (entry >= 0) {
                    entry_sums[static_cast<std::size_t>(entry)] += y;
                }
            }
        }
        t_cur = t_end;
        fill_comm_through(t_cur);
        if (!fits) {
            break;
        }

        // Reports: (support index, mean, count) per schedule entry.
        ledger.record("delb_report", 3 * static_cast<std::int64_t>(schedule.size()));
        std::vector<RegressionSample> samples;
        samples.reserve(dsgn.support.size());
        for (std::size_t k = 0; k < dsgn.support.size(); ++k) {
            double sum = 0.0;
            std::int64_t cnt = 0;
            for (std::size_t e = 0; e < schedule.size(); ++e) {
                if (schedule[e].key == static_cast<int>(k)) {
                    sum += entry_sums[e];
                    cnt += schedule[e].pulls;
                }
            }
            if (cnt != counts[k]) {
                throw std::logic_error("delb_run: scheduled pull count mismatch");
            }
            RegressionSample s;
            s.x = active_actions[static_cast<std::size_t>(dsgn.support[k])];
            s.y = sum / static_cast<double>(cnt);
            s.weight = static_cast<double>(cnt);
            samples.push_back(std::move(s));
        }
        const design::SpanBasis basis = design::orthonormal_span(active_actions);
        const RegressionResult reg = regression(samples, basis);
        ledger.record("delb_theta", static_cast<std::int64_t>(M) * d);

        active = delb_eliminate(active, instance.actions, reg.theta_hat, l);
        theta_prev = reg.theta_hat;
        if (probe && probe->on_phase_end) {
            probe->on_phase_end(l, active, reg.theta_hat);
        }
        ++l;
    }

    fill_comm_through(T);
    finalize_regret(res, step_regret);
    return res;
}

namespace {

RunResult dislinucb_core(const env::ActionSetGenerator& gen, int M, std::int64_t T,
                         std::uint64_t seed, const DisLinOptions& options,
                         std::vector<std::int32_t>* trace, const DisLinProbe* probe) {
    if (M < 1 || T < 1) {
        throw std::invalid_argument("dislinucb_run: M and T must be >= 1");
    }
    const auto d = gen.dim();
    const double lambda = 1.0;
    const double delta =
        1.0 / (static_cast<double>(M) * M * static_cast<double>(T));
    const double threshold =
        options.sync_threshold
            ? *options.sync_threshold
            : static_cast<double>(T) *
                  std::log(static_cast<double>(M) * static_cast<double>(T)) /
                  (static_cast<double>(d) * M);

    std::size_t max_actions = 0;
    for (std::int64_t t = 0; t < std::min<std::int64_t>(T, 1024); ++t) {
        max_actions = std::max(max_actions, gen.actions_at(t).size());
    }

    RunResult res;
    res.seed = seed;
    res.cum_regret.assign(static_cast<std::size_t>(T), 0.0);
    res.cum_comm.assign(static_cast<std::size_t>(T), 0);
    res.pull_counts.assign(max_actions, 0);
    if (trace) {
        trace->assign(static_cast<std::size_t>(T) * static_cast<std::size_t>(M), -1);
    }
    std::vector<double> step_regret(static_cast<std::size_t>(T), 0.0);

    std::vector<RandomStream> rng;
    rng.reserve(static_cast<std::size_t>(M));
    for (int i = 0; i < M; ++i) {
        rng.emplace_back(derive_seed(seed, static_cast<std::uint64_t>(i) + 1));
    }
    comm::CommLedger ledger;

    const Eigen::MatrixXd lambda_eye =
        lambda * Eigen::MatrixXd::Identity(d, d);
    std::vector<Eigen::MatrixXd> w_syn(static_cast<std::size_t>(M),
                                       Eigen::MatrixXd::Zero(d, d));
    std::vector<Eigen::MatrixXd> w_new(static_cast<std::size_t>(M),
                                       Eigen::MatrixXd::Zero(d, d));
    std::vector<Eigen::VectorXd> u_syn(static_cast<std::size_t>(M),
                                       Eigen::VectorXd::Zero(d));
    std::vector<Eigen::VectorXd> u_new(static_cast<std::size_t>(M),
                                       Eigen::VectorXd::Zero(d));
    std::vector<Eigen::MatrixXd> v_last(static_cast<std::size_t>(M), lambda_eye);
    std::vector<std::int64_t> t_last(static_cast<std::size_t>(M), 0);
    int rounds = 0;
    const std::int64_t payload = static_cast<std::int64_t>(d) * (d + 1) / 2 + d;

    for (std::int64_t t = 1; t <= T; ++t) {
        const auto& acts = gen.actions_at(t - 1);
        double best_mean = -std::numeric_limits<double>::infinity();
        for (const auto& x : acts) {
            best_mean = std::max(best_mean, x.dot(gen.theta_star()));
        }
        bool round_started = options.sync_every_step;
        for (int i = 0; i < M; ++i) {
            const auto ii = static_cast<std::size_t>(i);
            const Eigen::MatrixXd v_bar = lambda_eye + w_syn[ii] + w_new[ii];
            const Eigen::LLT<Eigen::MatrixXd> llt(v_bar);
            const Eigen::VectorXd theta_hat = llt.solve(u_syn[ii] + u_new[ii]);
            const double beta = conf_radius(v_bar, lambda, delta);
            const int choice = ucb_select(acts, theta_hat, v_bar, beta);

            const auto& x = acts[static_cast<std::size_t>(choice)];
            step_regret[static_cast<std::size_t>(t - 1)] +=
                best_mean - x.dot(gen.theta_star());
            res.pull_counts[static_cast<std::size_t>(choice)]++;
            if (trace) {
                (*trace)[static_cast<std::size_t>(t - 1) * static_cast<std::size_t>(M) +
                         ii] = choice;
            }
            const double y = x.dot(gen.theta_star()) +
                             rng[ii].uniform_symmetric(gen.noise_halfwidth());
            w_new[ii].noalias() += x * x.transpose();
            u_new[ii].noalias() += y * x;

            if (!round_started) {
                const Eigen::MatrixXd v_t = lambda_eye + w_syn[ii] + w_new[ii];
                if (sync_check(v_t, v_last[ii], t, t_last[ii], threshold)) {
                    round_started = true;
                }
            }
        }

        if (round_started) {
            ++rounds;
            ledger.record("sync_signal", 1);
            ledger.record("sync_upload", static_cast<std::int64_t>(M) * payload);
            Eigen::MatrixXd w_total = w_syn[0];
            Eigen::VectorXd u_total = u_syn[0];
            for (int i = 0; i < M; ++i) {
                w_total += w_new[static_cast<std::size_t>(i)];
                u_total += u_new[static_cast<std::size_t>(i)];
            }
            ledger.record("sync_download", static_cast<std::int64_t>(M) * payload);
            for (int i = 0; i < M; ++i) {
                const auto ii = static_cast<std::size_t>(i);
                w_syn[ii] = w_total;
                u_syn[ii] = u_total;
                w_new[ii].setZero();
                u_new[ii].setZero();
                t_last[ii] = t;
                v_last[ii] = lambda_eye + w_syn[ii];
            }
            for (int i = 1; i < M; ++i) {
                const auto ii = static_cast<std::size_t>(i);
                if (w_syn[ii] != w_syn[0] || u_syn[ii] != u_syn[0]) {
                    throw std::logic_error(
                        "dislinucb_run: agents disagree after synchronization");
                }
            }
            if (probe && probe->on_sync) {
                probe->on_sync(t, rounds);
            }
        }
        res.cum_comm[static_cast<std::size_t>(t - 1)] = ledger.total();
    }
    finalize_regret(res, step_regret);
    return res;
}

}  // namespace

RunResult dislinucb_run(const env::ActionSetGenerator& gen, int M, std::int64_t T,
                        std::uint64_t seed, const DisLinOptions& options,
                        std::vector<std::int32_t>* trace, const DisLinProbe* probe) {
    return dislinucb_core(gen, M, T, seed, options, trace, probe);
}

RunResult dislinucb_run(const env::LinearInstance& instance, int M, std::int64_t T,
                        std::uint64_t seed, const DisLinOptions& options,
                        std::vector<std::int32_t>* trace, const DisLinProbe* probe) {
    return dislinucb_core(env::ActionSetGenerator::fixed(instance), M, T, seed,
                          options, trace, probe);
}

RunResult pooled_linucb_run(const env::LinearInstance& instance, int M,
                            std::int64_t T, std::uint64_t seed,
                            std::vector<std::int32_t>* trace) {
    DisLinOptions options;
    options.sync_every_step = true;
    return dislinucb_core(env::ActionSetGenerator::fixed(instance), M, T, seed,
                          options, trace, nullptr);
}

}  // namespace dbandit::linear
