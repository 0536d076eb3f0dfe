#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "dbandit/comm.hpp"
#include "dbandit/design.hpp"
#include "dbandit/env.hpp"
#include "dbandit/result.hpp"
#include "dbandit/rng.hpp"

namespace dbandit::linear {

// Pulls per support action: m_l(x) = ceil(600 * 4^l * d^2 * pi(x) * ln(MT)),
// returned parallel to design.support. Values are clamped against overflow.
std::vector<std::int64_t> delb_pull_counts(const design::Design& dsgn, int l, int d,
                                           int M, std::int64_t T);

struct PullAssignment {
    int agent = 0;
    int key = 0;  // caller-defined arm key (support index in DELB)
    std::int64_t pulls = 0;
};

// Largest-count-first assignment: arms in descending pull count (ties by
// lower key), agents ascending, advancing when the per-agent quota
// p = ceil(total/M) fills.
std::vector<PullAssignment> delb_assign(
    const std::vector<std::pair<int, std::int64_t>>& pull_counts, int M);

struct RegressionSample {
    Eigen::VectorXd x;
    double y = 0.0;
    double weight = 1.0;
};

struct RegressionResult {
    Eigen::VectorXd theta_hat;  // embedded back into ambient coordinates
    Eigen::MatrixXd moment;     // sum of weight * x x^T (ambient)
};

// Unregularized least squares solved in the given span basis.
RegressionResult regression(const std::vector<RegressionSample>& samples,
                            const design::SpanBasis& basis);

// Keeps x iff max_b <theta_hat, b - x> <= 2^(1-l) over the active list.
std::vector<int> delb_eliminate(const std::vector<int>& active,
                                const std::vector<Eigen::VectorXd>& actions,
                                const Eigen::VectorXd& theta_hat, int l);

// sqrt(2 ln(det(V)^1/2 det(lambda I)^-1/2 / delta)) + sqrt(lambda).
double conf_radius(const Eigen::MatrixXd& v_bar, double lambda, double delta);

// argmax over actions of <x, theta_hat> + beta * ||x||_{V^-1}; ties go to
// the lowest index.
int ucb_select(const std::vector<Eigen::VectorXd>& actions,
               const Eigen::VectorXd& theta_hat, const Eigen::MatrixXd& v_bar,
               double beta);

// ln(det V_t / det V_last) * (t - t_last) > threshold.
bool sync_check(const Eigen::MatrixXd& v_t, const Eigen::MatrixXd& v_last,
                std::int64_t t, std::int64_t t_last, double threshold);

struct DelbProbe {
    std::function<void(int, const std::vector<int>&)> on_phase_start;
    std::function<void(int, const std::vector<int>&, const Eigen::VectorXd&)>
        on_phase_end;  // phase, survivors, broadcast theta
};

// Distributed elimination for linear bandits (fixed action set).
RunResult delb_run(const env::LinearInstance& instance, int M, std::int64_t T,
                   std::uint64_t seed, std::vector<std::int32_t>* trace = nullptr,
                   const DelbProbe* probe = nullptr);

struct DisLinOptions {
    // When set, replaces the default threshold T ln(MT) / (d M).
    std::optional<double> sync_threshold;
    // Forces a communication round at every step (the pooled baseline).
    bool sync_every_step = false;
};

struct DisLinProbe {
    std::function<void(std::int64_t, int)> on_sync;  // step (1-based), round no.
};

// Distributed LinUCB with determinant-triggered synchronization. Supports
// time-varying action sets through the generator.
RunResult dislinucb_run(const env::ActionSetGenerator& gen, int M, std::int64_t T,
                        std::uint64_t seed, const DisLinOptions& options = {},
                        std::vector<std::int32_t>* trace = nullptr,
                        const DisLinProbe* probe = nullptr);

RunResult dislinucb_run(const env::LinearInstance& instance, int M, std::int64_t T,
                        std::uint64_t seed, const DisLinOptions& options = {},
                        std::vector<std::int32_t>* trace = nullptr,
                        const DisLinProbe* probe = nullptr);

// DisLinUCB with a synchronization round forced after every step.
RunResult pooled_linucb_run(const env::LinearInstance& instance, int M,
                            std::int64_t T, std::uint64_t seed,
                            std::vector<std::int32_t>* trace = nullptr);

}  // namespace dbandit::linear
