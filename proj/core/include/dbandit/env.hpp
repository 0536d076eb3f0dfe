#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "dbandit/rng.hpp"

namespace dbandit::env {

// K-armed Bernoulli bandit instance. Immutable after construction.
struct MabInstance {
    std::vector<double> means;

    explicit MabInstance(std::vector<double> m);

    std::size_t num_arms() const { return means.size(); }
    double best_mean() const;
    // lowest-index best arm
    std::size_t best_arm() const;
};

// Finite-action stochastic linear bandit instance: actions on the unit ball,
// hidden parameter theta_star, reward noise uniform on [-sigma, sigma].
struct LinearInstance {
    std::vector<Eigen::VectorXd> actions;
    Eigen::VectorXd theta_star;
    double noise_halfwidth = 1.0;

    LinearInstance(std::vector<Eigen::VectorXd> acts, Eigen::VectorXd theta,
                   double sigma);

    std::size_t num_actions() const { return actions.size(); }
    Eigen::Index dim() const { return theta_star.size(); }
    double mean_reward(std::size_t action) const;
    double best_mean() const;
};

// Action sets per time step. Fixed mode serves one list forever; varying
// mode cycles through a pre-generated sequence of lists (all lists must
// satisfy the LinearInstance action invariants).
class ActionSetGenerator {
public:
    static ActionSetGenerator fixed(const LinearInstance& instance);
    static ActionSetGenerator varying(std::vector<std::vector<Eigen::VectorXd>> frames,
                                      Eigen::VectorXd theta, double sigma);

    const std::vector<Eigen::VectorXd>& actions_at(std::int64_t t) const;
    const Eigen::VectorXd& theta_star() const { return theta_; }
    double noise_halfwidth() const { return sigma_; }
    bool is_fixed() const { return frames_.size() == 1; }
    Eigen::Index dim() const { return theta_.size(); }

private:
    ActionSetGenerator() = default;
    std::vector<std::vector<Eigen::VectorXd>> frames_;
    Eigen::VectorXd theta_;
    double sigma_ = 1.0;
};

// Bernoulli draw from the given arm; returns 0.0 or 1.0.
double mab_sample(const MabInstance& instance, std::size_t arm, RandomStream& rng);

// Suboptimality gap: max(means) - means[arm].
double mab_gap(const MabInstance& instance, std::size_t arm);

// Reward draw for an action: <x, theta*> + eta, eta ~ U[-sigma, sigma].
double lin_sample(const LinearInstance& instance, std::size_t action, RandomStream& rng);

// Gap of action within the instance's fixed action set.
double lin_gap(const LinearInstance& instance, std::size_t action);

}  // namespace dbandit::env
