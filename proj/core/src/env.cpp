#include "dbandit/env.hpp"

#include <algorithm>
#include <stdexcept>

namespace dbandit::env {

namespace {
constexpr double kNormTol = 1e-12;
}

MabInstance::MabInstance(std::vector<double> m) : means(std::move(m)) {
    if (means.size() < 2) {
        throw std::invalid_argument("MabInstance: need at least 2 arms");
    }
    for (double mu : means) {
        if (!(mu >= 0.0 && mu <= 1.0)) {
            throw std::invalid_argument("MabInstance: means must lie in [0,1]");
        }
    }
}

double MabInstance::best_mean() const {
    return *std::max_element(means.begin(), means.end());
}

std::size_t MabInstance::best_arm() const {
    return static_cast<std::size_t>(
        std::max_element(means.begin(), means.end()) - means.begin());
}

LinearInstance::LinearInstance(std::vector<Eigen::VectorXd> acts,
                               Eigen::VectorXd theta, double sigma)
    : actions(std::move(acts)), theta_star(std::move(theta)), noise_halfwidth(sigma) {
    if (actions.empty()) {
        throw std::invalid_argument("LinearInstance: action set must be non-empty");
    }
    if (!(sigma > 0.0 && sigma <= 1.0)) {
        throw std::invalid_argument("LinearInstance: noise halfwidth must be in (0,1]");
    }
    if (theta_star.norm() > 1.0 + kNormTol) {
        throw std::invalid_argument("LinearInstance: ||theta*|| must be <= 1");
    }
    for (const auto& x : actions) {
        if (x.size() != theta_star.size()) {
            throw std::invalid_argument("LinearInstance: action dimension mismatch");
        }
        if (x.norm() > 1.0 + kNormTol) {
            throw std::invalid_argument("LinearInstance: action norms must be <= 1");
        }
    }
}

double LinearInstance::mean_reward(std::size_t action) const {
    if (action >= actions.size()) {
        throw std::invalid_argument("LinearInstance: action index out of range");
    }
    return actions[action].dot(theta_star);
}

double LinearInstance::best_mean() const {
    double best = actions[0].dot(theta_star);
    for (std::size_t i = 1; i < actions.size(); ++i) {
        best = std::max(best, actions[i].dot(theta_star));
    }
    return best;
}

ActionSetGenerator ActionSetGenerator::fixed(const LinearInstance& instance) {
    ActionSetGenerator g;
    g.frames_.push_back(instance.actions);
    g.theta_ = instance.theta_star;
    g.sigma_ = instance.noise_halfwidth;
    return g;
}

ActionSetGenerator ActionSetGenerator::varying(
    std::vector<std::vector<Eigen::VectorXd>> frames, Eigen::VectorXd theta,
    double sigma) {
    if (frames.empty()) {
        throw std::invalid_argument("ActionSetGenerator: need at least one frame");
    }
    ActionSetGenerator g;
    g.theta_ = std::move(theta);
    g.sigma_ = sigma;
    for (auto& f : frames) {
        // validates norms and dimensions
        LinearInstance check(f, g.theta_, sigma);
        g.frames_.push_back(std::move(f));
    }
    return g;
}

const std::vector<Eigen::VectorXd>& ActionSetGenerator::actions_at(std::int64_t t) const {
    return frames_[static_cast<std::size_t>(t) % frames_.size()];
}

double mab_sample(const MabInstance& instance, std::size_t arm, RandomStream& rng) {
    if (arm >= instance.num_arms()) {
        throw std::invalid_argument("mab_sample: arm index out of range");
    }
    return rng.bernoulli(instance.means[arm]) ? 1.0 : 0.0;
}

double mab_gap(const MabInstance& instance, std::size_t arm) {
    if (arm >= instance.num_arms()) {
        throw std::invalid_argument("mab_gap: arm index out of range");
    }
    return instance.best_mean() - instance.means[arm];
}

double lin_sample(const LinearInstance& instance, std::size_t action,
                  RandomStream& rng) {
    return instance.mean_reward(action) +
           rng.uniform_symmetric(instance.noise_halfwidth);
}

double lin_gap(const LinearInstance& instance, std::size_t action) {
    return instance.best_mean() - instance.mean_reward(action);
}

}  // namespace dbandit::env
