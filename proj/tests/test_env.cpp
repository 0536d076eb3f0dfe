#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "dbandit/env.hpp"
#include "dbandit/rng.hpp"

using dbandit::RandomStream;
using dbandit::derive_seed;
namespace env = dbandit::env;

namespace {

Eigen::VectorXd unit(int d, int axis) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
    v(axis) = 1.0;
    return v;
}

}  // namespace

TEST_CASE("MabInstance validates its invariants") {
    CHECK_THROWS_AS(env::MabInstance({0.5}), std::invalid_argument);
    CHECK_THROWS_AS(env::MabInstance({0.5, 1.5}), std::invalid_argument);
    CHECK_THROWS_AS(env::MabInstance({-0.1, 0.5}), std::invalid_argument);
    const env::MabInstance inst({0.3, 0.9, 0.1});
    CHECK(inst.num_arms() == 3);
    CHECK(inst.best_arm() == 1);
}

TEST_CASE("mab_sample degenerate Bernoulli arms") {
    const env::MabInstance inst({1.0, 0.0});
    RandomStream rng(7);
    for (int i = 0; i < 200; ++i) {
        CHECK(env::mab_sample(inst, 0, rng) == 1.0);
        CHECK(env::mab_sample(inst, 1, rng) == 0.0);
    }
    CHECK_THROWS_AS(env::mab_sample(inst, 2, rng), std::invalid_argument);
}

TEST_CASE("mab_sample empirical mean concentrates") {
    const env::MabInstance inst({0.5, 0.2});
    RandomStream rng(12345);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        sum += env::mab_sample(inst, 0, rng);
    }
    CHECK(std::abs(sum / n - 0.5) < 0.01);
}

TEST_CASE("mab_gap examples") {
    const env::MabInstance a({0.9, 0.5});
    CHECK(env::mab_gap(a, 0) == doctest::Approx(0.0));
    CHECK(env::mab_gap(a, 1) == doctest::Approx(0.4));
    const env::MabInstance b({0.3, 0.3, 0.3});
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(env::mab_gap(b, k) == 0.0);
    }
    CHECK_THROWS_AS(env::mab_gap(a, 5), std::invalid_argument);
}

TEST_CASE("gaps are nonnegative and zero at the best arm") {
    const env::MabInstance inst({0.11, 0.52, 0.52, 0.4});
    CHECK(env::mab_gap(inst, inst.best_arm()) == 0.0);
    for (std::size_t k = 0; k < inst.num_arms(); ++k) {
        CHECK(env::mab_gap(inst, k) >= 0.0);
    }
}

TEST_CASE("LinearInstance validates norms") {
    const int d = 3;
    std::vector<Eigen::VectorXd> acts{unit(d, 0), unit(d, 1)};
    Eigen::VectorXd theta = 0.5 * unit(d, 0);
    CHECK_NOTHROW(env::LinearInstance(acts, theta, 1.0));
    CHECK_THROWS_AS(env::LinearInstance({2.0 * unit(d, 0)}, theta, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(env::LinearInstance(acts, 3.0 * unit(d, 0), 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(env::LinearInstance(acts, theta, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(env::LinearInstance({}, theta, 1.0), std::invalid_argument);
}

TEST_CASE("lin_sample respects the noise bounds") {
    const int d = 2;
    const env::LinearInstance inst({unit(d, 0), unit(d, 1)}, unit(d, 0), 0.1);
    RandomStream rng(3);
    for (int i = 0; i < 2000; ++i) {
        const double y = env::lin_sample(inst, 0, rng);
        CHECK(y >= 0.9);
        CHECK(y <= 1.1);
    }
    CHECK_THROWS_AS(env::lin_sample(inst, 9, rng), std::invalid_argument);
}

TEST_CASE("lin_sample vanishing noise yields the mean") {
    const int d = 2;
    Eigen::VectorXd theta(d);
    theta << 0.6, 0.8;
    const env::LinearInstance inst({unit(d, 0), unit(d, 1)}, theta, 1e-15);
    RandomStream rng(4);
    CHECK(env::lin_sample(inst, 0, rng) == doctest::Approx(0.6).epsilon(1e-14));
}

TEST_CASE("lin_sample orthogonal action concentrates at zero") {
    const int d = 2;
    const env::LinearInstance inst({unit(d, 1)}, unit(d, 0), 1.0);
    RandomStream rng(99);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        sum += env::lin_sample(inst, 0, rng);
    }
    CHECK(std::abs(sum / n) < 0.02);
}

TEST_CASE("lin_gap examples") {
    const int d = 2;
    SUBCASE("orthogonal basis") {
        const env::LinearInstance inst({unit(d, 0), unit(d, 1)}, unit(d, 0), 0.5);
        CHECK(env::lin_gap(inst, 0) == doctest::Approx(0.0));
        CHECK(env::lin_gap(inst, 1) == doctest::Approx(1.0));
    }
    SUBCASE("direct arithmetic") {
        Eigen::VectorXd theta(d);
        theta << 0.6, 0.8;
        const env::LinearInstance inst({unit(d, 0), unit(d, 1)}, theta, 0.5);
        CHECK(env::lin_gap(inst, 0) == doctest::Approx(0.2));
        CHECK(env::lin_gap(inst, 1) == doctest::Approx(0.0));
    }
}

TEST_CASE("sampling is a pure function of the stream state") {
    const env::MabInstance inst({0.4, 0.7});
    RandomStream a(derive_seed(11, 1));
    RandomStream b(derive_seed(11, 1));
    for (int i = 0; i < 500; ++i) {
        CHECK(env::mab_sample(inst, i % 2, a) == env::mab_sample(inst, i % 2, b));
    }
}

TEST_CASE("action set generator serves frames cyclically") {
    const int d = 2;
    const env::LinearInstance inst({unit(d, 0), unit(d, 1)}, unit(d, 0), 0.5);
    const auto fixed = env::ActionSetGenerator::fixed(inst);
    CHECK(fixed.is_fixed());
    CHECK(&fixed.actions_at(0) == &fixed.actions_at(17));

    std::vector<std::vector<Eigen::VectorXd>> frames{
        {unit(d, 0)}, {unit(d, 1), 0.5 * unit(d, 0)}};
    const auto varying =
        env::ActionSetGenerator::varying(frames, unit(d, 0), 0.5);
    CHECK_FALSE(varying.is_fixed());
    CHECK(varying.actions_at(0).size() == 1);
    CHECK(varying.actions_at(1).size() == 2);
    CHECK(varying.actions_at(2).size() == 1);

    std::vector<std::vector<Eigen::VectorXd>> bad{{2.0 * unit(d, 0)}};
    CHECK_THROWS_AS(env::ActionSetGenerator::varying(bad, unit(d, 0), 0.5),
                    std::invalid_argument);
}
