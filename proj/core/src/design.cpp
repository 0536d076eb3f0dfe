#include "dbandit/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace dbandit::design {

namespace {

constexpr double kRankTol = 1e-10;
constexpr double kPruneTol = 1e-8;
constexpr int kMaxIters = 100000;

Eigen::MatrixXd moment_matrix(const std::vector<Eigen::VectorXd>& pts,
                              const std::vector<int>& support,
                              const std::vector<double>& weights) {
    const Eigen::Index r = pts[0].size();
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(r, r);
    for (std::size_t k = 0; k < support.size(); ++k) {
        const auto& z = pts[static_cast<std::size_t>(support[k])];
        v.noalias() += weights[k] * (z * z.transpose());
    }
    return v;
}

// max_i z_i^T V^{-1} z_i together with the lowest attaining index.
// Returns {g, argmax}; g is +inf when V is numerically singular.
std::pair<double, int> max_leverage(const Eigen::MatrixXd& v,
                                    const std::vector<Eigen::VectorXd>& pts) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(v);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
        return {std::numeric_limits<double>::infinity(), 0};
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(v, Eigen::EigenvaluesOnly);
    const double emax = eig.eigenvalues().maxCoeff();
    const double emin = eig.eigenvalues().minCoeff();
    if (!(emin > kRankTol * std::max(1.0, emax))) {
        return {std::numeric_limits<double>::infinity(), 0};
    }
    double g = -1.0;
    int arg = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double s = pts[i].dot(ldlt.solve(pts[i]));
        if (s > g) {
            g = s;
            arg = static_cast<int>(i);
        }
    }
    return {g, arg};
}

double g_of(const std::vector<Eigen::VectorXd>& pts,
            const std::vector<int>& support, const std::vector<double>& weights) {
    return max_leverage(moment_matrix(pts, support, weights), pts).first;
}

// One exact null-space reduction step: removes at least one support point
// while keeping V(pi) and the weight sum unchanged.
bool caratheodory_step(const std::vector<Eigen::VectorXd>& pts,
                       std::vector<int>& support, std::vector<double>& weights) {
    const Eigen::Index r = pts[0].size();
    const Eigen::Index lifted = r * (r + 1) / 2 + 1;
    const auto s = static_cast<Eigen::Index>(support.size());
    if (s <= lifted) {
        return false;
    }
    Eigen::MatrixXd a(lifted, s);
    for (Eigen::Index j = 0; j < s; ++j) {
        const auto& z = pts[static_cast<std::size_t>(support[static_cast<std::size_t>(j)])];
        Eigen::Index row = 0;
        for (Eigen::Index p = 0; p < r; ++p) {
            for (Eigen::Index q = p; q < r; ++q) {
                a(row++, j) = z(p) * z(q);
            }
        }
        a(row, j) = 1.0;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (lu.dimensionOfKernel() == 0) {
        return false;
    }
    Eigen::VectorXd c = lu.kernel().col(0);
    if (c.maxCoeff() <= 0.0) {
        c = -c;
    }
    const double cmax = c.cwiseAbs().maxCoeff();
    double t = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < s; ++j) {
        if (c(j) > 1e-14 * cmax) {
            t = std::min(t, weights[static_cast<std::size_t>(j)] / c(j));
        }
    }
    if (!std::isfinite(t)) {
        return false;
    }
    std::vector<int> new_support;
    std::vector<double> new_weights;
    for (Eigen::Index j = 0; j < s; ++j) {
        const double w = weights[static_cast<std::size_t>(j)] - t * c(j);
        if (w > 1e-13) {
            new_support.push_back(support[static_cast<std::size_t>(j)]);
            new_weights.push_back(w);
        }
    }
    if (new_support.size() >= support.size()) {
        return false;
    }
    const double sum = std::accumulate(new_weights.begin(), new_weights.end(), 0.0);
    for (auto& w : new_weights) {
        w /= sum;
    }
    support = std::move(new_support);
    weights = std::move(new_weights);
    return true;
}

void sort_by_index(std::vector<int>& support, std::vector<double>& weights) {
    std::vector<std::size_t> order(support.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return support[a] < support[b]; });
    std::vector<int> s2;
    std::vector<double> w2;
    s2.reserve(order.size());
    w2.reserve(order.size());
    for (std::size_t k : order) {
        s2.push_back(support[k]);
        w2.push_back(weights[k]);
    }
    support = std::move(s2);
    weights = std::move(w2);
}

}  // namespace

void Design::validate() const {
    if (support.size() != weights.size() || support.empty()) {
        throw std::invalid_argument("Design: support/weights size mismatch or empty");
    }
    double sum = 0.0;
    for (double w : weights) {
        if (!(w > 0.0)) {
            throw std::invalid_argument("Design: weights must be positive");
        }
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument("Design: weights must sum to 1");
    }
    std::vector<int> s = support;
    std::sort(s.begin(), s.end());
    if (std::adjacent_find(s.begin(), s.end()) != s.end()) {
        throw std::invalid_argument("Design: support indices must be distinct");
    }
}

SpanBasis orthonormal_span(const std::vector<Eigen::VectorXd>& actions, double tol) {
    if (actions.empty()) {
        throw std::invalid_argument("orthonormal_span: empty action list");
    }
    const Eigen::Index d = actions[0].size();
    Eigen::MatrixXd x(d, static_cast<Eigen::Index>(actions.size()));
    for (std::size_t i = 0; i < actions.size(); ++i) {
        x.col(static_cast<Eigen::Index>(i)) = actions[i];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    qr.setThreshold(tol);
    const Eigen::Index r = qr.rank();
    if (r == 0) {
        throw std::invalid_argument("orthonormal_span: action set has rank zero");
    }
    SpanBasis out;
    out.basis = qr.householderQ() * Eigen::MatrixXd::Identity(d, r);
    return out;
}

int xi_support_bound(int span_dim) {
    if (span_dim < 1) {
        throw std::invalid_argument("xi_support_bound: dimension must be >= 1");
    }
    if (span_dim < 3) {
        return span_dim * (span_dim + 1) / 2;
    }
    const double v = 48.0 * span_dim * std::log(std::log(static_cast<double>(span_dim)));
    return static_cast<int>(std::ceil(v));
}

double g_value(const Design& design, const std::vector<Eigen::VectorXd>& actions) {
    design.validate();
    const SpanBasis sb = orthonormal_span(actions);
    std::vector<Eigen::VectorXd> z(actions.size());
    for (std::size_t i = 0; i < actions.size(); ++i) {
        z[i] = sb.basis.transpose() * actions[i];
    }
    for (int idx : design.support) {
        if (idx < 0 || static_cast<std::size_t>(idx) >= actions.size()) {
            throw std::invalid_argument("g_value: support index out of range");
        }
    }
    const auto [g, arg] = max_leverage(moment_matrix(z, design.support, design.weights), z);
    (void)arg;
    if (!std::isfinite(g)) {
        throw std::invalid_argument("g_value: moment matrix singular on the action span");
    }
    return g;
}

Design solve_g_optimal(const std::vector<Eigen::VectorXd>& actions) {
    if (actions.empty()) {
        throw std::invalid_argument("solve_g_optimal: empty action list");
    }
    const SpanBasis sb = orthonormal_span(actions);
    const auto r = static_cast<int>(sb.rank());
    const auto n = actions.size();
    std::vector<Eigen::VectorXd> z(n);
    for (std::size_t i = 0; i < n; ++i) {
        z[i] = sb.basis.transpose() * actions[i];
    }

    Design out;
    if (r == 1) {
        std::size_t best = 0;
        double best_norm = z[0].squaredNorm();
        for (std::size_t i = 1; i < n; ++i) {
            if (z[i].squaredNorm() > best_norm) {
                best_norm = z[i].squaredNorm();
                best = i;
            }
        }
        out.support = {static_cast<int>(best)};
        out.weights = {1.0};
        return out;
    }

    // Greedy max-volume initialization: r points, each maximizing the norm of
    // its component orthogonal to the previously chosen directions.
    std::vector<int> support;
    std::vector<Eigen::VectorXd> dirs;
    for (int k = 0; k < r; ++k) {
        int best = -1;
        double best_norm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            Eigen::VectorXd res = z[i];
            for (const auto& q : dirs) {
                res -= q.dot(z[i]) * q;
            }
            const double s = res.squaredNorm();
            if (s > best_norm + 1e-18 &&
                std::find(support.begin(), support.end(), static_cast<int>(i)) ==
                    support.end()) {
                best_norm = s;
                best = static_cast<int>(i);
            }
        }
        if (best < 0) {
            throw std::runtime_error("solve_g_optimal: degenerate action set");
        }
        support.push_back(best);
        Eigen::VectorXd q = z[static_cast<std::size_t>(best)];
        for (const auto& prev : dirs) {
            q -= prev.dot(z[static_cast<std::size_t>(best)]) * prev;
        }
        q.normalize();
        dirs.push_back(q);
    }
    std::vector<double> weights(support.size(), 1.0 / r);

    // Frank-Wolfe. Target slightly inside 2r so later exact reductions keep
    // the 2d' guarantee; for d' = 2 run close to the optimum (g* = d') to
    // leave room for the final drop to a 3-point core set.
    const double hard_cap = 2.0 * r;
    const double target = (r == 2) ? 1.05 * r : 1.999 * r;
    Eigen::MatrixXd v = moment_matrix(z, support, weights);
    double g = std::numeric_limits<double>::infinity();
    bool converged = false;
    for (int iter = 0; iter < kMaxIters; ++iter) {
        const auto [gv, arg] = max_leverage(v, z);
        g = gv;
        if (!std::isfinite(g)) {
            throw std::runtime_error("solve_g_optimal: singular moment matrix");
        }
        if (g <= target) {
            converged = true;
            break;
        }
        const double gamma = (g / r - 1.0) / (g - 1.0);
        for (auto& w : weights) {
            w *= 1.0 - gamma;
        }
        auto it = std::find(support.begin(), support.end(), arg);
        if (it == support.end()) {
            support.push_back(arg);
            weights.push_back(gamma);
        } else {
            weights[static_cast<std::size_t>(it - support.begin())] += gamma;
        }
        const auto& zz = z[static_cast<std::size_t>(arg)];
        v = (1.0 - gamma) * v;
        v.noalias() += gamma * (zz * zz.transpose());
    }
    if (!converged && g > hard_cap) {
        throw std::runtime_error("solve_g_optimal: did not reach g <= 2d within iteration cap");
    }

    // Exact core-set reduction to at most d'(d'+1)/2 + 1 points (keeps V and
    // therefore g unchanged).
    while (caratheodory_step(z, support, weights)) {
    }

    // For d' = 2 the bound is 3 while the reduction can leave 4 points; drop
    // the lightest point whose removal keeps g within 2d'.
    const int xi = xi_support_bound(r);
    while (static_cast<int>(support.size()) > xi) {
        std::vector<std::size_t> order(support.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return weights[a] < weights[b];
        });
        bool dropped = false;
        for (std::size_t cand : order) {
            std::vector<int> s2;
            std::vector<double> w2;
            for (std::size_t k = 0; k < support.size(); ++k) {
                if (k == cand) {
                    continue;
                }
                s2.push_back(support[k]);
                w2.push_back(weights[k]);
            }
            const double sum = std::accumulate(w2.begin(), w2.end(), 0.0);
            for (auto& w : w2) {
                w /= sum;
            }
            if (g_of(z, s2, w2) <= hard_cap) {
                support = std::move(s2);
                weights = std::move(w2);
                dropped = true;
                break;
            }
        }
        if (!dropped) {
            throw std::runtime_error("solve_g_optimal: cannot meet core-set size bound");
        }
    }

    // Prune negligible weights; rolled back if the re-check fails.
    {
        std::vector<int> s2;
        std::vector<double> w2;
        for (std::size_t k = 0; k < support.size(); ++k) {
            if (weights[k] >= kPruneTol) {
                s2.push_back(support[k]);
                w2.push_back(weights[k]);
            }
        }
        if (!s2.empty() && s2.size() < support.size()) {
            const double sum = std::accumulate(w2.begin(), w2.end(), 0.0);
            for (auto& w : w2) {
                w /= sum;
            }
            if (g_of(z, s2, w2) <= hard_cap) {
                support = std::move(s2);
                weights = std::move(w2);
            }
        }
    }

    const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
    for (auto& w : weights) {
        w /= sum;
    }
    sort_by_index(support, weights);
    out.support = std::move(support);
    out.weights = std::move(weights);
    out.validate();
    return out;
}

}  // namespace dbandit::design
