#pragma once

#include <Eigen/Dense>
#include <vector>

namespace dbandit::design {

// Probability distribution over a core set of actions: support holds indices
// into the action list the design was solved on, weights are positive and
// sum to 1 (within 1e-9).
struct Design {
    std::vector<int> support;
    std::vector<double> weights;

    void validate() const;
};

// Orthonormal basis of span(actions), rank-revealed at tolerance 1e-10.
// basis is d x r with orthonormal columns; r >= 1 (zero-rank input throws).
struct SpanBasis {
    Eigen::MatrixXd basis;
    Eigen::Index rank() const { return basis.cols(); }
};

SpanBasis orthonormal_span(const std::vector<Eigen::VectorXd>& actions,
                           double tol = 1e-10);

// Support-size bound of the approximate solver: 48*d*ln(ln(d)) rounded up for
// d >= 3, d(d+1)/2 below that (ln ln is not usable there).
int xi_support_bound(int span_dim);

// g(pi) = max_x x^T V(pi)^{-1} x over the action list, evaluated in span
// coordinates of the actions. V(pi) must be invertible on that span.
double g_value(const Design& design, const std::vector<Eigen::VectorXd>& actions);

// Approximate G-optimal design: Frank-Wolfe on the span with greedy
// max-volume initialization, followed by exact core-set reduction. The
// result satisfies g <= 2*d' and |support| <= xi(d') where d' = span rank.
// Deterministic: identical inputs give bitwise-identical designs.
Design solve_g_optimal(const std::vector<Eigen::VectorXd>& actions);

}  // namespace dbandit::design
