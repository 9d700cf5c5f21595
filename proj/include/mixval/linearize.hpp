#pragma once

#include <vector>

#include "json.hpp"
#include "mixval/blackbox.hpp"
#include "mixval/model.hpp"

namespace mixval {

struct NelderMeadOptions {
    int restarts = 5;          ///< starts: box centre, then Halton points
    long max_evaluations = 20000;
    double initial_step = 0.1; ///< simplex edge as a fraction of the box width
    double x_tolerance = 1e-10;///< simplex diameter, box-width units
    double f_tolerance = 1e-15;///< relative spread of objective values
};

struct OlsResult {
    VectorXd K_hat;
    double objective = 0.0;
    long evaluations = 0;
    bool budget_exhausted = false;
    std::vector<double> best_trace;  ///< best objective after each start
};

/// argmin over the box of ||obs - bb(K)||^2 by derivative-free search. The
/// objective is always evaluated at box-clipped points, with a penalty on the
/// distance outside the box, and the returned point is clipped.
OlsResult ols_reference(BlackBox& bb, const Box& box, const VectorXd& obs, const NelderMeadOptions& opts = {});

/// h_j = 1e-4 (b_j - a_j).
VectorXd default_steps(const Box& box);

/// Column j is (f(K + h_j e_j) - f(K - h_j e_j)) / (2 h_j). Near the boundary
/// the second-order one-sided rule (-3 f0 + 4 f1 - f2) / (2 h) is used instead,
/// shrinking h when even that would leave the box. With jobs > 1 and a black box
/// that allows it, columns are evaluated concurrently.
MatrixXd finite_diff_jacobian(BlackBox& bb, const VectorXd& K, const Box& box, const VectorXd& h, int jobs = 1);

/// f(K) ~ f0 + J (K - K_hat).
struct LinearSurrogate {
    VectorXd K_hat;
    VectorXd f0;
    MatrixXd J;
    Box box;
    double objective = 0.0;
    long evaluations = 0;
    bool budget_exhausted = false;
};

LinearSurrogate build_surrogate(BlackBox& bb, const Box& box, const VectorXd& obs, const NelderMeadOptions& opts = {},
                                double step_fraction = 1e-4, int jobs = 1);

nlohmann::json surrogate_to_json(const LinearSurrogate& s);
LinearSurrogate surrogate_from_json(const nlohmann::json& j);

struct LinearizedProblem {
    LinearCode code;  ///< tabulated design J[:, fit]
    VectorXd y;       ///< obs - f0 + J[:, fit] K_hat[fit]
};

/// Holds the unselected parameters at K_hat, so y ~ J[:, fit] K[fit] and the
/// coefficients fitted to the result are the selected parameters themselves.
/// Throws ModelError when the selected columns are rank-deficient.
LinearizedProblem to_linear_code(const LinearSurrogate& s, const std::vector<Index>& fit_indices, const VectorXd& obs);

}  // namespace mixval
