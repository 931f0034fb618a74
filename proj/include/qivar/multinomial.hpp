#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qivar/dataset.hpp"

namespace qivar {

// Multinomial logistic assignment model with hospital 1 as reference:
// P(Z=z|x) = softmax over {0, gamma_z + phi_z'x}. Hospitals treating
// fewer than volume_threshold patients keep only their intercept
// (phi_z = 0), mirroring the small-hospital fallback.
struct AssignmentFit {
    int m = 0;
    int p = 0;
    Eigen::VectorXd gammas;            // size m, gammas[0] == 0
    Eigen::MatrixXd phis;              // m x p, row 0 == 0
    std::vector<bool> intercept_only;  // size m; reference entry is informational
    int volume_threshold = 0;

    // Free-parameter bookkeeping: (hospital z, component c) per flat
    // index, c == -1 for gamma_z and c in 0..p-1 for phi_z[c].
    std::vector<std::pair<int, int>> free_layout;
    Eigen::MatrixXd eta_covariance;  // over free parameters

    double loglik = 0.0;
    bool converged = false;
    int iterations = 0;
    bool separation_suspected = false;
    std::vector<std::string> warnings;

    Eigen::VectorXd free_parameters() const;
    void set_free_parameters(const Eigen::VectorXd& eta);
};

// Newton fit over the free parameters (full observed-information
// Hessian, step-halving), with intercept-only fallback for hospitals
// below the volume threshold.
AssignmentFit fit_multinomial(const Dataset& data, int volume_threshold = 0);

// Probability vector over hospitals 1..m, computed with max-subtraction;
// entries are strictly positive and sum to one.
Eigen::VectorXd predict_assignment(const AssignmentFit& fit, const Eigen::VectorXd& x);

}  // namespace qivar
