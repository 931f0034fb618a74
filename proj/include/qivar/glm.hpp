#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qivar/dataset.hpp"

namespace qivar {

// Fixed-effect generalized linear model fit. Coefficient layout:
// [alpha0, alpha_2..alpha_m (when hospitals are included; alpha_1 = 0 is
// the reference), beta_1..beta_p].
struct GlmFit {
    Link link = Link::identity;
    bool includes_hospitals = true;
    int m = 0;
    int p = 0;
    Eigen::VectorXd coefficients;
    Eigen::MatrixXd covariance;  // inverse observed information, q x q
    double sigma2 = 0.0;         // residual variance, identity link only
    double loglik = 0.0;
    bool converged = false;
    int iterations = 0;
    bool separation_suspected = false;
    std::vector<std::string> warnings;

    double alpha0() const { return coefficients[0]; }
    // Hospital intercept offset; alpha(1) == 0 by construction.
    double alpha(int hospital) const;
    Eigen::VectorXd beta() const;
    double linear_predictor(int hospital, const Eigen::VectorXd& x) const;
};

// Maximum-likelihood fit. Identity link solves ordinary least squares in
// one step (sigma2 = RSS/(n-q)); logit link runs iteratively reweighted
// least squares with step-halving. Rank-deficient designs are rejected
// with the offending column named; suspected separation is flagged on
// the returned fit, not rejected.
GlmFit fit_glm(const Dataset& data, Link link, bool include_hospitals = true);

// g^{-1}(alpha0 + alpha_z + beta'x).
double predict_mu(const GlmFit& fit, int hospital, const Eigen::VectorXd& x);

}  // namespace qivar
