#include "qivar/glm.hpp"

#include <cmath>
#include <sstream>

#include "qivar/errors.hpp"
#include "qivar/math.hpp"

namespace qivar {

namespace {

constexpr double kRelLogLikTol = 1e-10;
constexpr double kGradSupTol = 1e-8;
constexpr int kMaxIterations = 100;
constexpr double kSeparationNorm = 1e4;

// [1, hospital indicators for z = 2..m (optional), covariates].
Eigen::MatrixXd design_matrix(const Dataset& data, bool include_hospitals) {
    const int n = data.n();
    const int m = data.m();
    const int p = data.p();
    const int q = 1 + (include_hospitals ? m - 1 : 0) + p;
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, q);
    X.col(0).setOnes();
    if (include_hospitals) {
        for (int i = 0; i < n; ++i) {
            const int z = data.hospital[static_cast<std::size_t>(i)];
            if (z >= 2) X(i, z - 1) = 1.0;
        }
    }
    if (p > 0) X.rightCols(p) = data.covariates;
    return X;
}

std::string column_name(const Dataset& data, bool include_hospitals, Eigen::Index j) {
    if (j == 0) return "(intercept)";
    const int m = data.m();
    if (include_hospitals && j <= m - 1) {
        return "hospital " + data.hospital_labels[static_cast<std::size_t>(j)];
    }
    const auto offset = include_hospitals ? static_cast<Eigen::Index>(m) : 1;
    return data.covariate_names[static_cast<std::size_t>(j - offset)];
}

void check_rank(const Eigen::MatrixXd& X, const Dataset& data, bool include_hospitals) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < X.cols()) {
        const auto perm = qr.colsPermutation().indices();
        const Eigen::Index offending = perm[qr.rank()];
        std::ostringstream msg;
        msg << "design matrix is rank deficient; offending column: "
            << column_name(data, include_hospitals, offending);
        throw numeric_error(msg.str());
    }
}

double binomial_loglik(const Eigen::VectorXd& y, const Eigen::VectorXd& lin) {
    NeumaierSum ll;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        ll.add(y[i] * lin[i] - log1pexp(lin[i]));
    }
    return ll.value();
}

GlmFit fit_identity(const Dataset& data, bool include_hospitals) {
    const Eigen::MatrixXd X = design_matrix(data, include_hospitals);
    check_rank(X, data, include_hospitals);
    const Eigen::Index q = X.cols();
    const auto n = static_cast<double>(data.n());
    if (data.n() <= q) throw numeric_error("identity fit needs n > number of coefficients");

    GlmFit fit;
    fit.link = Link::identity;
    fit.includes_hospitals = include_hospitals;
    fit.m = data.m();
    fit.p = data.p();
    fit.coefficients = X.colPivHouseholderQr().solve(data.outcome);
    const Eigen::VectorXd resid = data.outcome - X * fit.coefficients;
    const double rss = resid.squaredNorm();
    fit.sigma2 = rss / (n - static_cast<double>(q));
    const Eigen::MatrixXd xtx = X.transpose() * X;
    fit.covariance = fit.sigma2 *
        xtx.ldlt().solve(Eigen::MatrixXd::Identity(q, q));
    constexpr double two_pi = 6.283185307179586476925286766559;
    fit.loglik = -0.5 * n * (std::log(two_pi * std::max(fit.sigma2, 1e-300)) + 1.0);
    fit.converged = true;
    fit.iterations = 1;
    return fit;
}

GlmFit fit_logistic(const Dataset& data, bool include_hospitals) {
    if (data.outcome_kind != OutcomeKind::binary) {
        throw data_error("logit link requires a binary outcome");
    }
    const Eigen::MatrixXd X = design_matrix(data, include_hospitals);
    check_rank(X, data, include_hospitals);
    const Eigen::Index q = X.cols();
    const Eigen::VectorXd& y = data.outcome;

    GlmFit fit;
    fit.link = Link::logit;
    fit.includes_hospitals = include_hospitals;
    fit.m = data.m();
    fit.p = data.p();

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(q);
    Eigen::VectorXd lin = Eigen::VectorXd::Zero(data.n());
    double ll = binomial_loglik(y, lin);
    Eigen::VectorXd prob(data.n()), weight(data.n());
    bool converged = false;
    int iter = 0;

    while (iter < kMaxIterations) {
        ++iter;
        for (Eigen::Index i = 0; i < lin.size(); ++i) {
            prob[i] = expit(lin[i]);
            weight[i] = prob[i] * (1.0 - prob[i]);
        }
        const Eigen::VectorXd grad = X.transpose() * (y - prob);
        if (grad.lpNorm<Eigen::Infinity>() < kGradSupTol) {
            converged = true;
            break;
        }
        const Eigen::MatrixXd info = X.transpose() * weight.asDiagonal() * X;
        Eigen::VectorXd step = info.ldlt().solve(grad);
        if (!step.allFinite()) {
            fit.warnings.push_back("IRLS step not finite; stopping early");
            break;
        }
        // Step-halving until the log-likelihood does not decrease.
        double scale = 1.0;
        double new_ll = ll;
        Eigen::VectorXd candidate = beta;
        bool improved = false;
        for (int h = 0; h < 40; ++h) {
            candidate = beta + scale * step;
            new_ll = binomial_loglik(y, X * candidate);
            if (new_ll >= ll - 1e-14) {
                improved = true;
                break;
            }
            scale *= 0.5;
        }
        if (!improved) {
            fit.warnings.push_back("IRLS line search stalled; stopping early");
            break;
        }
        beta = candidate;
        lin = X * beta;
        const double rel_change = std::abs(new_ll - ll) / (std::abs(ll) + 1.0);
        ll = new_ll;
        if (beta.lpNorm<Eigen::Infinity>() > kSeparationNorm) {
            fit.separation_suspected = true;
            fit.warnings.push_back(
                "coefficient norm diverging; possible complete separation");
            break;
        }
        if (rel_change < kRelLogLikTol) {
            converged = true;
            break;
        }
    }

    for (Eigen::Index i = 0; i < lin.size(); ++i) {
        prob[i] = expit(lin[i]);
        weight[i] = prob[i] * (1.0 - prob[i]);
    }
    const Eigen::MatrixXd info = X.transpose() * weight.asDiagonal() * X;
    fit.covariance = info.ldlt().solve(Eigen::MatrixXd::Identity(q, q));
    fit.coefficients = beta;
    fit.loglik = ll;
    fit.converged = converged;
    fit.iterations = iter;
    if (!converged && !fit.separation_suspected) {
        fit.warnings.push_back("IRLS did not converge within max iterations");
    }
    return fit;
}

}  // namespace

double GlmFit::alpha(int hospital) const {
    if (hospital < 1 || hospital > m) throw data_error("unknown hospital label");
    if (!includes_hospitals || hospital == 1) return 0.0;
    return coefficients[hospital - 1];
}

Eigen::VectorXd GlmFit::beta() const {
    return coefficients.tail(p);
}

double GlmFit::linear_predictor(int hospital, const Eigen::VectorXd& x) const {
    if (x.size() != p) throw data_error("covariate vector has wrong length");
    double lin = alpha0() + alpha(hospital);
    if (p > 0) lin += beta().dot(x);
    return lin;
}

GlmFit fit_glm(const Dataset& data, Link link, bool include_hospitals) {
    return link == Link::identity ? fit_identity(data, include_hospitals)
                                  : fit_logistic(data, include_hospitals);
}

double predict_mu(const GlmFit& fit, int hospital, const Eigen::VectorXd& x) {
    return link_inverse(fit.link, fit.linear_predictor(hospital, x));
}

}  // namespace qivar
