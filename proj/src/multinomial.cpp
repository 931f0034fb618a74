#include "qivar/multinomial.hpp"

#include <cmath>

#include "qivar/errors.hpp"
#include "qivar/math.hpp"

namespace qivar {

namespace {

constexpr double kRelLogLikTol = 1e-10;
constexpr double kGradSupTol = 1e-8;
constexpr int kMaxIterations = 100;
constexpr double kSeparationNorm = 1e4;

// Row-wise softmax over linear predictors with the reference column
// fixed at 0; lin is n x m with column 0 all zero.
void softmax_rows(const Eigen::MatrixXd& lin, Eigen::MatrixXd& prob) {
    const Eigen::Index n = lin.rows();
    const Eigen::Index m = lin.cols();
    prob.resize(n, m);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double mx = lin.row(i).maxCoeff();
        double denom = 0.0;
        for (Eigen::Index z = 0; z < m; ++z) {
            prob(i, z) = std::exp(lin(i, z) - mx);
            denom += prob(i, z);
        }
        prob.row(i) /= denom;
    }
}

double multinomial_loglik(const Eigen::MatrixXd& lin, const std::vector<int>& hospital) {
    NeumaierSum ll;
    for (Eigen::Index i = 0; i < lin.rows(); ++i) {
        const double mx = lin.row(i).maxCoeff();
        double denom = 0.0;
        for (Eigen::Index z = 0; z < lin.cols(); ++z) {
            denom += std::exp(lin(i, z) - mx);
        }
        const int zi = hospital[static_cast<std::size_t>(i)] - 1;
        ll.add(lin(i, zi) - mx - std::log(denom));
    }
    return ll.value();
}

// Shared scratch for the Newton solver: per-hospital blocks of the free
// parameter vector and the U = [1, X] predictor columns they multiply.
struct FreeBlocks {
    std::vector<int> start;               // flat offset per hospital (index z)
    std::vector<std::vector<int>> comps;  // U column ids per hospital
};

// Observed information over the free parameters. With T[:,k] holding
// p_{iz} * U_{i,c(k)}, the information is blockdiag(U' diag(p_z) U) - T'T.
Eigen::MatrixXd observed_information(const Eigen::MatrixXd& U,
                                     const Eigen::MatrixXd& prob,
                                     const std::vector<std::pair<int, int>>& layout,
                                     const FreeBlocks& blocks, int m) {
    const auto nfree = static_cast<Eigen::Index>(layout.size());
    Eigen::MatrixXd T(U.rows(), nfree);
    for (std::size_t k = 0; k < layout.size(); ++k) {
        const auto [z, c] = layout[k];
        T.col(static_cast<Eigen::Index>(k)) =
            prob.col(z - 1).cwiseProduct(U.col(c + 1));
    }
    Eigen::MatrixXd info = -(T.transpose() * T);
    for (int z = 2; z <= m; ++z) {
        const int zs = blocks.start[static_cast<std::size_t>(z)];
        const auto& zc = blocks.comps[static_cast<std::size_t>(z)];
        for (std::size_t a = 0; a < zc.size(); ++a) {
            for (std::size_t b = 0; b < zc.size(); ++b) {
                info(zs + static_cast<Eigen::Index>(a), zs + static_cast<Eigen::Index>(b)) +=
                    U.col(zc[a]).dot(T.col(zs + static_cast<Eigen::Index>(b)));
            }
        }
    }
    return info;
}

}  // namespace

Eigen::VectorXd AssignmentFit::free_parameters() const {
    Eigen::VectorXd eta(static_cast<Eigen::Index>(free_layout.size()));
    for (std::size_t k = 0; k < free_layout.size(); ++k) {
        const auto [z, c] = free_layout[k];
        eta[static_cast<Eigen::Index>(k)] = c < 0 ? gammas[z - 1] : phis(z - 1, c);
    }
    return eta;
}

void AssignmentFit::set_free_parameters(const Eigen::VectorXd& eta) {
    if (eta.size() != static_cast<Eigen::Index>(free_layout.size())) {
        throw data_error("eta vector does not match the free-parameter layout");
    }
    for (std::size_t k = 0; k < free_layout.size(); ++k) {
        const auto [z, c] = free_layout[k];
        if (c < 0) {
            gammas[z - 1] = eta[static_cast<Eigen::Index>(k)];
        } else {
            phis(z - 1, c) = eta[static_cast<Eigen::Index>(k)];
        }
    }
}

AssignmentFit fit_multinomial(const Dataset& data, int volume_threshold) {
    const int n = data.n();
    const int m = data.m();
    const int p = data.p();
    if (m < 2) throw data_error("assignment model needs at least 2 hospitals");
    if (volume_threshold < 0) throw config_error("volume threshold must be >= 0");

    AssignmentFit fit;
    fit.m = m;
    fit.p = p;
    fit.volume_threshold = volume_threshold;
    fit.gammas = Eigen::VectorXd::Zero(m);
    fit.phis = Eigen::MatrixXd::Zero(m, p);

    std::vector<int> volume(static_cast<std::size_t>(m), 0);
    for (int i = 0; i < n; ++i) {
        ++volume[static_cast<std::size_t>(data.hospital[static_cast<std::size_t>(i)] - 1)];
    }
    fit.intercept_only.resize(static_cast<std::size_t>(m));
    int slope_hospitals = 0;
    for (int z = 0; z < m; ++z) {
        fit.intercept_only[static_cast<std::size_t>(z)] =
            volume[static_cast<std::size_t>(z)] < volume_threshold;
        if (z > 0 && !fit.intercept_only[static_cast<std::size_t>(z)]) ++slope_hospitals;
    }
    if (p > 0 && slope_hospitals < 2) {
        fit.warnings.push_back(
            "fewer than 2 hospitals carry free slope parameters; assignment "
            "probabilities are (nearly) constant in the covariates");
    }

    for (int z = 2; z <= m; ++z) {
        fit.free_layout.emplace_back(z, -1);
        if (!fit.intercept_only[static_cast<std::size_t>(z - 1)]) {
            for (int c = 0; c < p; ++c) fit.free_layout.emplace_back(z, c);
        }
    }
    const auto nfree = static_cast<Eigen::Index>(fit.free_layout.size());

    FreeBlocks blocks;
    blocks.start.assign(static_cast<std::size_t>(m + 1), -1);
    blocks.comps.resize(static_cast<std::size_t>(m + 1));
    for (std::size_t k = 0; k < fit.free_layout.size(); ++k) {
        const auto [z, c] = fit.free_layout[k];
        if (blocks.start[static_cast<std::size_t>(z)] < 0) {
            blocks.start[static_cast<std::size_t>(z)] = static_cast<int>(k);
        }
        blocks.comps[static_cast<std::size_t>(z)].push_back(c + 1);
    }

    // Start at the saturated intercept-only solution (log volume ratios),
    // which is exact when p == 0 and a good basin otherwise.
    Eigen::VectorXd eta = Eigen::VectorXd::Zero(nfree);
    for (std::size_t k = 0; k < fit.free_layout.size(); ++k) {
        const auto [z, c] = fit.free_layout[k];
        if (c < 0) {
            eta[static_cast<Eigen::Index>(k)] =
                std::log(static_cast<double>(volume[static_cast<std::size_t>(z - 1)]) /
                         static_cast<double>(volume[0]));
        }
    }
    fit.set_free_parameters(eta);

    Eigen::MatrixXd U(n, p + 1);
    U.col(0).setOnes();
    if (p > 0) U.rightCols(p) = data.covariates;

    auto linear_predictors = [&](Eigen::MatrixXd& lin) {
        lin.setZero(n, m);
        for (int z = 2; z <= m; ++z) {
            lin.col(z - 1).setConstant(fit.gammas[z - 1]);
            if (!fit.intercept_only[static_cast<std::size_t>(z - 1)] && p > 0) {
                lin.col(z - 1) += data.covariates * fit.phis.row(z - 1).transpose();
            }
        }
    };

    Eigen::MatrixXd lin, prob;
    linear_predictors(lin);
    double ll = multinomial_loglik(lin, data.hospital);
    bool converged = false;
    int iter = 0;

    Eigen::VectorXd grad(nfree), resid(n);

    while (iter < kMaxIterations) {
        ++iter;
        softmax_rows(lin, prob);

        for (int z = 2; z <= m; ++z) {
            const int zs = blocks.start[static_cast<std::size_t>(z)];
            const auto& zc = blocks.comps[static_cast<std::size_t>(z)];
            for (int i = 0; i < n; ++i) {
                resid[i] = (data.hospital[static_cast<std::size_t>(i)] == z ? 1.0 : 0.0) -
                           prob(i, z - 1);
            }
            for (std::size_t a = 0; a < zc.size(); ++a) {
                grad[zs + static_cast<Eigen::Index>(a)] = U.col(zc[a]).dot(resid);
            }
        }
        if (grad.lpNorm<Eigen::Infinity>() < kGradSupTol) {
            converged = true;
            break;
        }

        const Eigen::MatrixXd info =
            observed_information(U, prob, fit.free_layout, blocks, m);
        Eigen::VectorXd step = info.ldlt().solve(grad);
        if (!step.allFinite()) {
            fit.warnings.push_back("Newton step not finite; stopping early");
            break;
        }

        double scale = 1.0;
        double new_ll = ll;
        Eigen::VectorXd candidate = eta;
        bool improved = false;
        for (int h = 0; h < 40; ++h) {
            candidate = eta + scale * step;
            fit.set_free_parameters(candidate);
            linear_predictors(lin);
            new_ll = multinomial_loglik(lin, data.hospital);
            if (new_ll >= ll - 1e-14) {
                improved = true;
                break;
            }
            scale *= 0.5;
        }
        if (!improved) {
            fit.set_free_parameters(eta);
            linear_predictors(lin);
            fit.warnings.push_back("Newton line search stalled; stopping early");
            break;
        }
        eta = candidate;
        const double rel_change = std::abs(new_ll - ll) / (std::abs(ll) + 1.0);
        ll = new_ll;
        if (eta.lpNorm<Eigen::Infinity>() > kSeparationNorm) {
            fit.separation_suspected = true;
            fit.warnings.push_back(
                "assignment parameter norm diverging; possible separation");
            break;
        }
        if (rel_change < kRelLogLikTol) {
            converged = true;
            break;
        }
    }

    softmax_rows(lin, prob);
    const Eigen::MatrixXd info =
        observed_information(U, prob, fit.free_layout, blocks, m);
    fit.eta_covariance = info.ldlt().solve(Eigen::MatrixXd::Identity(nfree, nfree));

    fit.loglik = ll;
    fit.converged = converged;
    fit.iterations = iter;
    if (!converged && !fit.separation_suspected) {
        fit.warnings.push_back("multinomial fit did not converge within max iterations");
    }
    return fit;
}

Eigen::VectorXd predict_assignment(const AssignmentFit& fit, const Eigen::VectorXd& x) {
    if (x.size() != fit.p) throw data_error("covariate vector has wrong length");
    Eigen::VectorXd lin = Eigen::VectorXd::Zero(fit.m);
    for (int z = 2; z <= fit.m; ++z) {
        lin[z - 1] = fit.gammas[z - 1];
        if (!fit.intercept_only[static_cast<std::size_t>(z - 1)] && fit.p > 0) {
            lin[z - 1] += fit.phis.row(z - 1).dot(x);
        }
    }
    const double mx = lin.maxCoeff();
    Eigen::VectorXd prob = (lin.array() - mx).exp();
    prob /= prob.sum();
    return prob;
}

}  // namespace qivar
