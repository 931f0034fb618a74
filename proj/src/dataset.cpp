#include "qivar/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <sstream>

#include "qivar/errors.hpp"
#include "qivar/math.hpp"

namespace qivar {

const char* to_string(Link link) {
    return link == Link::identity ? "identity" : "logit";
}

const char* to_string(EffectMode mode) {
    return mode == EffectMode::fixed ? "fixed" : "random";
}

const char* to_string(OutcomeKind kind) {
    return kind == OutcomeKind::continuous ? "continuous" : "binary";
}

double link_forward(Link link, double mu) {
    return link == Link::identity ? mu : logit(mu);
}

double link_inverse(Link link, double eta) {
    return link == Link::identity ? eta : expit(eta);
}

namespace {

bool parse_number(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size();
}

// Distinct labels sorted numerically when every label parses as a
// number, lexicographically otherwise; compact ids are 1..m in that
// order, so hospital 1 (the reference) is the smallest label.
std::vector<std::string> sorted_unique_labels(const std::vector<std::string>& labels) {
    std::vector<std::string> uniq(labels);
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());

    bool all_numeric = true;
    std::vector<std::pair<double, std::string>> numeric;
    numeric.reserve(uniq.size());
    for (const auto& s : uniq) {
        double v = 0.0;
        if (!parse_number(s, v)) {
            all_numeric = false;
            break;
        }
        numeric.emplace_back(v, s);
    }
    if (all_numeric) {
        std::sort(numeric.begin(), numeric.end());
        for (std::size_t i = 0; i < numeric.size(); ++i) uniq[i] = numeric[i].second;
    }
    return uniq;
}

}  // namespace

Dataset validate(const Eigen::VectorXd& outcome,
                 const std::vector<std::string>& hospital_labels,
                 const Eigen::MatrixXd& covariates,
                 std::vector<std::string> covariate_names,
                 std::optional<OutcomeKind> declared_kind) {
    const auto n = outcome.size();
    if (static_cast<Eigen::Index>(hospital_labels.size()) != n ||
        (covariates.size() > 0 && covariates.rows() != n)) {
        std::ostringstream msg;
        msg << "column lengths disagree: outcome " << n << ", hospital "
            << hospital_labels.size() << ", covariate rows " << covariates.rows();
        throw data_error(msg.str());
    }
    if (n < 2) throw data_error("need at least 2 rows");
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!std::isfinite(outcome[i])) throw data_error("non-finite outcome value");
    }
    for (Eigen::Index i = 0; i < covariates.size(); ++i) {
        if (!std::isfinite(covariates(i))) throw data_error("non-finite covariate value");
    }

    bool all_binary = true;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (outcome[i] != 0.0 && outcome[i] != 1.0) {
            all_binary = false;
            break;
        }
    }
    OutcomeKind kind = declared_kind.value_or(all_binary ? OutcomeKind::binary
                                                         : OutcomeKind::continuous);
    if (kind == OutcomeKind::binary && !all_binary) {
        throw data_error("outcome not in {0,1} but binary mode requested");
    }

    Dataset data;
    data.hospital_labels = sorted_unique_labels(hospital_labels);
    data.hospital_count = static_cast<int>(data.hospital_labels.size());
    std::map<std::string, int> compact;
    for (int z = 0; z < data.hospital_count; ++z) compact[data.hospital_labels[z]] = z + 1;
    data.hospital.reserve(static_cast<std::size_t>(n));
    for (const auto& label : hospital_labels) data.hospital.push_back(compact[label]);

    data.outcome = outcome;
    data.covariates = covariates.size() > 0 ? covariates : Eigen::MatrixXd(n, 0);
    if (covariate_names.empty()) {
        for (Eigen::Index j = 0; j < data.covariates.cols(); ++j) {
            covariate_names.push_back("x" + std::to_string(j + 1));
        }
    }
    if (static_cast<Eigen::Index>(covariate_names.size()) != data.covariates.cols()) {
        throw data_error("covariate name count does not match covariate columns");
    }
    data.covariate_names = std::move(covariate_names);
    data.outcome_kind = kind;
    return data;
}

Dataset validate(const Eigen::VectorXd& outcome,
                 const std::vector<int>& hospital_labels,
                 const Eigen::MatrixXd& covariates,
                 std::vector<std::string> covariate_names,
                 std::optional<OutcomeKind> declared_kind) {
    std::vector<std::string> as_strings;
    as_strings.reserve(hospital_labels.size());
    for (int label : hospital_labels) as_strings.push_back(std::to_string(label));
    return validate(outcome, as_strings, covariates, std::move(covariate_names),
                    declared_kind);
}

std::vector<std::vector<int>> rows_by_hospital(const Dataset& data) {
    std::vector<std::vector<int>> rows(static_cast<std::size_t>(data.m()));
    for (int i = 0; i < data.n(); ++i) {
        rows[static_cast<std::size_t>(data.hospital[static_cast<std::size_t>(i)] - 1)]
            .push_back(i);
    }
    return rows;
}

TotalVariance empirical_total_variance(const Dataset& data) {
    TotalVariance out;
    out.n_divisor = sample_variance(data.outcome, false);
    out.nminus1_divisor = sample_variance(data.outcome, true);
    out.default_is_n_divisor = data.outcome_kind == OutcomeKind::binary;
    return out;
}

}  // namespace qivar
