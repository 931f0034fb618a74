#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qivar {

enum class Link { identity, logit };
enum class EffectMode { fixed, random };
enum class OutcomeKind { continuous, binary };

const char* to_string(Link link);
const char* to_string(EffectMode mode);
const char* to_string(OutcomeKind kind);

// Link function forward/inverse maps. identity: g(mu)=mu on all reals;
// logit: g(mu)=log(mu/(1-mu)) on (0,1).
double link_forward(Link link, double mu);
double link_inverse(Link link, double eta);

// Patient-level data after validation: hospital labels compacted to
// 1..m, every hospital non-empty, outcome/hospital/covariates aligned.
// Immutable after construction; safe to share across threads for reads.
struct Dataset {
    Eigen::VectorXd outcome;                    // length n
    std::vector<int> hospital;                  // length n, values in 1..m
    Eigen::MatrixXd covariates;                 // n x p
    int hospital_count = 0;                     // m
    std::vector<std::string> covariate_names;   // p labels
    std::vector<std::string> hospital_labels;   // original label per compact id
    OutcomeKind outcome_kind = OutcomeKind::continuous;

    int n() const { return static_cast<int>(outcome.size()); }
    int p() const { return static_cast<int>(covariates.cols()); }
    int m() const { return hospital_count; }
};

// Validates raw columns and compacts hospital labels to 1..m. Labels may
// be arbitrary strings; compaction sorts the distinct labels (numerically
// when all of them parse as numbers, lexicographically otherwise) so the
// mapping is canonical for a given label set. Outcome kind is inferred
// from the values unless declared; declaring binary with values outside
// {0,1} is an error.
Dataset validate(const Eigen::VectorXd& outcome,
                 const std::vector<std::string>& hospital_labels,
                 const Eigen::MatrixXd& covariates,
                 std::vector<std::string> covariate_names,
                 std::optional<OutcomeKind> declared_kind = std::nullopt);

// Convenience overload for already-integer labels (e.g. simulated data).
Dataset validate(const Eigen::VectorXd& outcome,
                 const std::vector<int>& hospital_labels,
                 const Eigen::MatrixXd& covariates,
                 std::vector<std::string> covariate_names = {},
                 std::optional<OutcomeKind> declared_kind = std::nullopt);

// Row indices grouped by compact hospital id (index 0 -> hospital 1).
std::vector<std::vector<int>> rows_by_hospital(const Dataset& data);

// Sample variance of the outcome under both divisor conventions. The
// n-divisor version reproduces phat*(1-phat) for a binary outcome and is
// the default total in binary mode; continuous mode defaults to n-1.
struct TotalVariance {
    double n_divisor = 0.0;
    double nminus1_divisor = 0.0;
    bool default_is_n_divisor = false;
    double value() const { return default_is_n_divisor ? n_divisor : nminus1_divisor; }
};

TotalVariance empirical_total_variance(const Dataset& data);

}  // namespace qivar
