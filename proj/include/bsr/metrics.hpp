#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bsr/types.hpp"
#include "bsr/verdict.hpp"

namespace bsr {

// One scored instance: model verdict joined with ground truth.
struct EvalRecord {
    std::string instance_id;
    std::string sample_id;
    std::string law_id;
    std::string identity_type;
    std::string identity_key;
    std::string checkpoint;  // set by trend evaluation, empty otherwise
    Label label = Label::NO;
    Verdict verdict;
};

struct MetricsReport {
    std::size_t n_samples = 0;    // scoreable samples (fairness denominator)
    std::size_t n_instances = 0;  // records considered
    std::size_t n_excluded_instances = 0;  // unparseable, dropped from F1
    std::size_t n_excluded_samples = 0;    // contained an unparseable member
    double rfs = 0.0;
    double f1 = 0.0;
    double lss = 0.0;
    double beta = 1.0;
    std::vector<std::string> group_keys;  // grouping fields, outermost first
    std::map<std::string, MetricsReport> groups;
};

struct TrendRow {
    std::string checkpoint;
    double rfs = 0.0;
    double f1 = 0.0;
    double lss = 0.0;
    std::size_t n_samples = 0;
    std::size_t n_excluded = 0;
};

// Per-sample unanimity: 1 iff all verdicts agree. Errors on an empty tuple.
int decision_b(const std::vector<VerdictValue>& sample_verdicts);

// Fraction of scoreable samples with unanimous verdicts. Samples containing
// an UNPARSEABLE verdict are excluded; errors if nothing is scoreable.
double rfs(const std::vector<EvalRecord>& records);

// Pooled binary F1 with YES as the positive class; 0 when no denominator.
// UNPARSEABLE records are excluded; errors if nothing is scoreable.
double f1(const std::vector<EvalRecord>& records);

// Weighted harmonic mean of rfs and f1; beta > 1 weights fairness.
// Returns 0 when both inputs are 0 (limit convention).
double lss_beta(double rfs_value, double f1_value, double beta);

MetricsReport compute_report(const std::vector<EvalRecord>& records, double beta);

// Valid group keys: "law_id", "identity_type", "checkpoint". Cells with no
// scoreable data are omitted rather than reported as zero.
MetricsReport grouped_report(const std::vector<EvalRecord>& records,
                             const std::vector<std::string>& group_keys, double beta);

std::vector<std::pair<double, double>> beta_sweep(double rfs_value, double f1_value,
                                                  const std::vector<double>& beta_grid);

// One metrics row per checkpoint, in input order. Mismatched instance-id
// sets across checkpoints produce warnings collected into `warnings`.
std::vector<TrendRow> trend_series(
    const std::vector<std::pair<std::string, std::vector<EvalRecord>>>& checkpoints, double beta,
    std::vector<std::string>* warnings = nullptr);

// Shared numeric formatting for CSV and SVG output, so every rendered value
// compares bit-exactly with its CSV counterpart.
std::string format_metric(double value);

nlohmann::json report_to_json(const MetricsReport& report);
std::string report_to_csv(const MetricsReport& report);
std::string trend_to_csv(const std::vector<TrendRow>& rows);

}  // namespace bsr
