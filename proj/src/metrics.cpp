#include "bsr/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>
#include <unordered_map>

#include "bsr/util.hpp"

namespace bsr {

namespace {

// Sample groups in first-seen order. Records without a sample_id (stripped
// corpora) are treated as singleton samples keyed by instance_id.
struct SampleGroups {
    std::vector<std::vector<const EvalRecord*>> groups;

    explicit SampleGroups(const std::vector<EvalRecord>& records) {
        std::unordered_map<std::string, std::size_t> index;
        index.reserve(records.size());
        for (const auto& record : records) {
            const std::string& key =
                record.sample_id.empty() ? record.instance_id : record.sample_id;
            auto [it, inserted] = index.emplace(key, groups.size());
            if (inserted) groups.emplace_back();
            groups[it->second].push_back(&record);
        }
    }
};

struct ConfusionCounts {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    std::size_t excluded = 0;
};

ConfusionCounts count_confusion(const std::vector<EvalRecord>& records) {
    ConfusionCounts c;
    for (const auto& record : records) {
        if (record.verdict.value == VerdictValue::UNPARSEABLE) {
            ++c.excluded;
            continue;
        }
        const bool predicted_yes = record.verdict.value == VerdictValue::YES;
        const bool actual_yes = record.label == Label::YES;
        if (predicted_yes && actual_yes) ++c.tp;
        else if (predicted_yes && !actual_yes) ++c.fp;
        else if (!predicted_yes && actual_yes) ++c.fn;
        else ++c.tn;
    }
    return c;
}

struct RfsCounts {
    std::size_t scoreable = 0;
    std::size_t unanimous = 0;
    std::size_t excluded = 0;
};

RfsCounts count_rfs(const SampleGroups& groups) {
    RfsCounts c;
    for (const auto& group : groups.groups) {
        bool parseable = true;
        for (const auto* record : group) {
            if (record->verdict.value == VerdictValue::UNPARSEABLE) {
                parseable = false;
                break;
            }
        }
        if (!parseable) {
            ++c.excluded;
            continue;
        }
        ++c.scoreable;
        bool unanimous = true;
        for (const auto* record : group) {
            if (record->verdict.value != group.front()->verdict.value) {
                unanimous = false;
                break;
            }
        }
        if (unanimous) ++c.unanimous;
    }
    return c;
}

std::optional<MetricsReport> try_compute_report(const std::vector<EvalRecord>& records,
                                                double beta) {
    SampleGroups groups(records);
    RfsCounts rc = count_rfs(groups);
    ConfusionCounts cc = count_confusion(records);

    const std::size_t f1_denominator = 2 * cc.tp + cc.fp + cc.fn;
    const std::size_t scoreable_records = records.size() - cc.excluded;
    if (rc.scoreable == 0 || scoreable_records == 0) return std::nullopt;

    MetricsReport report;
    report.n_samples = rc.scoreable;
    report.n_instances = records.size();
    report.n_excluded_instances = cc.excluded;
    report.n_excluded_samples = rc.excluded;
    report.beta = beta;
    report.rfs = static_cast<double>(rc.unanimous) / static_cast<double>(rc.scoreable);
    report.f1 = f1_denominator == 0
                    ? 0.0
                    : 2.0 * static_cast<double>(cc.tp) / static_cast<double>(f1_denominator);
    report.lss = lss_beta(report.rfs, report.f1, beta);
    return report;
}

}  // namespace

int decision_b(const std::vector<VerdictValue>& sample_verdicts) {
    if (sample_verdicts.empty()) {
        throw eval_error("decision_b: empty verdict tuple");
    }
    for (const auto& v : sample_verdicts) {
        if (v != sample_verdicts.front()) return 0;
    }
    return 1;
}

double rfs(const std::vector<EvalRecord>& records) {
    SampleGroups groups(records);
    RfsCounts c = count_rfs(groups);
    if (c.scoreable == 0) {
        throw eval_error("rfs: no scoreable samples (" + std::to_string(groups.groups.size()) +
                         " samples, " + std::to_string(c.excluded) +
                         " excluded for unparseable verdicts)");
    }
    return static_cast<double>(c.unanimous) / static_cast<double>(c.scoreable);
}

double f1(const std::vector<EvalRecord>& records) {
    ConfusionCounts c = count_confusion(records);
    if (records.size() == c.excluded) {
        throw eval_error("f1: no scoreable records (" + std::to_string(records.size()) +
                         " records, all excluded)");
    }
    const std::size_t denominator = 2 * c.tp + c.fp + c.fn;
    if (denominator == 0) return 0.0;
    return 2.0 * static_cast<double>(c.tp) / static_cast<double>(denominator);
}

double lss_beta(double rfs_value, double f1_value, double beta) {
    if (!(beta > 0.0)) {
        throw eval_error("lss_beta: beta must be > 0, got " + std::to_string(beta));
    }
    if (rfs_value < 0.0 || rfs_value > 1.0 || f1_value < 0.0 || f1_value > 1.0) {
        throw eval_error("lss_beta: rfs and f1 must lie in [0,1]");
    }
    if (rfs_value == 0.0 && f1_value == 0.0) return 0.0;
    const double b2 = beta * beta;
    return (1.0 + b2) * rfs_value * f1_value / (rfs_value + b2 * f1_value);
}

MetricsReport compute_report(const std::vector<EvalRecord>& records, double beta) {
    auto report = try_compute_report(records, beta);
    if (!report) {
        throw eval_error("compute_report: no scoreable samples among " +
                         std::to_string(records.size()) + " records");
    }
    return *report;
}

namespace {

const std::string& extract_key(const EvalRecord& record, const std::string& key) {
    if (key == "law_id") return record.law_id;
    if (key == "identity_type") return record.identity_type;
    if (key == "checkpoint") return record.checkpoint;
    throw config_error("unknown group key '" + key +
                       "' (expected law_id, identity_type or checkpoint)");
}

void group_recursive(MetricsReport& parent, const std::vector<EvalRecord>& records,
                     const std::vector<std::string>& group_keys, std::size_t depth, double beta) {
    if (depth >= group_keys.size()) return;
    const std::string& key = group_keys[depth];

    std::map<std::string, std::vector<EvalRecord>> partitions;
    for (const auto& record : records) {
        partitions[extract_key(record, key)].push_back(record);
    }
    for (auto& [value, subset] : partitions) {
        auto cell = try_compute_report(subset, beta);
        if (!cell) continue;  // nothing scoreable: absent, not zero
        cell->group_keys.assign(group_keys.begin() + static_cast<std::ptrdiff_t>(depth) + 1,
                                group_keys.end());
        group_recursive(*cell, subset, group_keys, depth + 1, beta);
        parent.groups.emplace(value, std::move(*cell));
    }
}

}  // namespace

MetricsReport grouped_report(const std::vector<EvalRecord>& records,
                             const std::vector<std::string>& group_keys, double beta) {
    for (const auto& key : group_keys) {
        extract_key(EvalRecord{}, key);  // validate before any work
    }
    MetricsReport report = compute_report(records, beta);
    report.group_keys = group_keys;
    group_recursive(report, records, group_keys, 0, beta);
    return report;
}

std::vector<std::pair<double, double>> beta_sweep(double rfs_value, double f1_value,
                                                  const std::vector<double>& beta_grid) {
    std::vector<std::pair<double, double>> points;
    points.reserve(beta_grid.size());
    for (double beta : beta_grid) {
        points.emplace_back(beta, lss_beta(rfs_value, f1_value, beta));
    }
    return points;
}

std::vector<TrendRow> trend_series(
    const std::vector<std::pair<std::string, std::vector<EvalRecord>>>& checkpoints, double beta,
    std::vector<std::string>* warnings) {
    std::vector<TrendRow> rows;
    rows.reserve(checkpoints.size());

    std::set<std::string> reference_ids;
    std::string reference_name;
    bool have_reference = false;

    for (const auto& [checkpoint, records] : checkpoints) {
        std::set<std::string> ids;
        for (const auto& record : records) ids.insert(record.instance_id);
        if (!have_reference) {
            reference_ids = ids;
            reference_name = checkpoint;
            have_reference = true;
        } else if (warnings != nullptr && ids != reference_ids) {
            std::vector<std::string> missing, extra;
            std::set_difference(reference_ids.begin(), reference_ids.end(), ids.begin(), ids.end(),
                                std::back_inserter(missing));
            std::set_difference(ids.begin(), ids.end(), reference_ids.begin(), reference_ids.end(),
                                std::back_inserter(extra));
            std::ostringstream msg;
            msg << "checkpoint '" << checkpoint << "' instance set differs from '"
                << reference_name << "': " << missing.size() << " missing, " << extra.size()
                << " extra";
            for (std::size_t i = 0; i < missing.size() && i < 3; ++i) {
                msg << (i == 0 ? "; missing e.g. " : ", ") << missing[i];
            }
            for (std::size_t i = 0; i < extra.size() && i < 3; ++i) {
                msg << (i == 0 ? "; extra e.g. " : ", ") << extra[i];
            }
            warnings->push_back(msg.str());
        }

        MetricsReport report = compute_report(records, beta);
        rows.push_back({checkpoint, report.rfs, report.f1, report.lss, report.n_samples,
                        report.n_excluded_instances});
    }
    return rows;
}

std::string format_metric(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", value);
    return std::string(buf);
}

nlohmann::json report_to_json(const MetricsReport& report) {
    nlohmann::json j = {
        {"n_samples", report.n_samples},
        {"n_instances", report.n_instances},
        {"n_excluded_instances", report.n_excluded_instances},
        {"n_excluded_samples", report.n_excluded_samples},
        {"rfs", report.rfs},
        {"f1", report.f1},
        {"lss", report.lss},
        {"beta", report.beta},
        {"f1_basis", "pooled_instances"},
    };
    if (!report.group_keys.empty()) j["group_keys"] = report.group_keys;
    if (!report.groups.empty()) {
        nlohmann::json groups = nlohmann::json::object();
        for (const auto& [value, sub] : report.groups) {
            groups[value] = report_to_json(sub);
        }
        j["groups"] = groups;
    }
    return j;
}

namespace {

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

void csv_metric_columns(std::ostringstream& out, const MetricsReport& report) {
    out << report.n_samples << ',' << report.n_instances << ',' << report.n_excluded_instances
        << ',' << report.n_excluded_samples << ',' << format_metric(report.rfs) << ','
        << format_metric(report.f1) << ',' << format_metric(report.lss) << ','
        << format_metric(report.beta) << '\n';
}

void csv_rows(std::ostringstream& out, const MetricsReport& node,
              std::vector<std::string>& prefix, std::size_t n_keys) {
    if (node.groups.empty()) {
        for (std::size_t i = 0; i < n_keys; ++i) {
            out << (i < prefix.size() ? csv_escape(prefix[i]) : "") << ',';
        }
        csv_metric_columns(out, node);
        return;
    }
    for (const auto& [value, sub] : node.groups) {
        prefix.push_back(value);
        csv_rows(out, sub, prefix, n_keys);
        prefix.pop_back();
    }
}

}  // namespace

std::string report_to_csv(const MetricsReport& report) {
    std::ostringstream out;
    for (const auto& key : report.group_keys) out << csv_escape(key) << ',';
    out << "n_samples,n_instances,n_excluded_instances,n_excluded_samples,rfs,f1,lss,beta\n";

    // Overall row first, then one row per leaf cell.
    for (std::size_t i = 0; i < report.group_keys.size(); ++i) out << ',';
    csv_metric_columns(out, report);

    std::vector<std::string> prefix;
    if (!report.groups.empty()) {
        for (const auto& [value, sub] : report.groups) {
            prefix.push_back(value);
            csv_rows(out, sub, prefix, report.group_keys.size());
            prefix.pop_back();
        }
    }
    return out.str();
}

std::string trend_to_csv(const std::vector<TrendRow>& rows) {
    std::ostringstream out;
    out << "checkpoint,rfs,f1,lss,n_samples,n_excluded\n";
    for (const auto& row : rows) {
        out << csv_escape(row.checkpoint) << ',' << format_metric(row.rfs) << ','
            << format_metric(row.f1) << ',' << format_metric(row.lss) << ',' << row.n_samples
            << ',' << row.n_excluded << '\n';
    }
    return out.str();
}

}  // namespace bsr
