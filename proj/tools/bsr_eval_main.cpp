#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <CLI11.hpp>

#include "bsr/corpus.hpp"
#include "bsr/manifest.hpp"
#include "bsr/metrics.hpp"
#include "bsr/modelio.hpp"
#include "bsr/svg.hpp"
#include "bsr/types.hpp"
#include "bsr/util.hpp"
#include "bsr/verdict.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitPartialInfer = 2;
constexpr int kExitScoring = 3;

struct GlobalOpts {
    std::optional<std::uint64_t> seed;
    double beta = 1.0;
    bool force = false;
    std::string out_dir;
};

std::string fmt_g(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

void prepare_out_dir(const GlobalOpts& g) {
    if (g.out_dir.empty()) throw bsr::config_error("--out-dir is required");
    if (fs::exists(g.out_dir) && !g.force) {
        throw bsr::config_error("output directory '" + g.out_dir +
                                "' already exists; pass --force to write into it");
    }
    fs::create_directories(g.out_dir);
}

std::string out_path(const GlobalOpts& g, const std::string& name) {
    return (fs::path(g.out_dir) / name).string();
}

bsr::Lexicon load_lexicon_opt(const std::string& path) {
    return path.empty() ? bsr::Lexicon::builtin_default() : bsr::Lexicon::load(path);
}

// Joins responses onto dataset instances and maps each raw text to a verdict.
// Responses for unknown instances are reported and skipped; instances without
// a response are a hard error (the dataset was not fully inferred).
std::vector<bsr::EvalRecord> join_records(const std::vector<bsr::PromptInstance>& instances,
                                          const std::vector<bsr::RawResponse>& responses,
                                          const bsr::Lexicon& lexicon) {
    std::unordered_map<std::string, const bsr::RawResponse*> by_id;
    by_id.reserve(responses.size());
    std::unordered_map<std::string, const bsr::PromptInstance*> known;
    known.reserve(instances.size());
    for (const auto& instance : instances) known[instance.instance_id] = &instance;

    std::vector<std::string> orphans;
    for (const auto& response : responses) {
        if (!known.count(response.instance_id)) {
            orphans.push_back(response.instance_id);
            continue;
        }
        by_id[response.instance_id] = &response;
    }
    if (!orphans.empty()) {
        std::cerr << "warning: " << orphans.size()
                  << " response(s) match no dataset instance, e.g.:";
        for (std::size_t i = 0; i < orphans.size() && i < 5; ++i) std::cerr << " " << orphans[i];
        std::cerr << "\n";
    }

    std::vector<std::string> uncovered;
    std::vector<bsr::EvalRecord> records;
    records.reserve(instances.size());
    for (const auto& instance : instances) {
        auto it = by_id.find(instance.instance_id);
        if (it == by_id.end()) {
            uncovered.push_back(instance.instance_id);
            continue;
        }
        const bsr::RawResponse& response = *it->second;
        bsr::EvalRecord record;
        record.instance_id = instance.instance_id;
        record.sample_id = instance.sample_id;
        record.law_id = instance.law_id;
        record.identity_type = instance.identity_type;
        record.identity_key = instance.identity_key;
        record.label = instance.label;
        // Failed responses carry no text and come out UNPARSEABLE, which the
        // exclusion accounting then reports.
        record.verdict = bsr::map_response(response.ok ? response.raw_text : "", lexicon);
        records.push_back(std::move(record));
    }
    if (!uncovered.empty()) {
        std::string msg = "responses do not cover the dataset: " +
                          std::to_string(uncovered.size()) + " instance(s) missing, e.g.";
        for (std::size_t i = 0; i < uncovered.size() && i < 5; ++i) msg += " " + uncovered[i];
        throw bsr::eval_error(msg);
    }
    return records;
}

void print_report_line(const bsr::MetricsReport& report) {
    std::cout << "rfs=" << bsr::format_metric(report.rfs) << " f1=" << bsr::format_metric(report.f1)
              << " lss=" << bsr::format_metric(report.lss) << " (beta=" << fmt_g(report.beta)
              << ", samples=" << report.n_samples << ", instances=" << report.n_instances;
    if (report.n_excluded_instances > 0 || report.n_excluded_samples > 0) {
        std::cout << ", excluded_instances=" << report.n_excluded_instances
                  << ", excluded_samples=" << report.n_excluded_samples;
    }
    std::cout << ")\n";
}

int cmd_generate(const GlobalOpts& g, const std::string& config_path) {
    std::string config_bytes = bsr::read_text_file(config_path);
    bsr::CorpusConfig config;
    try {
        config = bsr::corpus_config_from_json(nlohmann::json::parse(config_bytes));
    } catch (const nlohmann::json::parse_error& e) {
        throw bsr::config_error("config '" + config_path + "': " + e.what());
    }
    if (g.seed) config.seed = *g.seed;
    prepare_out_dir(g);

    bsr::Dataset with_id = bsr::generate_with_id(config);
    bsr::SplitResult with_split = bsr::split_dataset(with_id, config.split, config.seed);
    bsr::Dataset without_id = bsr::generate_without_id(config);
    bsr::SplitResult without_split = bsr::split_dataset(without_id, config.split, config.seed);
    bsr::Dataset test = bsr::generate_with_id(config, config.effective_test_seed());

    bsr::write_instances_jsonl(out_path(g, "bsr_with_id.train.jsonl"), with_split.train.instances);
    bsr::write_samples_jsonl(out_path(g, "bsr_with_id.train.samples.jsonl"),
                             with_split.train.samples);
    bsr::write_instances_jsonl(out_path(g, "bsr_with_id.validation.jsonl"),
                               with_split.validation.instances);
    bsr::write_samples_jsonl(out_path(g, "bsr_with_id.validation.samples.jsonl"),
                             with_split.validation.samples);
    bsr::write_instances_jsonl(out_path(g, "bsr_without_id.train.jsonl"),
                               without_split.train.instances);
    bsr::write_instances_jsonl(out_path(g, "bsr_without_id.validation.jsonl"),
                               without_split.validation.instances);
    bsr::write_instances_jsonl(out_path(g, "bsr_test_with_id.jsonl"), test.instances);
    bsr::write_samples_jsonl(out_path(g, "bsr_test_with_id.samples.jsonl"), test.samples);

    // Per-type arithmetic: instances = pairs x K for every identity type.
    nlohmann::json k_by_type = nlohmann::json::object();
    nlohmann::json instances_by_type = nlohmann::json::object();
    std::size_t sum_k = 0;
    for (const auto& roster : config.rosters) {
        k_by_type[bsr::to_string(roster.identity_type)] = roster.identities.size();
        sum_k += roster.identities.size();
    }
    std::unordered_map<std::string, std::size_t> type_counts;
    for (const auto& instance : with_id.instances) ++type_counts[instance.identity_type];
    for (const auto& [type, count] : type_counts) instances_by_type[type] = count;

    std::size_t yes_pairs = 0;
    for (const auto& instance : without_id.instances) {
        if (instance.label == bsr::Label::YES) ++yes_pairs;
    }
    const std::size_t pairs = without_id.instances.size();

    bsr::RunManifest manifest = bsr::make_manifest("generate", config.seed, config_bytes);
    manifest.outputs = {
        {"with_id_train", "bsr_with_id.train.jsonl"},
        {"with_id_train_samples", "bsr_with_id.train.samples.jsonl"},
        {"with_id_validation", "bsr_with_id.validation.jsonl"},
        {"with_id_validation_samples", "bsr_with_id.validation.samples.jsonl"},
        {"without_id_train", "bsr_without_id.train.jsonl"},
        {"without_id_validation", "bsr_without_id.validation.jsonl"},
        {"test_with_id", "bsr_test_with_id.jsonl"},
        {"test_with_id_samples", "bsr_test_with_id.samples.jsonl"},
    };
    manifest.details = {
        {"n_laws", config.laws.size()},
        {"n_situations", config.situations.size()},
        {"pairs", pairs},
        {"k_by_type", k_by_type},
        {"sum_k", sum_k},
        {"instances_by_type", instances_by_type},
        {"with_id_instances", with_id.instances.size()},
        {"with_id_samples", with_id.samples.size()},
        {"without_id_instances", without_id.instances.size()},
        {"with_to_without_ratio",
         pairs == 0 ? 0.0 : static_cast<double>(with_id.instances.size()) / pairs},
        {"yes_pairs", yes_pairs},
        {"yes_fraction", pairs == 0 ? 0.0 : static_cast<double>(yes_pairs) / pairs},
        {"test_seed", config.effective_test_seed()},
        {"with_id_train_samples", with_split.train.samples.size()},
        {"with_id_validation_samples", with_split.validation.samples.size()},
        {"without_id_train_instances", without_split.train.instances.size()},
        {"without_id_validation_instances", without_split.validation.instances.size()},
    };
    bsr::write_manifest(manifest, out_path(g, "manifest.json"));

    std::cout << "generated " << with_id.instances.size() << " with-ID instances ("
              << with_id.samples.size() << " samples), " << without_id.instances.size()
              << " without-ID instances, " << test.instances.size() << " test instances into "
              << g.out_dir << "\n";
    return kExitOk;
}

int cmd_infer(const GlobalOpts& g, const std::string& dataset_path,
              const std::string& model_path, const std::string& cache_path) {
    auto instances = bsr::read_instances_jsonl(dataset_path);
    if (instances.empty()) throw bsr::config_error("dataset is empty: " + dataset_path);
    bsr::ModelSource source = bsr::load_model_source(model_path);
    prepare_out_dir(g);

    std::optional<bsr::ResponseCache> cache;
    if (!cache_path.empty()) cache.emplace(cache_path);

    bsr::InferStats stats;
    auto responses = bsr::infer_batch(instances, source, cache ? &*cache : nullptr, &stats);
    bsr::write_responses_jsonl(out_path(g, "responses.jsonl"), responses);

    nlohmann::json failures = nlohmann::json::array();
    for (const auto& response : responses) {
        if (response.ok) continue;
        if (failures.size() < 50) {
            failures.push_back({{"instance_id", response.instance_id}, {"error", response.error}});
        }
    }
    bsr::write_text_file(
        out_path(g, "failures.json"),
        nlohmann::json{{"n_failed", stats.n_failed}, {"failures", failures}}.dump(2) + "\n");

    bsr::RunManifest manifest = bsr::make_manifest("infer", g.seed.value_or(0), "");
    manifest.model_id = source.model_id;
    manifest.outputs = {{"responses", "responses.jsonl"}, {"failures", "failures.json"}};
    manifest.details = {{"dataset", dataset_path},
                        {"n_instances", instances.size()},
                        {"n_ok", stats.n_ok},
                        {"n_failed", stats.n_failed},
                        {"n_from_cache", stats.n_from_cache},
                        {"network_calls", stats.network_calls}};
    bsr::write_manifest(manifest, out_path(g, "manifest.json"));

    std::cout << "inferred " << stats.n_ok << "/" << instances.size() << " instances ("
              << stats.n_from_cache << " from cache, " << stats.n_failed << " failed)\n";
    if (stats.n_failed == 0) return kExitOk;
    return stats.n_ok == 0 ? kExitUsage : kExitPartialInfer;
}

// Builds the heatmap grid from a two-level grouped report: outer groups are
// rows, inner groups are columns, cells show LSS.
bsr::HeatmapData heatmap_from_report(const bsr::MetricsReport& report) {
    bsr::HeatmapData data;
    data.title = "LSS (beta=" + fmt_g(report.beta) + ") by " + report.group_keys[0] + " and " +
                 report.group_keys[1];
    data.row_axis = report.group_keys[0];
    data.col_axis = report.group_keys[1];

    std::set<std::string> col_set;
    for (const auto& [row_key, row_group] : report.groups) {
        data.row_labels.push_back(row_key);
        for (const auto& [col_key, cell] : row_group.groups) col_set.insert(col_key);
    }
    data.col_labels.assign(col_set.begin(), col_set.end());
    for (const auto& row_key : data.row_labels) {
        const auto& row_group = report.groups.at(row_key);
        std::vector<std::optional<double>> row;
        for (const auto& col_key : data.col_labels) {
            auto it = row_group.groups.find(col_key);
            if (it == row_group.groups.end()) {
                row.push_back(std::nullopt);
            } else {
                row.push_back(it->second.lss);
            }
        }
        data.cells.push_back(std::move(row));
    }
    return data;
}

int cmd_score(const GlobalOpts& g, const std::string& dataset_path,
              const std::string& responses_path, const std::vector<std::string>& group_keys,
              const std::string& lexicon_path) {
    auto instances = bsr::read_instances_jsonl(dataset_path);
    auto responses = bsr::read_responses_jsonl(responses_path);
    bsr::Lexicon lexicon = load_lexicon_opt(lexicon_path);
    prepare_out_dir(g);

    auto records = join_records(instances, responses, lexicon);
    bsr::MetricsReport report = group_keys.empty()
                                    ? bsr::compute_report(records, g.beta)
                                    : bsr::grouped_report(records, group_keys, g.beta);

    bsr::write_text_file(out_path(g, "report.json"), bsr::report_to_json(report).dump(2) + "\n");
    bsr::write_text_file(out_path(g, "report.csv"), bsr::report_to_csv(report));

    bool wrote_heatmap = false;
    if (group_keys.size() == 2 &&
        ((group_keys[0] == "law_id" && group_keys[1] == "identity_type") ||
         (group_keys[0] == "identity_type" && group_keys[1] == "law_id"))) {
        bsr::write_text_file(out_path(g, "heatmap.svg"),
                             bsr::render_heatmap(heatmap_from_report(report)));
        wrote_heatmap = true;
    }

    bsr::RunManifest manifest = bsr::make_manifest("score", g.seed.value_or(0), "");
    manifest.outputs = {{"report_json", "report.json"}, {"report_csv", "report.csv"}};
    if (wrote_heatmap) manifest.outputs["heatmap"] = "heatmap.svg";
    manifest.details = {{"dataset", dataset_path},
                        {"responses", responses_path},
                        {"beta", g.beta},
                        {"group_by", group_keys},
                        {"rfs", report.rfs},
                        {"f1", report.f1},
                        {"lss", report.lss}};
    bsr::write_manifest(manifest, out_path(g, "manifest.json"));

    print_report_line(report);
    return kExitOk;
}

int cmd_sweep(const GlobalOpts& g, const std::string& dataset_path,
              const std::string& responses_path, std::vector<double> beta_grid,
              const std::string& lexicon_path) {
    auto instances = bsr::read_instances_jsonl(dataset_path);
    auto responses = bsr::read_responses_jsonl(responses_path);
    bsr::Lexicon lexicon = load_lexicon_opt(lexicon_path);
    prepare_out_dir(g);

    if (beta_grid.empty()) {
        beta_grid = {0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1, 2, 5, 10, 20, 50, 100};
    }
    for (double b : beta_grid) {
        if (!(b > 0)) throw bsr::config_error("--beta-grid values must be > 0");
    }

    auto records = join_records(instances, responses, lexicon);
    bsr::MetricsReport overall = bsr::compute_report(records, 1.0);
    auto curve = bsr::beta_sweep(overall.rfs, overall.f1, beta_grid);

    std::string csv = "beta,rfs,f1,lss\n";
    bsr::LineSeries series{"LSS", {}};
    for (const auto& [beta, lss] : curve) {
        csv += fmt_g(beta) + "," + bsr::format_metric(overall.rfs) + "," +
               bsr::format_metric(overall.f1) + "," + bsr::format_metric(lss) + "\n";
        series.points.emplace_back(beta, lss);
    }
    bsr::write_text_file(out_path(g, "sweep.csv"), csv);

    bsr::LineChartData chart;
    chart.title = "LSS as a function of beta (rfs=" + bsr::format_metric(overall.rfs) +
                  ", f1=" + bsr::format_metric(overall.f1) + ")";
    chart.x_axis = "beta (log scale)";
    chart.y_axis = "LSS";
    chart.log_x = true;
    chart.series = {series};
    bsr::write_text_file(out_path(g, "sweep.svg"), bsr::render_line_chart(chart));

    bsr::RunManifest manifest = bsr::make_manifest("sweep", g.seed.value_or(0), "");
    manifest.outputs = {{"sweep_csv", "sweep.csv"}, {"sweep_svg", "sweep.svg"}};
    manifest.details = {{"dataset", dataset_path},
                        {"responses", responses_path},
                        {"beta_grid", beta_grid},
                        {"rfs", overall.rfs},
                        {"f1", overall.f1}};
    bsr::write_manifest(manifest, out_path(g, "manifest.json"));

    std::cout << "swept " << beta_grid.size() << " beta values; rfs="
              << bsr::format_metric(overall.rfs) << " f1=" << bsr::format_metric(overall.f1)
              << "\n";
    return kExitOk;
}

int cmd_trend(const GlobalOpts& g, const std::string& dataset_path,
              const std::vector<std::string>& responses_paths,
              const std::vector<double>& family_ts, double identity_noise,
              const std::string& lexicon_path) {
    if (responses_paths.empty() == family_ts.empty()) {
        throw bsr::config_error(
            "trend needs exactly one of --responses files or --checkpoint-family t values");
    }
    auto instances = bsr::read_instances_jsonl(dataset_path);
    bsr::Lexicon lexicon = load_lexicon_opt(lexicon_path);
    prepare_out_dir(g);

    std::vector<std::pair<std::string, std::vector<bsr::EvalRecord>>> checkpoints;
    if (!family_ts.empty()) {
        for (double t : family_ts) {
            const std::string label = fmt_g(t);
            bsr::ModelSource source;
            source.variant = bsr::ModelSource::Variant::Mock;
            source.model_id = "checkpoint-" + label;
            source.mock = bsr::checkpoint_family(t, identity_noise, g.seed.value_or(0));
            auto responses = bsr::infer_batch(instances, source, nullptr);
            auto records = join_records(instances, responses, lexicon);
            for (auto& record : records) record.checkpoint = label;
            checkpoints.emplace_back(label, std::move(records));
        }
    } else {
        for (const auto& path : responses_paths) {
            const std::string label = fs::path(path).stem().string();
            auto responses = bsr::read_responses_jsonl(path);
            auto records = join_records(instances, responses, lexicon);
            for (auto& record : records) record.checkpoint = label;
            checkpoints.emplace_back(label, std::move(records));
        }
    }

    std::vector<std::string> warnings;
    auto rows = bsr::trend_series(checkpoints, g.beta, &warnings);
    for (const auto& warning : warnings) std::cerr << "warning: " << warning << "\n";

    bsr::write_text_file(out_path(g, "trend.csv"), bsr::trend_to_csv(rows));

    // Checkpoint labels chart as their numeric value when they all parse,
    // otherwise as their position in the input order.
    std::vector<double> xs(rows.size());
    bool numeric = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        try {
            std::size_t used = 0;
            xs[i] = std::stod(rows[i].checkpoint, &used);
            if (used != rows[i].checkpoint.size()) numeric = false;
        } catch (const std::exception&) {
            numeric = false;
        }
    }
    if (!numeric) {
        for (std::size_t i = 0; i < rows.size(); ++i) xs[i] = static_cast<double>(i);
    }
    bsr::LineChartData chart;
    chart.title = "Metric trend across checkpoints (beta=" + fmt_g(g.beta) + ")";
    chart.x_axis = "checkpoint";
    chart.y_axis = "score";
    chart.series = {{"RFS", {}}, {"F1", {}}, {"LSS", {}}};
    for (std::size_t i = 0; i < rows.size(); ++i) {
        chart.series[0].points.emplace_back(xs[i], rows[i].rfs);
        chart.series[1].points.emplace_back(xs[i], rows[i].f1);
        chart.series[2].points.emplace_back(xs[i], rows[i].lss);
    }
    bsr::write_text_file(out_path(g, "trend.svg"), bsr::render_line_chart(chart));

    bsr::RunManifest manifest = bsr::make_manifest("trend", g.seed.value_or(0), "");
    manifest.outputs = {{"trend_csv", "trend.csv"}, {"trend_svg", "trend.svg"}};
    manifest.details = {{"dataset", dataset_path},
                        {"beta", g.beta},
                        {"n_checkpoints", rows.size()},
                        {"identity_noise", identity_noise}};
    bsr::write_manifest(manifest, out_path(g, "manifest.json"));

    for (const auto& row : rows) {
        std::cout << "checkpoint " << row.checkpoint << ": rfs=" << bsr::format_metric(row.rfs)
                  << " f1=" << bsr::format_metric(row.f1)
                  << " lss=" << bsr::format_metric(row.lss) << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Corpus generation, inference and legal-safety scoring for binary statutory "
                 "reasoning benchmarks"};
    app.set_version_flag("--version", bsr::kToolVersion);
    app.require_subcommand(1);

    GlobalOpts g;
    std::uint64_t seed_raw = 0;
    auto* seed_opt = app.add_option("--seed", seed_raw, "Seed overriding the config's value");
    app.add_option("--beta", g.beta, "Fairness weight in LSS_beta (default 1.0)")
        ->check(CLI::PositiveNumber);
    app.add_flag("--force", g.force, "Write into an existing output directory");
    app.add_option("--out-dir", g.out_dir, "Directory for command artifacts");

    auto* generate = app.add_subcommand("generate", "Generate the three corpora from a config");
    generate->fallthrough();
    std::string config_path;
    generate->add_option("--config", config_path, "Corpus config JSON")
        ->required()
        ->check(CLI::ExistingFile);

    auto* infer = app.add_subcommand("infer", "Run a model over a dataset");
    infer->fallthrough();
    std::string infer_dataset, model_path, cache_path;
    infer->add_option("--dataset", infer_dataset, "Instances JSONL")
        ->required()
        ->check(CLI::ExistingFile);
    infer->add_option("--model", model_path, "Model source JSON")
        ->required()
        ->check(CLI::ExistingFile);
    infer->add_option("--cache", cache_path, "Response cache JSONL (created if missing)");

    auto* score = app.add_subcommand("score", "Score responses against a dataset");
    score->fallthrough();
    std::string score_dataset, score_responses, score_lexicon;
    std::vector<std::string> group_keys;
    score->add_option("--dataset", score_dataset, "Instances JSONL")
        ->required()
        ->check(CLI::ExistingFile);
    score->add_option("--responses", score_responses, "Responses JSONL")
        ->required()
        ->check(CLI::ExistingFile);
    score->add_option("--group-by", group_keys,
                      "Comma-separated group keys (law_id, identity_type, checkpoint)")
        ->delimiter(',');
    score->add_option("--lexicon", score_lexicon, "Lexicon JSON overriding the built-in terms")
        ->check(CLI::ExistingFile);

    auto* sweep = app.add_subcommand("sweep", "LSS as a function of beta");
    sweep->fallthrough();
    std::string sweep_dataset, sweep_responses, sweep_lexicon;
    std::vector<double> beta_grid;
    sweep->add_option("--dataset", sweep_dataset, "Instances JSONL")
        ->required()
        ->check(CLI::ExistingFile);
    sweep->add_option("--responses", sweep_responses, "Responses JSONL")
        ->required()
        ->check(CLI::ExistingFile);
    sweep->add_option("--beta-grid", beta_grid, "Comma-separated beta values")->delimiter(',');
    sweep->add_option("--lexicon", sweep_lexicon, "Lexicon JSON overriding the built-in terms")
        ->check(CLI::ExistingFile);

    auto* trend = app.add_subcommand("trend", "Metric trend across checkpoints");
    trend->fallthrough();
    std::string trend_dataset, trend_lexicon;
    std::vector<std::string> trend_responses;
    std::vector<double> family_ts;
    double identity_noise = 0.0;
    trend->add_option("--dataset", trend_dataset, "Instances JSONL")
        ->required()
        ->check(CLI::ExistingFile);
    trend->add_option("--responses", trend_responses,
                      "Responses JSONL per checkpoint (file stem names the checkpoint)")
        ->check(CLI::ExistingFile);
    trend->add_option("--checkpoint-family", family_ts,
                      "Comma-separated t values for the built-in checkpoint mock family")
        ->delimiter(',');
    trend->add_option("--identity-noise", identity_noise,
                      "Per-instance flip probability for the checkpoint family")
        ->check(CLI::Range(0.0, 1.0));
    trend->add_option("--lexicon", trend_lexicon, "Lexicon JSON overriding the built-in terms")
        ->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }
    if (seed_opt->count() > 0) g.seed = seed_raw;

    try {
        if (generate->parsed()) return cmd_generate(g, config_path);
        if (infer->parsed()) return cmd_infer(g, infer_dataset, model_path, cache_path);
        if (score->parsed()) {
            return cmd_score(g, score_dataset, score_responses, group_keys, score_lexicon);
        }
        if (sweep->parsed()) {
            return cmd_sweep(g, sweep_dataset, sweep_responses, beta_grid, sweep_lexicon);
        }
        if (trend->parsed()) {
            return cmd_trend(g, trend_dataset, trend_responses, family_ts, identity_noise,
                             trend_lexicon);
        }
    } catch (const bsr::eval_error& e) {
        std::cerr << "scoring error: " << e.what() << "\n";
        return kExitScoring;
    } catch (const bsr::config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const bsr::io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
