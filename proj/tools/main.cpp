#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tracelens/errors.hpp"
#include "tracelens/evaluation.hpp"
#include "tracelens/log.hpp"
#include "tracelens/manifest.hpp"
#include "tracelens/pipeline.hpp"
#include "tracelens/report.hpp"
#include "tracelens/rng.hpp"
#include "tracelens/synthgen.hpp"

namespace fs = std::filesystem;
using namespace tracelens;

namespace {

// Exit codes: 0 ok, 1 unexpected, 2 parse, 3 config, 4 data.
constexpr int kExitParse = 2;
constexpr int kExitConfig = 3;
constexpr int kExitData = 4;

struct GlobalFlags {
    std::string manifest_path;
    std::optional<double> eps_spurious;
    std::optional<double> eps_missing;
    std::optional<int> order;
    std::optional<std::string> mode;
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
    std::optional<std::string> format;
    std::optional<std::string> output_dir;
    std::optional<std::string> preset_name;
    std::optional<double> noise;
};

RunManifest resolve_manifest(const GlobalFlags& flags) {
    RunManifest m;
    if (!flags.manifest_path.empty()) m = load_manifest(flags.manifest_path);
    if (flags.eps_spurious) m.thresholds.eps_spurious = *flags.eps_spurious;
    if (flags.eps_missing) m.thresholds.eps_missing = *flags.eps_missing;
    if (flags.order) m.order = *flags.order;
    if (flags.mode) m.mode = *flags.mode;
    if (flags.seed) m.seed = *flags.seed;
    if (flags.jobs) m.jobs = *flags.jobs;
    if (flags.format) m.format = *flags.format;
    if (flags.output_dir) m.output_dir = *flags.output_dir;
    if (flags.preset_name) m.preset_name = *flags.preset_name;
    if (flags.noise) m.noise = *flags.noise;
    validate(m.thresholds);
    mode_from_name(m.mode);
    return m;
}

void require_exists(const std::vector<fs::path>& paths) {
    for (const auto& p : paths) {
        if (!fs::exists(p)) throw DataError("file does not exist: " + p.string());
    }
}

WorkloadTemplate resolve_template(const RunManifest& m) {
    if (!m.template_file.empty()) {
        std::ifstream in(m.template_file);
        if (!in) throw ConfigError("cannot open template file: " + m.template_file.string());
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(m.template_file.string() + ": invalid JSON: " + e.what());
        }
        return WorkloadTemplate::from_json(j);
    }
    if (m.preset_name.empty()) {
        throw ConfigError("this command needs a workload template: set --preset or "
                          "\"preset\"/\"template_file\" in the manifest");
    }
    return preset(m.preset_name);
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write: " + path.string());
    out << content;
}

ClassifyOptions classify_options(const RunManifest& m, const PreparedCorpus& corpus) {
    ClassifyOptions opts;
    opts.thresholds = m.thresholds;
    opts.order = corpus.order;
    opts.order_cap = m.order_cap;
    opts.mode = mode_from_name(m.mode);
    opts.ppm_exclusion = m.ppm_exclusion;
    opts.common_context_only = m.common_context_only;
    opts.alphabet_size = static_cast<std::uint32_t>(corpus.table.size());
    return opts;
}

int cmd_train(const RunManifest& m) {
    if (m.training.empty()) {
        throw ConfigError("train: no training traces; list span files under \"training\" in the "
                          "manifest");
    }
    require_exists(m.training);
    require_exists(m.idle);

    PrepareOptions popts{m.order, m.order_cap};
    PreparedCorpus corpus = prepare_corpus(m.training, m.idle, popts);

    std::vector<std::vector<Symbol>> sequences;
    sequences.reserve(corpus.training.size());
    for (const auto& seq : corpus.training) sequences.push_back(seq.symbols);
    const PpmModel model = PpmModel::train(sequences, corpus.order,
                                           static_cast<std::uint32_t>(corpus.table.size()),
                                           m.ppm_exclusion);

    fs::create_directories(m.output_dir);
    write_file(m.output_dir / "model.json", model.to_json(&corpus.table).dump(2) + "\n");
    save_dictionary(m.output_dir / "background.json", corpus.dictionary, corpus.table);
    nlohmann::json meta{
        {"order", corpus.order},
        {"estimated_order", corpus.estimated_order},
        {"training_traces", corpus.training.size()},
        {"alphabet_size", corpus.table.size()},
        {"context_count", model.context_count()},
    };
    write_file(m.output_dir / "meta.json", meta.dump(2) + "\n");

    std::cout << "trained on " << corpus.training.size() << " traces, order " << corpus.order
              << ", alphabet " << corpus.table.size() << ", contexts " << model.context_count()
              << "\n"
              << "wrote " << (m.output_dir / "model.json").string() << "\n";
    return 0;
}

int cmd_analyze(const RunManifest& m, const std::vector<std::string>& experiment_args) {
    if (m.training.size() < 2) {
        throw ConfigError("analyze: need at least two training traces in the manifest");
    }
    std::vector<fs::path> experiments = m.experiments;
    for (const auto& arg : experiment_args) experiments.emplace_back(arg);
    if (experiments.empty()) throw ConfigError("analyze: no experiment trace files given");
    require_exists(m.training);
    require_exists(m.idle);
    require_exists(experiments);

    PrepareOptions popts{m.order, m.order_cap};
    PreparedCorpus corpus = prepare_corpus(m.training, m.idle, popts);

    // Ingest experiments against the shared table before sizing the model
    // alphabet, so fault-introduced event types are representable.
    std::vector<EventSequence> traces;
    traces.reserve(experiments.size());
    for (const auto& path : experiments) {
        traces.push_back(
            filter_background(ingest_spans(path, TraceLabel::FaultInjected, corpus.table),
                              corpus.dictionary));
    }

    const Classifier classifier(corpus.training, classify_options(m, corpus));
    fs::create_directories(m.output_dir);

    for (std::size_t i = 0; i < traces.size(); ++i) {
        const ClassificationReport report = classifier.classify(traces[i]);
        fs::path stem_path = experiments[i].filename();
        while (stem_path.has_extension()) stem_path = stem_path.stem();
        const std::string stem = stem_path.string();
        write_file(m.output_dir / (stem + ".report.json"), report.to_json().dump(2) + "\n");
        write_file(m.output_dir / (stem + ".report.txt"), render_text(report));
        if (m.format == "svg") {
            write_file(m.output_dir / (stem + ".report.svg"), render_svg(report));
        }
        std::cout << report.experiment_id << ": common " << report.summary.common << ", spurious "
                  << report.summary.spurious << ", missing " << report.summary.missing
                  << ", non-anomalous "
                  << report.summary.non_anomalous + report.summary.omitted_non_anomalous << "\n";
    }
    std::cout << "reports written to " << m.output_dir.string() << "\n";
    return 0;
}

int cmd_gen(const RunManifest& m) {
    const WorkloadTemplate tmpl = resolve_template(m);
    fs::create_directories(m.output_dir);
    SymbolTable table;

    char name[64];
    for (int i = 0; i < m.gen_fault_free; ++i) {
        std::snprintf(name, sizeof(name), "training_%04d.spans.jsonl", i);
        const auto gen = generate_fault_free(tmpl, derive_seed(m.seed, {0xFF, (std::uint64_t)i}),
                                             m.noise, table, "ff-" + std::to_string(i));
        write_spans(m.output_dir / name, gen.trace);
    }
    for (int i = 0; i < m.gen_idle; ++i) {
        std::snprintf(name, sizeof(name), "idle_%04d.spans.jsonl", i);
        write_spans(m.output_dir / name,
                    generate_idle(tmpl, derive_seed(m.seed, {0x1D, (std::uint64_t)i}),
                                  m.idle_duration, table, "idle-" + std::to_string(i)));
    }
    const auto experiments =
        make_experiments(tmpl, m.gen_experiments, m.seed, m.noise, m.fault_mix, table);
    for (std::size_t i = 0; i < experiments.size(); ++i) {
        std::snprintf(name, sizeof(name), "exp_%04d.spans.jsonl", static_cast<int>(i));
        write_spans(m.output_dir / name, experiments[i].trace);
        std::snprintf(name, sizeof(name), "exp_%04d.truth.json", static_cast<int>(i));
        write_file(m.output_dir / name, experiments[i].truth.to_json().dump(2) + "\n");
    }
    write_file(m.output_dir / "template.json", tmpl.to_json().dump(2) + "\n");

    std::cout << "generated " << m.gen_fault_free << " fault-free, " << m.gen_idle << " idle, "
              << m.gen_experiments << " fault-injected traces in " << m.output_dir.string() << "\n";
    return 0;
}

int cmd_eval_fp(const RunManifest& m) {
    const WorkloadTemplate tmpl = resolve_template(m);
    SymbolTable table;
    const int max_n = *std::max_element(m.n_values.begin(), m.n_values.end());
    const int corpus_size = max_n + m.test_traces_per_rep + 10;
    auto corpus = make_fault_free_corpus(tmpl, corpus_size, m.seed, m.noise, table);
    auto idle = make_idle_corpus(tmpl, m.gen_idle, m.seed, m.idle_duration, table);

    const auto dict = build_background_dictionary(idle);
    const auto filtered = filter_background(corpus, dict);

    FpRunConfig config;
    config.n_values = m.n_values;
    config.test_traces_per_rep = m.test_traces_per_rep;
    config.repetitions = m.repetitions;
    config.thresholds = m.thresholds;
    config.order = m.order;
    config.order_cap = m.order_cap;
    config.ppm_exclusion = m.ppm_exclusion;
    config.seed = m.seed;
    config.jobs = m.jobs;

    const EvalSummary summary =
        eval_false_positives(config, filtered, static_cast<std::uint32_t>(table.size()));

    fs::create_directories(m.output_dir);
    write_file(m.output_dir / "fp.csv", summary.fp_csv());
    nlohmann::json uncertain = nlohmann::json::object();
    for (const auto& [mode, symbols] : summary.uncertain_events) {
        nlohmann::json arr = nlohmann::json::array();
        for (Symbol s : symbols) {
            const EventPair& p = table.pair_of(s);
            arr.push_back({p.first, p.second});
        }
        uncertain[mode_name(mode)] = std::move(arr);
    }
    write_file(m.output_dir / "fp_uncertain_events.json", uncertain.dump(2) + "\n");

    std::cout << summary.fp_csv();
    std::cout << "wrote " << (m.output_dir / "fp.csv").string() << "\n";
    return 0;
}

int cmd_eval_fn(const RunManifest& m) {
    const WorkloadTemplate tmpl = resolve_template(m);
    SymbolTable table;
    const int corpus_size = m.fn_training_traces + m.test_traces_per_rep + 10;
    auto corpus = make_fault_free_corpus(tmpl, corpus_size, m.seed, m.noise, table);
    auto idle = make_idle_corpus(tmpl, m.gen_idle, m.seed, m.idle_duration, table);
    auto experiments = make_experiments(tmpl, m.fn_experiments, m.seed + 1, m.noise, m.fault_mix, table);

    const auto dict = build_background_dictionary(idle);
    auto filtered = filter_background(corpus, dict);
    for (auto& exp : experiments) exp.trace = filter_background(exp.trace, dict);

    // Uncertain event types come from a preliminary false-positive run on the
    // held-out fault-free traces.
    FpRunConfig fp_config;
    fp_config.n_values = {m.fn_training_traces};
    fp_config.test_traces_per_rep = m.test_traces_per_rep;
    fp_config.repetitions = m.fp_prerun_repetitions;
    fp_config.thresholds = m.thresholds;
    fp_config.order = m.order;
    fp_config.order_cap = m.order_cap;
    fp_config.ppm_exclusion = m.ppm_exclusion;
    fp_config.seed = m.seed + 2;
    fp_config.jobs = m.jobs;
    const EvalSummary fp_summary =
        eval_false_positives(fp_config, filtered, static_cast<std::uint32_t>(table.size()));

    std::vector<EventSequence> training(filtered.begin(), filtered.begin() + m.fn_training_traces);
    FnRunConfig fn_config;
    fn_config.thresholds = m.thresholds;
    fn_config.order = m.order;
    fn_config.order_cap = m.order_cap;
    fn_config.ppm_exclusion = m.ppm_exclusion;
    fn_config.jobs = m.jobs;
    const EvalSummary summary =
        eval_false_negatives(training, experiments, fp_summary.uncertain_events, fn_config, table,
                             static_cast<std::uint32_t>(table.size()));

    fs::create_directories(m.output_dir);
    write_file(m.output_dir / "fn.csv", summary.fn_csv());
    nlohmann::json details = nlohmann::json::array();
    for (const auto& outcome : summary.fn_outcomes) {
        details.push_back({
            {"id", outcome.id},
            {"fault_type", fault_type_name(outcome.type)},
            {"symbol_invariant", outcome.symbol_invariant},
            {"detected_lcs", outcome.detected.at(Mode::LcsOnly)},
            {"detected_vmm", outcome.detected.at(Mode::LcsWithVmm)},
        });
    }
    write_file(m.output_dir / "fn_details.json", details.dump(2) + "\n");

    std::cout << summary.fn_csv();
    std::cout << "wrote " << (m.output_dir / "fn.csv").string() << "\n";
    return 0;
}

int cmd_bench(const RunManifest& m) {
    ScalingConfig config;
    if (!m.preset_name.empty()) config.preset_name = m.preset_name;
    config.training_trace_counts = m.bench_training_counts;
    config.experiment_counts = m.bench_experiment_counts;
    config.trace_length_factors = m.bench_length_factors;
    config.noise = m.noise;
    config.seed = m.seed;
    config.order_cap = m.order_cap;

    const ScalingSummary summary = benchmark_scaling(config);
    fs::create_directories(m.output_dir);
    write_file(m.output_dir / "bench_times.csv", summary.times_csv());
    write_file(m.output_dir / "bench_fits.csv", summary.fits_csv());
    std::cout << summary.times_csv() << summary.fits_csv();
    std::cout << "wrote " << (m.output_dir / "bench_times.csv").string() << "\n";
    return 0;
}

int cmd_render(const RunManifest& m, const std::string& report_path, const std::string& out_path) {
    std::ifstream in(report_path);
    if (!in) throw DataError("cannot open report: " + report_path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(report_path + ": invalid JSON: " + e.what());
    }
    const ClassificationReport report = ClassificationReport::from_json(j);
    const std::string rendered = render_report(report, m.format);
    if (out_path.empty()) {
        std::cout << rendered;
    } else {
        write_file(out_path, rendered);
        std::cout << "wrote " << out_path << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Failure-propagation analysis for fault-injection trace experiments"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may appear after the subcommand

    GlobalFlags flags;
    app.add_option("--manifest", flags.manifest_path, "Run manifest (JSON)");
    app.add_option("--eps-spurious", flags.eps_spurious,
                   "Probability below which an injected-only event is spurious (default 0.20)");
    app.add_option("--eps-missing", flags.eps_missing,
                   "Probability above which an omitted event is missing (default 0.80)");
    app.add_option("--order", flags.order, "Model order override (0 = estimate)");
    app.add_option("--mode", flags.mode, "lcs | vmm");
    app.add_option("--seed", flags.seed, "Master seed");
    app.add_option("--jobs", flags.jobs, "Worker threads");
    app.add_option("--format", flags.format, "text | json | svg");
    app.add_option("--out", flags.output_dir, "Output directory");
    app.add_option("--preset", flags.preset_name, "Workload preset: depl | net | sto");
    app.add_option("--noise", flags.noise, "Benign reordering probability for generated corpora");

    auto* train = app.add_subcommand("train", "Ingest fault-free and idle traces, fit the model");
    auto* analyze = app.add_subcommand("analyze", "Classify fault-injected traces");
    std::vector<std::string> experiment_args;
    analyze->add_option("experiments", experiment_args, "Span files of fault-injection experiments");
    auto* gen = app.add_subcommand("gen", "Generate a synthetic trace corpus");
    auto* eval_fp = app.add_subcommand("eval-fp", "False-positive study on fault-free traces");
    auto* eval_fn = app.add_subcommand("eval-fn", "False-negative study on injected experiments");
    auto* bench = app.add_subcommand("bench", "Training/classification scaling benchmark");
    auto* render = app.add_subcommand("render", "Render a report JSON as text or SVG");
    std::string report_path;
    std::string render_out;
    render->add_option("report", report_path, "Report JSON produced by analyze")->required();
    render->add_option("--to", render_out, "Output file (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        const RunManifest manifest = resolve_manifest(flags);
        if (train->parsed()) return cmd_train(manifest);
        if (analyze->parsed()) return cmd_analyze(manifest, experiment_args);
        if (gen->parsed()) return cmd_gen(manifest);
        if (eval_fp->parsed()) return cmd_eval_fp(manifest);
        if (eval_fn->parsed()) return cmd_eval_fn(manifest);
        if (bench->parsed()) return cmd_bench(manifest);
        if (render->parsed()) return cmd_render(manifest, report_path, render_out);
    } catch (const ParseError& e) {
        std::cerr << "tracelens: parse error: " << e.what() << "\n";
        return kExitParse;
    } catch (const ConfigError& e) {
        std::cerr << "tracelens: config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DataError& e) {
        std::cerr << "tracelens: data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "tracelens: error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
