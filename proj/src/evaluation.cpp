#include "tracelens/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "tracelens/errors.hpp"
#include "tracelens/parallel.hpp"
#include "tracelens/rng.hpp"

namespace tracelens {

namespace {

std::string fmt_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

struct MeanStd {
    double mean = 0.0;
    double std_dev = 0.0;
};

MeanStd mean_std(const std::vector<double>& xs) {
    MeanStd out;
    if (xs.empty()) return out;
    out.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    if (xs.size() < 2) return out;
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.std_dev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    return out;
}

const std::vector<Mode> kBothModes{Mode::LcsOnly, Mode::LcsWithVmm};

void collect_flagged(const ClassificationReport& report, std::set<Symbol>& out) {
    for (const auto& ev : report.injected_events) {
        if (ev.label == EventLabel::Spurious) out.insert(ev.symbol);
    }
    for (const auto& ev : report.reference_only_events) {
        if (ev.label == EventLabel::Missing) out.insert(ev.symbol);
    }
}

int anomaly_count(const ClassificationReport& report) {
    return report.summary.spurious + report.summary.missing;
}

} // namespace

std::string EvalSummary::fp_csv() const {
    std::string out = "n,mode,mean_fp_pct,std_fp_pct\n";
    for (const auto& cell : fp_cells) {
        out += std::to_string(cell.n);
        out += ',';
        out += mode_name(cell.mode);
        out += ',';
        out += fmt_double(cell.mean_fp_pct);
        out += ',';
        out += fmt_double(cell.std_fp_pct);
        out += '\n';
    }
    return out;
}

std::string EvalSummary::fn_csv() const {
    std::string out = "mode,failed,undetected,fn_pct\n";
    for (const Mode mode : kBothModes) {
        auto und = undetected.find(mode);
        auto pct = fn_pct.find(mode);
        if (und == undetected.end() || pct == fn_pct.end()) continue;
        out += mode_name(mode);
        out += ',';
        out += std::to_string(failed_experiments);
        out += ',';
        out += std::to_string(und->second);
        out += ',';
        out += fmt_double(pct->second);
        out += '\n';
    }
    return out;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> sample_disjoint(
    std::mt19937_64& rng, std::size_t total, std::size_t n, std::size_t m) {
    if (n + m > total) {
        throw DataError("sample_disjoint: need " + std::to_string(n + m) + " traces, corpus has " +
                        std::to_string(total));
    }
    std::vector<std::size_t> indices(total);
    std::iota(indices.begin(), indices.end(), 0);
    std::shuffle(indices.begin(), indices.end(), rng);
    return {std::vector<std::size_t>(indices.begin(), indices.begin() + static_cast<std::ptrdiff_t>(n)),
            std::vector<std::size_t>(indices.begin() + static_cast<std::ptrdiff_t>(n),
                                     indices.begin() + static_cast<std::ptrdiff_t>(n + m))};
}

EvalSummary eval_false_positives(const FpRunConfig& config,
                                 const std::vector<EventSequence>& corpus,
                                 std::uint32_t alphabet_size) {
    if (config.n_values.empty()) throw ConfigError("eval_false_positives: no training-set sizes");
    const int max_n = *std::max_element(config.n_values.begin(), config.n_values.end());
    if (static_cast<std::size_t>(max_n + config.test_traces_per_rep) > corpus.size()) {
        throw DataError("eval_false_positives: corpus of " + std::to_string(corpus.size()) +
                        " traces cannot supply " + std::to_string(max_n) + " training + " +
                        std::to_string(config.test_traces_per_rep) + " test traces");
    }

    struct RepResult {
        std::map<Mode, std::vector<double>> fp_pcts;
        std::map<Mode, std::set<Symbol>> flagged;
    };
    const std::size_t total_reps =
        config.n_values.size() * static_cast<std::size_t>(config.repetitions);
    std::vector<RepResult> slots(total_reps);

    parallel_for(total_reps, config.jobs, [&](std::size_t slot) {
        const std::size_t n_idx = slot / static_cast<std::size_t>(config.repetitions);
        const std::size_t rep = slot % static_cast<std::size_t>(config.repetitions);
        const int n = config.n_values[n_idx];

        std::mt19937_64 rng = make_rng(config.seed, {0xF0, static_cast<std::uint64_t>(n), rep});
        auto [train_idx, test_idx] = sample_disjoint(rng, corpus.size(), static_cast<std::size_t>(n),
                                                     static_cast<std::size_t>(config.test_traces_per_rep));

        std::vector<EventSequence> training;
        training.reserve(train_idx.size());
        for (std::size_t i : train_idx) training.push_back(corpus[i]);

        ClassifyOptions opts;
        opts.thresholds = config.thresholds;
        opts.order = config.order;
        opts.order_cap = config.order_cap;
        opts.ppm_exclusion = config.ppm_exclusion;
        opts.alphabet_size = alphabet_size;
        const Classifier classifier(std::move(training), opts);

        RepResult& result = slots[slot];
        for (std::size_t i : test_idx) {
            const auto reports = classifier.classify_modes(corpus[i], kBothModes);
            for (const auto& report : reports) {
                const double fp_pct =
                    100.0 * static_cast<double>(anomaly_count(report)) / static_cast<double>(corpus[i].size());
                result.fp_pcts[report.mode].push_back(fp_pct);
                collect_flagged(report, result.flagged[report.mode]);
            }
        }
    });

    EvalSummary summary;
    for (std::size_t n_idx = 0; n_idx < config.n_values.size(); ++n_idx) {
        std::map<Mode, std::vector<double>> merged;
        for (int rep = 0; rep < config.repetitions; ++rep) {
            const auto& result = slots[n_idx * static_cast<std::size_t>(config.repetitions) +
                                       static_cast<std::size_t>(rep)];
            for (const Mode mode : kBothModes) {
                auto it = result.fp_pcts.find(mode);
                if (it == result.fp_pcts.end()) continue;
                auto& dst = merged[mode];
                dst.insert(dst.end(), it->second.begin(), it->second.end());
            }
        }
        for (const Mode mode : kBothModes) {
            const MeanStd ms = mean_std(merged[mode]);
            summary.fp_cells.push_back({config.n_values[n_idx], mode, ms.mean, ms.std_dev});
        }
    }
    for (const auto& result : slots) {
        for (const auto& [mode, flagged] : result.flagged) {
            summary.uncertain_events[mode].insert(flagged.begin(), flagged.end());
        }
    }
    return summary;
}

EvalSummary eval_false_negatives(const std::vector<EventSequence>& training,
                                 const std::vector<GeneratedTrace>& experiments,
                                 const std::map<Mode, std::set<Symbol>>& uncertain_events,
                                 const FnRunConfig& config, SymbolTable& table,
                                 std::uint32_t alphabet_size) {
    if (experiments.empty()) throw DataError("eval_false_negatives: no experiments");

    ClassifyOptions opts;
    opts.thresholds = config.thresholds;
    opts.order = config.order;
    opts.order_cap = config.order_cap;
    opts.ppm_exclusion = config.ppm_exclusion;
    opts.alphabet_size = alphabet_size;
    const Classifier classifier(training, opts);
    classifier.warm_models();

    struct Slot {
        bool failed = false;
        FnExperimentOutcome outcome;
    };
    std::vector<Slot> slots(experiments.size());

    auto empty_set = std::set<Symbol>{};
    auto uncertain_for = [&](Mode mode) -> const std::set<Symbol>& {
        auto it = uncertain_events.find(mode);
        return it == uncertain_events.end() ? empty_set : it->second;
    };

    parallel_for(experiments.size(), config.jobs, [&](std::size_t idx) {
        const auto& exp = experiments[idx];
        if (!exp.truth.failure_manifested) return;

        std::set<Symbol> truth_spurious;
        for (const auto& [pos, pair] : exp.truth.spurious) truth_spurious.insert(table.intern(pair));
        std::set<Symbol> truth_missing;
        for (const auto& [pos, pair] : exp.truth.missing) truth_missing.insert(table.intern(pair));

        Slot& slot = slots[idx];
        slot.failed = true;
        slot.outcome.id = exp.trace.trace_id;
        slot.outcome.type = exp.truth.fault_type.value_or(FaultType::ThrowException);
        slot.outcome.symbol_invariant = exp.truth.symbol_invariant();

        const auto reports = classifier.classify_modes(exp.trace, kBothModes);
        for (const auto& report : reports) {
            const std::set<Symbol>& uncertain = uncertain_for(report.mode);
            bool detected = false;
            for (const auto& ev : report.injected_events) {
                if (ev.label == EventLabel::Spurious && truth_spurious.count(ev.symbol) &&
                    !uncertain.count(ev.symbol)) {
                    detected = true;
                    break;
                }
            }
            if (!detected) {
                for (const auto& ev : report.reference_only_events) {
                    if (ev.label == EventLabel::Missing && truth_missing.count(ev.symbol) &&
                        !uncertain.count(ev.symbol)) {
                        detected = true;
                        break;
                    }
                }
            }
            slot.outcome.detected[report.mode] = detected;
        }
    });

    EvalSummary summary;
    summary.uncertain_events = uncertain_events;
    for (auto& slot : slots) {
        if (!slot.failed) continue;
        ++summary.failed_experiments;
        summary.fn_outcomes.push_back(std::move(slot.outcome));
    }
    for (const Mode mode : kBothModes) {
        int undetected = 0;
        for (const auto& outcome : summary.fn_outcomes) {
            if (!outcome.detected.at(mode)) ++undetected;
        }
        summary.undetected[mode] = undetected;
        summary.fn_pct[mode] = summary.failed_experiments == 0
                                   ? 0.0
                                   : 100.0 * undetected / static_cast<double>(summary.failed_experiments);
    }
    return summary;
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    LinearFit fit;
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) return fit;
    const double mean_x = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    const double mean_y = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mean_x) * (x[i] - mean_x);
        sxy += (x[i] - mean_x) * (y[i] - mean_y);
        syy += (y[i] - mean_y) * (y[i] - mean_y);
    }
    if (sxx == 0.0) return fit;
    fit.slope = sxy / sxx;
    fit.intercept = mean_y - fit.slope * mean_x;
    if (syy == 0.0) {
        fit.r2 = 1.0;
    } else {
        double ss_res = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double pred = fit.intercept + fit.slope * x[i];
            ss_res += (y[i] - pred) * (y[i] - pred);
        }
        fit.r2 = 1.0 - ss_res / syy;
    }
    return fit;
}

std::string ScalingSummary::times_csv() const {
    std::string out = "axis,value,seconds\n";
    for (const auto& row : rows) {
        out += row.axis;
        out += ',';
        out += std::to_string(row.value);
        out += ',';
        out += fmt_double(row.seconds);
        out += '\n';
    }
    return out;
}

std::string ScalingSummary::fits_csv() const {
    std::string out = "axis,slope,intercept,r2\n";
    for (const auto& [axis, fit] : fits) {
        out += axis;
        out += ',';
        out += fmt_double(fit.slope);
        out += ',';
        out += fmt_double(fit.intercept);
        out += ',';
        out += fmt_double(fit.r2);
        out += '\n';
    }
    return out;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// Repeats fn until the cumulative duration crosses min_seconds and reports
// the per-iteration time. Three passes after a warmup, keeping the fastest;
// millisecond-scale sections are otherwise dominated by scheduler noise.
double time_section(double min_seconds, const std::function<void()>& fn) {
    fn(); // warmup
    double best = std::numeric_limits<double>::infinity();
    for (int pass = 0; pass < 3; ++pass) {
        int iterations = 0;
        const auto start = Clock::now();
        double elapsed = 0.0;
        do {
            fn();
            ++iterations;
            elapsed = seconds_since(start);
        } while (elapsed < min_seconds);
        best = std::min(best, elapsed / iterations);
    }
    return best;
}

} // namespace

ScalingSummary benchmark_scaling(const ScalingConfig& config) {
    ScalingSummary summary;
    const WorkloadTemplate tmpl = preset(config.preset_name);

    // Axis 1: training time vs number of training traces.
    {
        SymbolTable table;
        const int max_n = config.training_trace_counts.empty()
                              ? 0
                              : *std::max_element(config.training_trace_counts.begin(),
                                                  config.training_trace_counts.end());
        const auto corpus = make_fault_free_corpus(tmpl, max_n, config.seed, config.noise, table);
        const int order = std::min(estimate_order(corpus).order, config.order_cap);
        std::vector<std::vector<Symbol>> sequences;
        for (const auto& seq : corpus) sequences.push_back(seq.symbols);

        std::vector<double> xs;
        std::vector<double> ys;
        for (const int n : config.training_trace_counts) {
            std::vector<std::vector<Symbol>> subset(sequences.begin(), sequences.begin() + n);
            const double secs = time_section(config.min_sample_seconds, [&] {
                PpmModel::train(subset, order, static_cast<std::uint32_t>(table.size()));
            });
            summary.rows.push_back({"training_traces", n, secs});
            xs.push_back(n);
            ys.push_back(secs);
        }
        summary.fits["training_traces"] = linear_fit(xs, ys);
    }

    // Axis 2: cumulative classification time vs number of experiments, for a
    // fixed training set.
    {
        SymbolTable table;
        const auto corpus = make_fault_free_corpus(tmpl, config.classify_training_traces,
                                                   config.seed + 1, config.noise, table);
        const int max_exp = config.experiment_counts.empty()
                                ? 0
                                : *std::max_element(config.experiment_counts.begin(),
                                                    config.experiment_counts.end());
        const auto experiments =
            make_experiments(tmpl, max_exp, config.seed + 2, config.noise, FaultMix{}, table);

        ClassifyOptions opts;
        opts.order_cap = config.order_cap;
        opts.alphabet_size = static_cast<std::uint32_t>(table.size());
        const Classifier classifier(corpus, opts);
        classifier.warm_models();

        std::vector<int> checkpoints = config.experiment_counts;
        std::sort(checkpoints.begin(), checkpoints.end());
        std::size_t next_checkpoint = 0;
        std::vector<double> xs;
        std::vector<double> ys;
        const auto start = Clock::now();
        for (int i = 0; i < max_exp; ++i) {
            classifier.classify(experiments[static_cast<std::size_t>(i)].trace, Mode::LcsWithVmm);
            while (next_checkpoint < checkpoints.size() && i + 1 == checkpoints[next_checkpoint]) {
                const double secs = seconds_since(start);
                summary.rows.push_back({"classification_experiments", i + 1, secs});
                xs.push_back(i + 1);
                ys.push_back(secs);
                ++next_checkpoint;
            }
        }
        summary.fits["classification_experiments"] = linear_fit(xs, ys);
    }

    // Axes 3/4: events per trace (template repeated, counts fixed).
    {
        std::vector<double> train_xs, train_ys, cls_xs, cls_ys;
        for (const int factor : config.trace_length_factors) {
            const WorkloadTemplate scaled = scale_template(tmpl, factor);
            SymbolTable table;
            const auto corpus =
                make_fault_free_corpus(scaled, config.classify_training_traces, config.seed + 3,
                                       config.noise, table);
            const auto experiments = make_experiments(scaled, 20, config.seed + 4, config.noise,
                                                      FaultMix{}, table);
            const int order = std::min(estimate_order(corpus).order, config.order_cap);
            std::vector<std::vector<Symbol>> sequences;
            for (const auto& seq : corpus) sequences.push_back(seq.symbols);
            std::size_t total_events = 0;
            for (const auto& seq : corpus) total_events += seq.size();
            const int mean_events = static_cast<int>(total_events / corpus.size());

            const double train_secs = time_section(config.min_sample_seconds, [&] {
                PpmModel::train(sequences, order, static_cast<std::uint32_t>(table.size()));
            });
            summary.rows.push_back({"training_events_per_trace", mean_events, train_secs});
            train_xs.push_back(mean_events);
            train_ys.push_back(train_secs);

            ClassifyOptions opts;
            opts.order_cap = config.order_cap;
            opts.alphabet_size = static_cast<std::uint32_t>(table.size());
            const Classifier classifier(corpus, opts);
            classifier.warm_models();
            const double cls_secs = time_section(config.min_sample_seconds, [&] {
                for (const auto& exp : experiments) classifier.classify(exp.trace, Mode::LcsWithVmm);
            });
            summary.rows.push_back({"classification_events_per_trace", mean_events, cls_secs});
            cls_xs.push_back(mean_events);
            cls_ys.push_back(cls_secs);
        }
        summary.fits["training_events_per_trace"] = linear_fit(train_xs, train_ys);
        summary.fits["classification_events_per_trace"] = linear_fit(cls_xs, cls_ys);
    }

    return summary;
}

} // namespace tracelens
