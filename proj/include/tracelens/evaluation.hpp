#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "tracelens/classifier.hpp"
#include "tracelens/synthgen.hpp"

namespace tracelens {

struct FpRunConfig {
    std::vector<int> n_values{5, 10, 15, 20}; // training-set sizes
    int test_traces_per_rep = 10;
    int repetitions = 30;
    Thresholds thresholds{};
    int order = 0; // 0 = estimate per repetition from the sampled training set
    int order_cap = 64;
    bool ppm_exclusion = true;
    std::uint64_t seed = 1;
    int jobs = 1;
};

struct FpCell {
    int n = 0;
    Mode mode = Mode::LcsOnly;
    double mean_fp_pct = 0.0;
    double std_fp_pct = 0.0;
};

struct FnExperimentOutcome {
    std::string id;
    FaultType type = FaultType::ThrowException;
    bool symbol_invariant = false;
    std::map<Mode, bool> detected;
};

// Aggregate results of the accuracy studies. eval_false_positives fills the
// fp_* members; eval_false_negatives the fn_* members.
struct EvalSummary {
    std::vector<FpCell> fp_cells;
    std::map<Mode, std::set<Symbol>> uncertain_events; // symbols flagged at least once on fault-free data

    int failed_experiments = 0;
    std::map<Mode, int> undetected;
    std::map<Mode, double> fn_pct;
    std::vector<FnExperimentOutcome> fn_outcomes;

    std::string fp_csv() const; // n,mode,mean_fp_pct,std_fp_pct
    std::string fn_csv() const; // mode,failed,undetected,fn_pct
};

// Deterministic disjoint draw: a permutation's first n indices train, the
// next m test.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> sample_disjoint(
    std::mt19937_64& rng, std::size_t total, std::size_t n, std::size_t m);

// Classifies held-out fault-free traces; every reported anomaly is a false
// positive. FP% per trace = 100 * (spurious + missing) / trace length.
// Both modes are evaluated on one shared alignment per trace pair.
EvalSummary eval_false_positives(const FpRunConfig& config,
                                 const std::vector<EventSequence>& corpus,
                                 std::uint32_t alphabet_size);

struct FnRunConfig {
    Thresholds thresholds{};
    int order = 0;
    int order_cap = 64;
    bool ppm_exclusion = true;
    std::uint64_t seed = 2;
    int jobs = 1;
};

// An experiment with a manifested failure counts as detected when at least
// one reported anomaly matches its ground truth by symbol and is not an
// uncertain event type. FN% = undetected / failed experiments.
EvalSummary eval_false_negatives(const std::vector<EventSequence>& training,
                                 const std::vector<GeneratedTrace>& experiments,
                                 const std::map<Mode, std::set<Symbol>>& uncertain_events,
                                 const FnRunConfig& config, SymbolTable& table,
                                 std::uint32_t alphabet_size);

struct ScalingConfig {
    std::string preset_name = "depl";
    std::vector<int> training_trace_counts{5, 10, 15, 20, 25, 30, 35, 40};
    std::vector<int> experiment_counts{250, 500, 1000, 1500, 2000};
    std::vector<int> trace_length_factors{1, 2, 4};
    int classify_training_traces = 10;
    double noise = 0.05;
    std::uint64_t seed = 7;
    int order_cap = 64;
    double min_sample_seconds = 0.05; // repeat timed sections until this long
};

struct TimingRow {
    std::string axis;
    int value = 0;
    double seconds = 0.0;
};

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

struct ScalingSummary {
    std::vector<TimingRow> rows;
    std::map<std::string, LinearFit> fits;

    std::string times_csv() const; // axis,value,seconds
    std::string fits_csv() const;  // axis,slope,intercept,r2
};

// Wall-clock scaling along three axes: training time vs number of training
// traces, cumulative classification time vs number of experiments, and both
// phases vs events per trace.
ScalingSummary benchmark_scaling(const ScalingConfig& config);

} // namespace tracelens
