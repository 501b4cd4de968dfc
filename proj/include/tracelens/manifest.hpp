#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tracelens/classifier.hpp"
#include "tracelens/synthgen.hpp"

namespace tracelens {

// One JSON file describing a run; command-line flags override individual
// fields. Paths are resolved relative to the manifest's directory.
struct RunManifest {
    std::vector<std::filesystem::path> training;
    std::vector<std::filesystem::path> idle;
    std::vector<std::filesystem::path> experiments;

    std::string preset_name;               // for gen / eval-* / bench
    std::filesystem::path template_file;   // custom workload template (overrides preset)

    Thresholds thresholds{};
    int order = 0;     // 0 = estimate from training traces
    int order_cap = 64;
    std::string mode = "vmm";
    std::uint64_t seed = 42;
    int jobs = 1;
    std::string format = "text";
    std::filesystem::path output_dir = "out";
    bool ppm_exclusion = true;
    bool common_context_only = false;

    // gen section
    int gen_fault_free = 20;
    int gen_idle = 3;
    int gen_experiments = 20;
    double noise = 0.05;
    double idle_duration = 3.0;
    FaultMix fault_mix{};

    // eval section
    std::vector<int> n_values{5, 10, 15, 20};
    int test_traces_per_rep = 10;
    int repetitions = 30;
    int fn_training_traces = 10;
    int fn_experiments = 500;
    int fp_prerun_repetitions = 10;

    // bench section
    std::vector<int> bench_training_counts{5, 10, 15, 20, 25, 30, 35, 40};
    std::vector<int> bench_experiment_counts{250, 500, 1000, 1500, 2000};
    std::vector<int> bench_length_factors{1, 2, 4};
};

RunManifest load_manifest(const std::filesystem::path& file);

} // namespace tracelens
