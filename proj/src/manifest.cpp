#include "tracelens/manifest.hpp"

#include <fstream>

#include "tracelens/errors.hpp"

namespace tracelens {

namespace {

std::vector<std::filesystem::path> path_list(const nlohmann::json& j, const std::filesystem::path& base,
                                             const char* key) {
    std::vector<std::filesystem::path> out;
    for (const auto& entry : j.value(key, nlohmann::json::array())) {
        if (!entry.is_string()) {
            throw ParseError(std::string("manifest: '") + key + "' entries must be path strings");
        }
        std::filesystem::path p = entry.get<std::string>();
        out.push_back(p.is_absolute() ? p : base / p);
    }
    return out;
}

} // namespace

RunManifest load_manifest(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open manifest: " + file.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(file.string() + ": invalid JSON: " + e.what());
    }
    if (!j.is_object()) throw ParseError(file.string() + ": manifest must be a JSON object");

    const std::filesystem::path base = file.parent_path();
    RunManifest m;
    m.training = path_list(j, base, "training");
    m.idle = path_list(j, base, "idle");
    m.experiments = path_list(j, base, "experiments");
    m.preset_name = j.value("preset", "");
    if (j.contains("template_file")) {
        std::filesystem::path p = j.at("template_file").get<std::string>();
        m.template_file = p.is_absolute() ? p : base / p;
    }

    if (j.contains("thresholds")) {
        const auto& t = j.at("thresholds");
        m.thresholds.eps_spurious = t.value("eps_spurious", m.thresholds.eps_spurious);
        m.thresholds.eps_missing = t.value("eps_missing", m.thresholds.eps_missing);
    }
    m.order = j.value("order", m.order);
    m.order_cap = j.value("order_cap", m.order_cap);
    m.mode = j.value("mode", m.mode);
    m.seed = j.value("seed", m.seed);
    m.jobs = j.value("jobs", m.jobs);
    m.format = j.value("format", m.format);
    if (j.contains("output_dir")) {
        std::filesystem::path p = j.at("output_dir").get<std::string>();
        m.output_dir = p.is_absolute() ? p : base / p;
    }
    m.ppm_exclusion = j.value("ppm_exclusion", m.ppm_exclusion);
    m.common_context_only = j.value("common_context_only", m.common_context_only);

    if (j.contains("gen")) {
        const auto& g = j.at("gen");
        m.gen_fault_free = g.value("fault_free", m.gen_fault_free);
        m.gen_idle = g.value("idle", m.gen_idle);
        m.gen_experiments = g.value("experiments", m.gen_experiments);
        m.noise = g.value("noise", m.noise);
        m.idle_duration = g.value("idle_duration", m.idle_duration);
        if (g.contains("fault_mix")) {
            const auto& mix = g.at("fault_mix");
            m.fault_mix.throw_exception = mix.value("throw_exception", m.fault_mix.throw_exception);
            m.fault_mix.wrong_return = mix.value("wrong_return", m.fault_mix.wrong_return);
            m.fault_mix.wrong_parameter = mix.value("wrong_parameter", m.fault_mix.wrong_parameter);
            m.fault_mix.delay = mix.value("delay", m.fault_mix.delay);
            m.fault_mix.non_manifesting = mix.value("non_manifesting", m.fault_mix.non_manifesting);
        }
    }
    if (j.contains("eval")) {
        const auto& e = j.at("eval");
        m.n_values = e.value("n_values", m.n_values);
        m.test_traces_per_rep = e.value("test_traces_per_rep", m.test_traces_per_rep);
        m.repetitions = e.value("repetitions", m.repetitions);
        m.fn_training_traces = e.value("fn_training_traces", m.fn_training_traces);
        m.fn_experiments = e.value("fn_experiments", m.fn_experiments);
        m.fp_prerun_repetitions = e.value("fp_prerun_repetitions", m.fp_prerun_repetitions);
        m.noise = e.value("noise", m.noise);
    }
    if (j.contains("bench")) {
        const auto& b = j.at("bench");
        m.bench_training_counts = b.value("training_counts", m.bench_training_counts);
        m.bench_experiment_counts = b.value("experiment_counts", m.bench_experiment_counts);
        m.bench_length_factors = b.value("length_factors", m.bench_length_factors);
    }

    validate(m.thresholds);
    if (m.jobs < 1) throw ConfigError("manifest: jobs must be >= 1");
    if (m.order < 0) throw ConfigError("manifest: order must be >= 0");
    mode_from_name(m.mode); // validates
    return m;
}

} // namespace tracelens
