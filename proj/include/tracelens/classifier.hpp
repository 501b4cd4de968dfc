#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tracelens/alignment.hpp"
#include "tracelens/trace_model.hpp"
#include "tracelens/vmm.hpp"

namespace tracelens {

enum class Mode { LcsOnly, LcsWithVmm };
const char* mode_name(Mode mode); // "lcs" / "vmm"
Mode mode_from_name(const std::string& name);

// Probability cutoffs for confirming alignment differences as anomalies.
// Comparisons are strict: a probability exactly equal to a threshold is
// non-anomalous.
struct Thresholds {
    double eps_spurious = 0.20;
    double eps_missing = 0.80;
};

// Range violations throw ConfigError; eps_spurious > eps_missing only warns.
void validate(const Thresholds& t);

enum class EventLabel { Common, Spurious, Missing, NonAnomalous };
const char* label_name(EventLabel label);
enum class EventOrigin { Injected, Reference };

struct LabeledEvent {
    EventOrigin origin = EventOrigin::Injected;
    std::int32_t position = 0; // index in the origin trace
    Symbol symbol = 0;
    std::string sender;
    std::string service;
    std::int64_t start_us = 0;
    std::int64_t duration_us = 0;
    EventLabel label = EventLabel::Common;
    std::optional<double> probability;     // present iff the label was decided by the model
    std::vector<Symbol> context;           // window used for the probability query
    std::optional<std::int32_t> ref_position; // for Common events: aligned reference index
};

struct ReportSummary {
    int common = 0;
    int spurious = 0;
    int missing = 0;
    int non_anomalous = 0;         // injected-side differences the model cleared
    int omitted_non_anomalous = 0; // reference-side differences the model cleared
};

struct ClassificationReport {
    std::string experiment_id;
    Mode mode = Mode::LcsWithVmm;
    std::size_t reference_index = 0;
    int order = 0;
    Thresholds thresholds;
    double nlcs = 0.0; // against the selected reference
    std::vector<LabeledEvent> injected_events;       // every injected-trace event, in order
    std::vector<LabeledEvent> reference_only_events; // reference events outside the LCS, in order
    ReportSummary summary;

    nlohmann::json to_json() const;
    static ClassificationReport from_json(const nlohmann::json& j);
};

struct ClassifyOptions {
    Thresholds thresholds{};
    int order = 0;      // 0 = estimate from the training traces
    int order_cap = 64; // applied to the estimate only, never to an explicit order
    Mode mode = Mode::LcsWithVmm;
    bool ppm_exclusion = true;
    // Restrict probability-query contexts to LCS-matched predecessors instead
    // of all preceding symbols.
    bool common_context_only = false;
    std::uint32_t alphabet_size = 0; // 0 = infer from the training traces
};

// Holds a training set and lazily caches one model per held-out reference
// trace, so classifying many experiments against the same set reuses
// training work. Thread-safe for concurrent classify calls.
class Classifier {
public:
    Classifier(std::vector<EventSequence> training, ClassifyOptions options);

    ClassificationReport classify(const EventSequence& injected, Mode mode) const;
    ClassificationReport classify(const EventSequence& injected) const;

    // One reference selection and alignment shared across modes, so mode
    // differences isolate the model's effect.
    std::vector<ClassificationReport> classify_modes(const EventSequence& injected,
                                                     const std::vector<Mode>& modes) const;

    // Pre-trains the per-reference models so later classify calls only pay
    // for alignment and queries (used by timing runs).
    void warm_models() const;

    int order() const { return order_; }
    std::uint32_t alphabet_size() const { return alphabet_; }
    const std::vector<EventSequence>& training() const { return training_; }

private:
    const PpmModel& model_excluding(std::size_t reference_index) const;

    std::vector<EventSequence> training_;
    ClassifyOptions opts_;
    int order_ = 0;
    std::uint32_t alphabet_ = 1;
    mutable std::mutex cache_mu_;
    mutable std::map<std::size_t, PpmModel> model_cache_;
};

// One-shot form; builds a Classifier and runs a single classification.
ClassificationReport classify(const EventSequence& injected,
                              const std::vector<EventSequence>& training,
                              const ClassifyOptions& options);

} // namespace tracelens
