#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tracelens/trace_model.hpp"

namespace tracelens {

// One client request and the internal calls it triggers, in canonical order.
// commutable lists block-local event indices i (0 = the client call) where
// events i and i+1 may arrive in either order under benign non-determinism.
struct RequestBlock {
    EventPair client;
    std::vector<EventPair> internal_events;
    std::vector<int> commutable;

    std::size_t size() const { return 1 + internal_events.size(); }
};

// Workload-independent activity; events_per_trace is the Poisson mean of
// insertions over one workload execution.
struct BackgroundSource {
    EventPair pair;
    double events_per_trace = 0.0;
};

struct WorkloadTemplate {
    std::string name;
    std::vector<RequestBlock> blocks;
    std::vector<BackgroundSource> background;

    std::size_t canonical_size() const;
    std::size_t unique_pairs() const; // distinct workload + background pairs

    nlohmann::json to_json() const;
    static WorkloadTemplate from_json(const nlohmann::json& j);
};

void validate(const WorkloadTemplate& tmpl);

// Built-in templates: "depl" (broad deployment workload), "net" (network
// management), "sto" (storage management).
WorkloadTemplate preset(const std::string& name);
std::vector<std::string> preset_names();

// Template with the block list repeated; used for trace-length scaling runs.
WorkloadTemplate scale_template(const WorkloadTemplate& tmpl, int repeat);

enum class FaultType { ThrowException, WrongReturnValue, WrongParameterValue, Delay };
const char* fault_type_name(FaultType type);
FaultType fault_type_from_name(const std::string& name);

struct FaultSpec {
    FaultType type = FaultType::ThrowException;
    int block = 0;
    int event = 0; // block-local index of the call the fault hits (0 = client)
    bool manifests = true;

    // ThrowException: events removed after the injection point within the
    // block (-1 = the rest of the block), plus inserted error events.
    int truncation_length = -1;
    std::vector<EventPair> error_events; // empty = derived from the injection point

    // WrongReturnValue / WrongParameterValue: downstream events replaced by
    // wrong-variant events.
    int substitution_span = 1;

    // Omissions cascading into later blocks.
    bool propagate = false;
    int propagation_blocks = 1;

    // Delay: duration inflation and timestamp shift; reorder_window > 0
    // additionally rotates the following events (making the fault
    // trace-visible), 0 keeps the symbol sequence unchanged.
    std::int64_t delay_us = 5'000'000;
    int reorder_window = 0;

    nlohmann::json to_json() const;
    static FaultSpec from_json(const nlohmann::json& j);
};

// Exact edit record of a generated trace, in symbol-free pair form.
// spurious positions index the emitted trace; missing positions index the
// pre-fault (noise-only) trace, so removing the former and re-inserting the
// latter reconstructs the noise-only run.
struct GroundTruth {
    bool failure_manifested = false;
    std::optional<FaultType> fault_type;
    std::vector<std::int32_t> background_positions;
    std::vector<std::pair<std::int32_t, EventPair>> spurious;
    std::vector<std::pair<std::int32_t, EventPair>> missing;

    bool symbol_invariant() const { return spurious.empty() && missing.empty(); }

    nlohmann::json to_json() const;
    static GroundTruth from_json(const nlohmann::json& j);
};

struct GeneratedTrace {
    EventSequence trace;
    GroundTruth truth;
};

// Canonical expansion with each commutable adjacency independently swapped
// with probability `noise`, then background events at Poisson-sampled
// positions. Fully determined by (template, seed, noise).
GeneratedTrace generate_fault_free(const WorkloadTemplate& tmpl, std::uint64_t seed, double noise,
                                   SymbolTable& table, const std::string& trace_id = "fault-free");

// Background-only trace; `duration` scales the Poisson means (1.0 = one
// workload execution's worth of idle time).
EventSequence generate_idle(const WorkloadTemplate& tmpl, std::uint64_t seed, double duration,
                            SymbolTable& table, const std::string& trace_id = "idle");

// Noise-only generation (identical to generate_fault_free for the same seed
// and noise) with the fault's edits applied on top and recorded as ground
// truth.
GeneratedTrace inject_fault(const WorkloadTemplate& tmpl, const FaultSpec& fault,
                            std::uint64_t seed, double noise, SymbolTable& table,
                            const std::string& trace_id = "fault-injected");

struct FaultMix {
    double throw_exception = 0.30;
    double wrong_return = 0.25;
    double wrong_parameter = 0.25;
    double delay = 0.20;
    double non_manifesting = 0.33; // share of experiments whose fault has no effect
};

FaultSpec random_fault(const WorkloadTemplate& tmpl, std::mt19937_64& rng, const FaultMix& mix);

std::vector<EventSequence> make_fault_free_corpus(const WorkloadTemplate& tmpl, int count,
                                                  std::uint64_t seed, double noise,
                                                  SymbolTable& table);
std::vector<EventSequence> make_idle_corpus(const WorkloadTemplate& tmpl, int count,
                                            std::uint64_t seed, double duration,
                                            SymbolTable& table);
std::vector<GeneratedTrace> make_experiments(const WorkloadTemplate& tmpl, int count,
                                             std::uint64_t seed, double noise,
                                             const FaultMix& mix, SymbolTable& table);

// Undoes the recorded edits: drops ground-truth spurious positions and
// re-inserts ground-truth missing events. Audit/test helper.
std::vector<Symbol> reconstruct_pre_fault(const EventSequence& injected, const GroundTruth& truth,
                                          SymbolTable& table);

} // namespace tracelens
