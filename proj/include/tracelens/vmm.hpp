#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include <json.hpp>

#include "tracelens/trace_model.hpp"

namespace tracelens {

// Result of measuring how many events a single client request triggers.
// order is the maximum request length observed; it bounds the context
// length the sequence model conditions on.
struct OrderEstimate {
    int order = 0;
    std::vector<int> request_lengths;
};

// Counts events from each Client-layer event up to (excluding) the next
// Client-layer one. Throws DataError when no trace contains a Client event;
// callers must then supply the order explicitly.
OrderEstimate estimate_order(const std::vector<EventSequence>& traces);

// Prediction by Partial Matching, escape method C: a variable-order Markov
// model blending context counts of length 0..max_order via escape
// probabilities proportional to the number of distinct successors.
//
// With exclusion enabled (the default), symbols already seen at a longer
// context are removed from consideration at shorter ones. With exclusion
// disabled, the escape mass at each level is renormalized over the symbols
// unseen at that level. Both variants yield a proper distribution:
// sum_sigma predict(ctx, sigma) == 1, and every probability is > 0.
class PpmModel {
public:
    // Counts, for every position i of every sequence and every context
    // length k in [0, min(i, max_order)], the successor occurrence
    // (context of length k ending at i-1) -> x_i. The model is immutable
    // afterwards. Throws ConfigError on empty input or negative order and
    // DataError on out-of-alphabet symbols.
    static PpmModel train(const std::vector<std::vector<Symbol>>& sequences, int max_order,
                          std::uint32_t alphabet_size, bool exclusion = true);

    // P(symbol | context); the context is truncated to its last max_order
    // symbols. Result in (0, 1].
    double predict(std::span<const Symbol> context, Symbol symbol) const;

    // Full conditional distribution over the alphabet for one context.
    std::vector<double> predict_distribution(std::span<const Symbol> context) const;

    // Average per-symbol loss in bits: -(1/T) * sum_i log2 P(x_i | x_1..x_{i-1}).
    // Finite and >= 0; throws DataError on an empty test sequence.
    double log_loss(std::span<const Symbol> test) const;

    int max_order() const { return max_order_; }
    std::uint32_t alphabet_size() const { return alphabet_; }
    bool exclusion_enabled() const { return exclusion_; }
    int trained_sequences() const { return trained_; }
    std::uint64_t context_count() const; // distinct contexts with at least one successor

    // Versioned JSON with deterministic context ordering; training twice on
    // the same input serializes identically.
    nlohmann::json to_json(const SymbolTable* table = nullptr) const;
    static PpmModel from_json(const nlohmann::json& j);

    PpmModel(PpmModel&&) = default;
    PpmModel& operator=(PpmModel&&) = default;

private:
    // Context-trie node; nodes live in one arena and hold sorted flat vectors
    // (trie fan-out is small, and flat storage keeps training cache-friendly).
    struct Node {
        std::vector<std::pair<Symbol, std::uint64_t>> counts;   // successor -> occurrences
        std::vector<std::pair<Symbol, std::uint32_t>> children; // next-older symbol -> arena index
        std::uint64_t total = 0;
    };

    PpmModel() = default;

    std::uint32_t child_or_create(std::uint32_t node, Symbol older);
    const Node* child_of(const Node& node, Symbol older) const;

    // Nodes along the reversed context path: path[k] covers the suffix of
    // length k. Stops at the deepest stored context.
    std::vector<const Node*> context_path(std::span<const Symbol> context) const;
    double predict_excluding(const std::vector<const Node*>& path, Symbol symbol) const;
    std::vector<double> distribution_renormalized(const std::vector<const Node*>& path) const;

    int max_order_ = 0;
    std::uint32_t alphabet_ = 1;
    bool exclusion_ = true;
    int trained_ = 0;
    std::vector<Node> nodes_; // nodes_[0] is the empty context
};

} // namespace tracelens
