#pragma once

#include <filesystem>
#include <set>
#include <vector>

#include "tracelens/trace_model.hpp"

namespace tracelens {

// Event types observed while the system was idle; occurrences of these
// symbols are dropped from every analyzed trace.
struct BackgroundDictionary {
    std::set<Symbol> symbols;

    bool contains(Symbol s) const { return symbols.count(s) > 0; }
    bool empty() const { return symbols.empty(); }
    std::size_t size() const { return symbols.size(); }
};

BackgroundDictionary build_background_dictionary(const std::vector<EventSequence>& idle);

// Subsequence projection: keeps exactly the events whose symbol is not in
// the dictionary, in original order. Warns when a non-empty input is
// filtered down to nothing.
EventSequence filter_background(const EventSequence& seq, const BackgroundDictionary& dict);

std::vector<EventSequence> filter_background(const std::vector<EventSequence>& seqs,
                                             const BackgroundDictionary& dict);

// Dictionary symbols that also occur in training traces. A non-empty result
// means workload events share a type with background activity and will be
// hidden from the analysis; callers should surface it.
std::vector<Symbol> dictionary_training_overlap(const BackgroundDictionary& dict,
                                                const std::vector<EventSequence>& training);

// Persisted as a JSON array of [sender, service] pairs.
void save_dictionary(const std::filesystem::path& file, const BackgroundDictionary& dict,
                     const SymbolTable& table);
BackgroundDictionary load_dictionary(const std::filesystem::path& file, SymbolTable& table);

} // namespace tracelens
