#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "tracelens/trace_model.hpp"

namespace tracelens {

// Result of aligning two symbol sequences. matches holds the index pairs
// (into a, into b) of one longest common subsequence, strictly increasing
// in both coordinates; only_in_a / only_in_b are the unmatched indices.
//
// nlcs = |matches| / sqrt(|a|·|b|), or 0 when either input is empty (the
// standalone nlcs() entry point rejects empty inputs instead).
struct AlignmentResult {
    std::vector<std::pair<std::int32_t, std::int32_t>> matches;
    std::vector<std::int32_t> only_in_a;
    std::vector<std::int32_t> only_in_b;
    double nlcs = 0.0;
};

// Myers greedy O(ND) difference algorithm. The traversal is deterministic,
// so ties between equally long common subsequences always resolve to the
// same match set.
AlignmentResult lcs(std::span<const Symbol> a, std::span<const Symbol> b);

// Similarity in [0, 1]; 1 iff the sequences are identical. Throws DataError
// when either input is empty (the similarity is undefined there).
double nlcs(std::span<const Symbol> a, std::span<const Symbol> b);

struct ReferenceSelection {
    std::size_t index = 0;
    AlignmentResult alignment;
};

// Picks the training trace with maximal nlcs against the test trace; ties go
// to the lowest index. Throws ConfigError on an empty training set and
// DataError on empty sequences.
ReferenceSelection select_reference(const EventSequence& test,
                                    const std::vector<EventSequence>& training);

} // namespace tracelens
