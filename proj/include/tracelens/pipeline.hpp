#pragma once

#include <filesystem>
#include <vector>

#include "tracelens/classifier.hpp"
#include "tracelens/preprocess.hpp"
#include "tracelens/trace_model.hpp"

namespace tracelens {

// Training data after ingestion and background filtering, with the model
// order resolved; the starting point for classification and the studies.
struct PreparedCorpus {
    SymbolTable table;
    BackgroundDictionary dictionary;
    std::vector<EventSequence> training; // background-filtered
    int order = 0;
    int estimated_order = 0; // before the cap / override
};

struct PrepareOptions {
    int order = 0;     // 0 = estimate; explicit values are used verbatim
    int order_cap = 64;
};

// Ingests training and idle span files, builds the background dictionary,
// filters, and resolves the model order.
PreparedCorpus prepare_corpus(const std::vector<std::filesystem::path>& training_files,
                              const std::vector<std::filesystem::path>& idle_files,
                              const PrepareOptions& options);

// The same preparation for in-memory sequences (generated corpora).
PreparedCorpus prepare_corpus(std::vector<EventSequence> training, std::vector<EventSequence> idle,
                              SymbolTable table, const PrepareOptions& options);

} // namespace tracelens
