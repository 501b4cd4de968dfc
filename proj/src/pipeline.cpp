#include "tracelens/pipeline.hpp"

#include <algorithm>

#include "tracelens/errors.hpp"
#include "tracelens/log.hpp"
#include "tracelens/vmm.hpp"

namespace tracelens {

PreparedCorpus prepare_corpus(std::vector<EventSequence> training, std::vector<EventSequence> idle,
                              SymbolTable table, const PrepareOptions& options) {
    if (training.empty()) throw DataError("no training traces");

    PreparedCorpus corpus;
    corpus.table = std::move(table);
    corpus.dictionary = build_background_dictionary(idle);
    if (idle.empty()) {
        log::warn("no idle traces given; proceeding with an empty background dictionary");
    }

    const auto overlap = dictionary_training_overlap(corpus.dictionary, training);
    if (!overlap.empty()) {
        std::string names;
        for (Symbol s : overlap) {
            const EventPair& p = corpus.table.pair_of(s);
            if (!names.empty()) names += ", ";
            names += p.first + "->" + p.second;
        }
        log::warn("background dictionary overlaps workload events; these types are ignored "
                  "everywhere: " + names);
    }

    corpus.training = filter_background(training, corpus.dictionary);
    for (std::size_t i = 0; i < corpus.training.size(); ++i) {
        if (corpus.training[i].empty()) {
            throw DataError("training trace '" + training[i].trace_id +
                            "' is empty after background filtering");
        }
    }

    if (options.order > 0) {
        corpus.order = options.order;
        corpus.estimated_order = options.order;
    } else {
        corpus.estimated_order = estimate_order(corpus.training).order;
        corpus.order = std::min(corpus.estimated_order, options.order_cap);
        if (corpus.order < corpus.estimated_order) {
            log::info("model order capped at " + std::to_string(corpus.order) + " (estimate " +
                      std::to_string(corpus.estimated_order) + ")");
        }
    }
    return corpus;
}

PreparedCorpus prepare_corpus(const std::vector<std::filesystem::path>& training_files,
                              const std::vector<std::filesystem::path>& idle_files,
                              const PrepareOptions& options) {
    TraceSet set = load_trace_set(training_files, idle_files);
    return prepare_corpus(std::move(set.training), std::move(set.idle), std::move(set.symbol_table),
                          options);
}

} // namespace tracelens
