#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace tracelens {

// Compact id for a distinct <sender, service> pair. The set of assigned ids
// forms the alphabet the sequence models operate on.
using Symbol = std::uint32_t;

using EventPair = std::pair<std::string, std::string>;

enum class Layer { Client, Internal };
const char* layer_name(Layer layer);
Layer layer_from_name(const std::string& name);

enum class TraceLabel { FaultFree, FaultInjected, Idle };
const char* trace_label_name(TraceLabel label);

// One communication-API call: who sent it, which service was requested,
// and when.
struct Event {
    std::string sender;
    std::string service;
    std::int64_t start_us = 0;    // collector timestamp, microseconds since epoch
    std::int64_t duration_us = 0;
    Layer layer = Layer::Internal;
    std::string trace_id;

    EventPair pair() const { return {sender, service}; }
};

// Bijection between <sender, service> pairs and dense symbol ids, assigned
// in first-seen order. Registration is serialized internally so distinct
// traces may be ingested concurrently.
class SymbolTable {
public:
    SymbolTable() = default;
    // Copyable; declaring the copy operations suppresses moves, so moved-from
    // tables are never observed (the mutex makes member moves unsafe anyway).
    SymbolTable(const SymbolTable& other);
    SymbolTable& operator=(const SymbolTable& other);

    Symbol intern(const std::string& sender, const std::string& service);
    Symbol intern(const EventPair& pair) { return intern(pair.first, pair.second); }
    std::optional<Symbol> lookup(const std::string& sender, const std::string& service) const;
    const EventPair& pair_of(Symbol id) const; // throws DataError on unknown id
    std::size_t size() const;

    nlohmann::json to_json() const;
    static SymbolTable from_json(const nlohmann::json& j);

private:
    mutable std::mutex mu_;
    std::map<EventPair, Symbol> ids_;
    std::vector<EventPair> pairs_;
};

// An ordered trace rendered as a symbol string, with back-references to the
// source events. symbols and events are parallel arrays.
struct EventSequence {
    std::vector<Symbol> symbols;
    std::vector<Event> events;
    TraceLabel label = TraceLabel::FaultFree;
    std::string trace_id;

    std::size_t size() const { return symbols.size(); }
    bool empty() const { return symbols.empty(); }
};

struct TraceSet {
    std::vector<EventSequence> training;
    std::vector<EventSequence> idle;
    SymbolTable symbol_table;
};

// Reads one JSON-Lines span file into an ordered, symbolized sequence.
// Events are sorted by (start_us, sender, service, file order); new pairs
// are registered in the shared table in that order.
EventSequence ingest_spans(const std::filesystem::path& file, TraceLabel label, SymbolTable& table);

// Encodes a pair list against the table, registering unknown pairs.
std::vector<Symbol> encode(const std::vector<EventPair>& pairs, SymbolTable& table);

// Ingests training then idle files. File lists are sorted by filename first
// so that symbol registration order is reproducible regardless of how the
// caller discovered the files.
TraceSet load_trace_set(std::vector<std::filesystem::path> training_files,
                        std::vector<std::filesystem::path> idle_files);

void write_spans(const std::filesystem::path& file, const EventSequence& seq);

} // namespace tracelens
