#include "tracelens/trace_model.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "tracelens/errors.hpp"
#include "tracelens/log.hpp"

namespace tracelens {

const char* layer_name(Layer layer) {
    return layer == Layer::Client ? "client" : "internal";
}

Layer layer_from_name(const std::string& name) {
    if (name == "client") return Layer::Client;
    if (name == "internal") return Layer::Internal;
    throw ParseError("unknown layer '" + name + "' (expected \"client\" or \"internal\")");
}

const char* trace_label_name(TraceLabel label) {
    switch (label) {
        case TraceLabel::FaultFree: return "fault_free";
        case TraceLabel::FaultInjected: return "fault_injected";
        case TraceLabel::Idle: return "idle";
    }
    return "?";
}

SymbolTable::SymbolTable(const SymbolTable& other) {
    std::lock_guard<std::mutex> lock(other.mu_);
    ids_ = other.ids_;
    pairs_ = other.pairs_;
}

SymbolTable& SymbolTable::operator=(const SymbolTable& other) {
    if (this == &other) return *this;
    std::scoped_lock lock(mu_, other.mu_);
    ids_ = other.ids_;
    pairs_ = other.pairs_;
    return *this;
}

Symbol SymbolTable::intern(const std::string& sender, const std::string& service) {
    std::lock_guard<std::mutex> lock(mu_);
    EventPair key{sender, service};
    auto it = ids_.find(key);
    if (it != ids_.end()) return it->second;
    const Symbol id = static_cast<Symbol>(pairs_.size());
    ids_.emplace(key, id);
    pairs_.push_back(std::move(key));
    return id;
}

std::optional<Symbol> SymbolTable::lookup(const std::string& sender, const std::string& service) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = ids_.find(EventPair{sender, service});
    if (it == ids_.end()) return std::nullopt;
    return it->second;
}

const EventPair& SymbolTable::pair_of(Symbol id) const {
    std::lock_guard<std::mutex> lock(mu_);
    if (id >= pairs_.size()) {
        throw DataError("symbol id " + std::to_string(id) + " is not registered (table size " +
                        std::to_string(pairs_.size()) + ")");
    }
    return pairs_[id];
}

std::size_t SymbolTable::size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return pairs_.size();
}

nlohmann::json SymbolTable::to_json() const {
    std::lock_guard<std::mutex> lock(mu_);
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : pairs_) arr.push_back({p.first, p.second});
    return arr;
}

SymbolTable SymbolTable::from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw ParseError("symbol table: expected a JSON array of [sender, service] pairs");
    SymbolTable table;
    for (const auto& entry : j) {
        if (!entry.is_array() || entry.size() != 2 || !entry[0].is_string() || !entry[1].is_string()) {
            throw ParseError("symbol table: each entry must be a [sender, service] string pair");
        }
        table.intern(entry[0].get<std::string>(), entry[1].get<std::string>());
    }
    return table;
}

namespace {

Event parse_span_record(const nlohmann::json& j, const std::string& where) {
    if (!j.is_object()) throw ParseError(where + ": record is not a JSON object");
    auto need = [&](const char* key) -> const nlohmann::json& {
        auto it = j.find(key);
        if (it == j.end()) throw ParseError(where + ": missing required key '" + key + "'");
        return *it;
    };
    Event ev;
    const auto& trace_id = need("trace_id");
    const auto& sender = need("sender");
    const auto& service = need("service");
    const auto& start = need("start_us");
    const auto& duration = need("duration_us");
    const auto& layer = need("layer");
    if (!trace_id.is_string()) throw ParseError(where + ": 'trace_id' must be a string");
    if (!sender.is_string()) throw ParseError(where + ": 'sender' must be a string");
    if (!service.is_string()) throw ParseError(where + ": 'service' must be a string");
    if (!start.is_number_integer()) throw ParseError(where + ": 'start_us' must be an integer");
    if (!duration.is_number_integer()) throw ParseError(where + ": 'duration_us' must be an integer");
    if (!layer.is_string()) throw ParseError(where + ": 'layer' must be a string");
    ev.trace_id = trace_id.get<std::string>();
    ev.sender = sender.get<std::string>();
    ev.service = service.get<std::string>();
    ev.start_us = start.get<std::int64_t>();
    ev.duration_us = duration.get<std::int64_t>();
    try {
        ev.layer = layer_from_name(layer.get<std::string>());
    } catch (const ParseError& e) {
        throw ParseError(where + ": " + e.what());
    }
    if (ev.sender.empty()) throw ParseError(where + ": 'sender' must be non-empty");
    if (ev.service.empty()) throw ParseError(where + ": 'service' must be non-empty");
    if (ev.start_us <= 0) throw ParseError(where + ": 'start_us' must be > 0");
    if (ev.duration_us < 0) throw ParseError(where + ": 'duration_us' must be >= 0");
    return ev;
}

} // namespace

EventSequence ingest_spans(const std::filesystem::path& file, TraceLabel label, SymbolTable& table) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot open span file: " + file.string());

    EventSequence seq;
    seq.label = label;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        const std::string where = file.string() + ":" + std::to_string(line_no);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(where + ": invalid JSON: " + e.what());
        }
        seq.events.push_back(parse_span_record(j, where));
    }
    if (seq.events.empty()) throw DataError("empty trace: " + file.string());

    std::stable_sort(seq.events.begin(), seq.events.end(), [](const Event& a, const Event& b) {
        if (a.start_us != b.start_us) return a.start_us < b.start_us;
        if (a.sender != b.sender) return a.sender < b.sender;
        return a.service < b.service;
    });

    seq.symbols.reserve(seq.events.size());
    for (const Event& ev : seq.events) seq.symbols.push_back(table.intern(ev.sender, ev.service));
    seq.trace_id = seq.events.front().trace_id;
    return seq;
}

std::vector<Symbol> encode(const std::vector<EventPair>& pairs, SymbolTable& table) {
    std::vector<Symbol> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) out.push_back(table.intern(p));
    return out;
}

TraceSet load_trace_set(std::vector<std::filesystem::path> training_files,
                        std::vector<std::filesystem::path> idle_files) {
    std::sort(training_files.begin(), training_files.end());
    std::sort(idle_files.begin(), idle_files.end());

    TraceSet set;
    for (const auto& f : training_files) {
        set.training.push_back(ingest_spans(f, TraceLabel::FaultFree, set.symbol_table));
    }
    for (const auto& f : idle_files) {
        set.idle.push_back(ingest_spans(f, TraceLabel::Idle, set.symbol_table));
    }
    return set;
}

void write_spans(const std::filesystem::path& file, const EventSequence& seq) {
    std::ofstream out(file);
    if (!out) throw DataError("cannot write span file: " + file.string());
    for (const Event& ev : seq.events) {
        nlohmann::json j{
            {"trace_id", ev.trace_id},
            {"sender", ev.sender},
            {"service", ev.service},
            {"start_us", ev.start_us},
            {"duration_us", ev.duration_us},
            {"layer", layer_name(ev.layer)},
        };
        out << j.dump() << "\n";
    }
}

} // namespace tracelens
