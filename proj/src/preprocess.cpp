#include "tracelens/preprocess.hpp"

#include <fstream>

#include "tracelens/errors.hpp"
#include "tracelens/log.hpp"

namespace tracelens {

BackgroundDictionary build_background_dictionary(const std::vector<EventSequence>& idle) {
    BackgroundDictionary dict;
    for (const auto& seq : idle) dict.symbols.insert(seq.symbols.begin(), seq.symbols.end());
    return dict;
}

EventSequence filter_background(const EventSequence& seq, const BackgroundDictionary& dict) {
    if (dict.empty()) return seq;
    EventSequence out;
    out.label = seq.label;
    out.trace_id = seq.trace_id;
    for (std::size_t i = 0; i < seq.symbols.size(); ++i) {
        if (dict.contains(seq.symbols[i])) continue;
        out.symbols.push_back(seq.symbols[i]);
        out.events.push_back(seq.events[i]);
    }
    if (out.empty() && !seq.empty()) {
        log::warn("trace '" + seq.trace_id + "': every event is in the background dictionary; " +
                  "nothing left to analyze");
    }
    return out;
}

std::vector<EventSequence> filter_background(const std::vector<EventSequence>& seqs,
                                             const BackgroundDictionary& dict) {
    std::vector<EventSequence> out;
    out.reserve(seqs.size());
    for (const auto& s : seqs) out.push_back(filter_background(s, dict));
    return out;
}

std::vector<Symbol> dictionary_training_overlap(const BackgroundDictionary& dict,
                                                const std::vector<EventSequence>& training) {
    std::set<Symbol> seen;
    for (const auto& seq : training) seen.insert(seq.symbols.begin(), seq.symbols.end());
    std::vector<Symbol> overlap;
    for (Symbol s : dict.symbols) {
        if (seen.count(s)) overlap.push_back(s);
    }
    return overlap;
}

void save_dictionary(const std::filesystem::path& file, const BackgroundDictionary& dict,
                     const SymbolTable& table) {
    nlohmann::json arr = nlohmann::json::array();
    for (Symbol s : dict.symbols) {
        const EventPair& p = table.pair_of(s);
        arr.push_back({p.first, p.second});
    }
    std::ofstream out(file);
    if (!out) throw DataError("cannot write dictionary file: " + file.string());
    out << arr.dump(2) << "\n";
}

BackgroundDictionary load_dictionary(const std::filesystem::path& file, SymbolTable& table) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot open dictionary file: " + file.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(file.string() + ": invalid JSON: " + e.what());
    }
    if (!j.is_array()) throw ParseError(file.string() + ": expected a JSON array of [sender, service] pairs");
    BackgroundDictionary dict;
    for (const auto& entry : j) {
        if (!entry.is_array() || entry.size() != 2 || !entry[0].is_string() || !entry[1].is_string()) {
            throw ParseError(file.string() + ": each entry must be a [sender, service] string pair");
        }
        dict.symbols.insert(table.intern(entry[0].get<std::string>(), entry[1].get<std::string>()));
    }
    return dict;
}

} // namespace tracelens
