#include <doctest.h>

#include <filesystem>

#include "tracelens/errors.hpp"
#include "tracelens/preprocess.hpp"

using namespace tracelens;

namespace {

EventSequence seq_of(const std::vector<Symbol>& symbols, SymbolTable& table) {
    EventSequence seq;
    seq.trace_id = "test";
    for (Symbol s : symbols) {
        while (table.size() <= s) {
            table.intern("sender" + std::to_string(table.size()),
                         "service" + std::to_string(table.size()));
        }
        Event ev;
        const auto& p = table.pair_of(s);
        ev.sender = p.first;
        ev.service = p.second;
        ev.start_us = static_cast<std::int64_t>(seq.size() + 1) * 1000;
        ev.trace_id = "test";
        seq.symbols.push_back(s);
        seq.events.push_back(ev);
    }
    return seq;
}

} // namespace

TEST_CASE("dictionary is the union of idle symbols") {
    SymbolTable table;
    auto i1 = seq_of({3, 7}, table);
    auto i2 = seq_of({7, 9}, table);
    auto dict = build_background_dictionary({i1, i2});
    CHECK(dict.symbols == std::set<Symbol>{3, 7, 9});
    CHECK(build_background_dictionary({}).empty());
}

TEST_CASE("filter keeps exactly the non-dictionary events in order") {
    SymbolTable table;
    auto seq = seq_of({1, 3, 2, 3}, table);
    BackgroundDictionary dict;
    dict.symbols = {3};
    auto out = filter_background(seq, dict);
    CHECK(out.symbols == std::vector<Symbol>{1, 2});
    REQUIRE(out.events.size() == 2);
    CHECK(out.events[0].start_us < out.events[1].start_us);
}

TEST_CASE("empty dictionary is the identity") {
    SymbolTable table;
    auto seq = seq_of({5, 1, 5}, table);
    auto out = filter_background(seq, BackgroundDictionary{});
    CHECK(out.symbols == seq.symbols);
}

TEST_CASE("a fully-background sequence filters to empty") {
    SymbolTable table;
    auto seq = seq_of({2, 2, 4}, table);
    BackgroundDictionary dict;
    dict.symbols = {2, 4};
    CHECK(filter_background(seq, dict).empty());
}

TEST_CASE("filtering is idempotent and monotone in the dictionary") {
    SymbolTable table;
    auto seq = seq_of({0, 1, 2, 3, 4, 2, 1, 0}, table);
    BackgroundDictionary small;
    small.symbols = {1};
    BackgroundDictionary large;
    large.symbols = {1, 3};

    auto once = filter_background(seq, small);
    auto twice = filter_background(once, small);
    CHECK(once.symbols == twice.symbols);
    CHECK(filter_background(seq, large).size() <= once.size());
}

TEST_CASE("filter output is a subsequence projection") {
    SymbolTable table;
    auto seq = seq_of({4, 0, 4, 1, 4, 2}, table);
    BackgroundDictionary dict;
    dict.symbols = {4};
    auto out = filter_background(seq, dict);
    // every kept event appears in the original, in order
    std::size_t pos = 0;
    for (Symbol s : out.symbols) {
        while (pos < seq.symbols.size() && seq.symbols[pos] != s) ++pos;
        REQUIRE(pos < seq.symbols.size());
        ++pos;
    }
}

TEST_CASE("overlap reporting lists dictionary symbols present in training") {
    SymbolTable table;
    auto train = seq_of({0, 1, 2}, table);
    BackgroundDictionary dict;
    dict.symbols = {1, 9};
    auto overlap = dictionary_training_overlap(dict, {train});
    CHECK(overlap == std::vector<Symbol>{1});
}

TEST_CASE("dictionary persists as sender/service pairs") {
    SymbolTable table;
    auto idle = seq_of({2, 5}, table);
    auto dict = build_background_dictionary({idle});
    auto file = std::filesystem::temp_directory_path() / "tracelens_dict_test.json";
    save_dictionary(file, dict, table);

    SymbolTable other;
    auto loaded = load_dictionary(file, other);
    CHECK(loaded.size() == dict.size());
    for (Symbol s : loaded.symbols) {
        const auto& pair = other.pair_of(s);
        CHECK(table.lookup(pair.first, pair.second).has_value());
    }
    CHECK_THROWS_AS(load_dictionary("/nonexistent/dict.json", other), DataError);
}
