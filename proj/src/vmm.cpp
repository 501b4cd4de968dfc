#include "tracelens/vmm.hpp"

#include <algorithm>
#include <cmath>

#include "tracelens/errors.hpp"

namespace tracelens {

OrderEstimate estimate_order(const std::vector<EventSequence>& traces) {
    OrderEstimate est;
    for (const auto& seq : traces) {
        std::vector<std::size_t> client_positions;
        for (std::size_t i = 0; i < seq.events.size(); ++i) {
            if (seq.events[i].layer == Layer::Client) client_positions.push_back(i);
        }
        for (std::size_t c = 0; c < client_positions.size(); ++c) {
            const std::size_t begin = client_positions[c];
            const std::size_t end =
                (c + 1 < client_positions.size()) ? client_positions[c + 1] : seq.size();
            est.request_lengths.push_back(static_cast<int>(end - begin));
        }
    }
    if (est.request_lengths.empty()) {
        throw DataError("estimate_order: no Client-layer events in any trace; "
                        "supply the model order explicitly");
    }
    est.order = *std::max_element(est.request_lengths.begin(), est.request_lengths.end());
    return est;
}

namespace {

void bump(std::vector<std::pair<Symbol, std::uint64_t>>& counts, Symbol symbol) {
    auto it = std::lower_bound(counts.begin(), counts.end(), symbol,
                               [](const auto& entry, Symbol s) { return entry.first < s; });
    if (it != counts.end() && it->first == symbol) {
        ++it->second;
    } else {
        counts.insert(it, {symbol, 1});
    }
}

} // namespace

std::uint32_t PpmModel::child_or_create(std::uint32_t node, Symbol older) {
    auto& children = nodes_[node].children;
    auto it = std::lower_bound(children.begin(), children.end(), older,
                               [](const auto& entry, Symbol s) { return entry.first < s; });
    if (it != children.end() && it->first == older) return it->second;
    const std::uint32_t index = static_cast<std::uint32_t>(nodes_.size());
    const std::size_t offset = static_cast<std::size_t>(it - children.begin());
    nodes_.emplace_back(); // may move nodes_[node]; use the saved offset
    nodes_[node].children.insert(nodes_[node].children.begin() + static_cast<std::ptrdiff_t>(offset),
                                 {older, index});
    return index;
}

const PpmModel::Node* PpmModel::child_of(const Node& node, Symbol older) const {
    auto it = std::lower_bound(node.children.begin(), node.children.end(), older,
                               [](const auto& entry, Symbol s) { return entry.first < s; });
    if (it != node.children.end() && it->first == older) return &nodes_[it->second];
    return nullptr;
}

PpmModel PpmModel::train(const std::vector<std::vector<Symbol>>& sequences, int max_order,
                         std::uint32_t alphabet_size, bool exclusion) {
    if (max_order < 0) throw ConfigError("PpmModel: max_order must be >= 0");
    if (alphabet_size < 1) throw ConfigError("PpmModel: alphabet_size must be >= 1");
    if (sequences.empty()) throw ConfigError("PpmModel: no training sequences");

    PpmModel model;
    model.max_order_ = max_order;
    model.alphabet_ = alphabet_size;
    model.exclusion_ = exclusion;
    model.trained_ = static_cast<int>(sequences.size());
    model.nodes_.emplace_back();

    for (const auto& seq : sequences) {
        if (seq.empty()) throw ConfigError("PpmModel: training sequence is empty");
        for (std::size_t i = 0; i < seq.size(); ++i) {
            const Symbol next = seq[i];
            if (next >= alphabet_size) {
                throw DataError("PpmModel: symbol " + std::to_string(next) +
                                " exceeds alphabet size " + std::to_string(alphabet_size));
            }
            std::uint32_t node = 0;
            bump(model.nodes_[0].counts, next);
            ++model.nodes_[0].total;
            const std::size_t depth = std::min<std::size_t>(i, static_cast<std::size_t>(max_order));
            for (std::size_t k = 1; k <= depth; ++k) {
                node = model.child_or_create(node, seq[i - k]);
                bump(model.nodes_[node].counts, next);
                ++model.nodes_[node].total;
            }
        }
    }
    return model;
}

std::vector<const PpmModel::Node*> PpmModel::context_path(std::span<const Symbol> context) const {
    std::vector<const Node*> path;
    path.push_back(&nodes_[0]);
    const Node* cur = &nodes_[0];
    const std::size_t depth = std::min<std::size_t>(context.size(), static_cast<std::size_t>(max_order_));
    for (std::size_t k = 1; k <= depth; ++k) {
        const Node* child = child_of(*cur, context[context.size() - k]);
        if (child == nullptr) break;
        cur = child;
        path.push_back(cur);
    }
    return path;
}

// Escape recursion with exclusion. Walking from the longest stored context
// down: a level whose (non-excluded) successors include the queried symbol
// resolves the query; otherwise the level contributes escape mass
// distinct/(total+distinct) and its successors are excluded below. A level
// whose successors cover the whole remaining alphabet has nothing to escape
// to, so its successors take all the mass. Unseen contexts pass through.
double PpmModel::predict_excluding(const std::vector<const Node*>& path, Symbol symbol) const {
    std::vector<char> excluded(alphabet_, 0);
    std::uint32_t n_excluded = 0;
    double escape_acc = 1.0;

    for (std::size_t k = path.size(); k-- > 0;) {
        const Node* node = path[k];
        std::uint64_t total = 0;
        std::uint32_t distinct = 0;
        std::uint64_t symbol_count = 0;
        for (const auto& [s, c] : node->counts) {
            if (excluded[s]) continue;
            total += c;
            ++distinct;
            if (s == symbol) symbol_count = c;
        }
        if (distinct == 0) continue; // everything at this level already excluded
        if (n_excluded + distinct >= alphabet_) {
            // No eligible unseen symbol remains; the queried symbol must be
            // among the successors here.
            return escape_acc * static_cast<double>(symbol_count) / static_cast<double>(total);
        }
        const double denom = static_cast<double>(total + distinct);
        if (symbol_count > 0) {
            return escape_acc * static_cast<double>(symbol_count) / denom;
        }
        escape_acc *= static_cast<double>(distinct) / denom;
        for (const auto& [s, c] : node->counts) {
            if (!excluded[s]) {
                excluded[s] = 1;
                ++n_excluded;
            }
        }
    }
    return escape_acc / static_cast<double>(alphabet_ - n_excluded);
}

// Variant without exclusion: blend levels bottom-up, spreading each level's
// escape mass over the symbols unseen at that level, proportionally to the
// lower-order distribution (which keeps the result normalized).
std::vector<double> PpmModel::distribution_renormalized(const std::vector<const Node*>& path) const {
    std::vector<double> dist(alphabet_, 1.0 / static_cast<double>(alphabet_));
    std::vector<char> seen(alphabet_, 0);

    for (const Node* node : path) {
        const std::uint64_t total = node->total;
        const std::uint32_t distinct = static_cast<std::uint32_t>(node->counts.size());
        if (distinct == 0) continue;

        std::fill(seen.begin(), seen.end(), 0);
        for (const auto& [s, c] : node->counts) seen[s] = 1;

        if (distinct >= alphabet_) {
            // Every symbol seen after this context: plain frequency estimate.
            for (const auto& [s, c] : node->counts) {
                dist[s] = static_cast<double>(c) / static_cast<double>(total);
            }
            continue;
        }

        double unseen_mass = 0.0;
        for (Symbol s = 0; s < alphabet_; ++s) {
            if (!seen[s]) unseen_mass += dist[s];
        }
        const double denom = static_cast<double>(total + distinct);
        const double escape = static_cast<double>(distinct) / denom;
        for (Symbol s = 0; s < alphabet_; ++s) {
            if (!seen[s]) dist[s] = escape * dist[s] / unseen_mass;
        }
        for (const auto& [s, c] : node->counts) {
            dist[s] = static_cast<double>(c) / denom;
        }
    }
    return dist;
}

double PpmModel::predict(std::span<const Symbol> context, Symbol symbol) const {
    if (symbol >= alphabet_) {
        throw DataError("PpmModel: query symbol " + std::to_string(symbol) +
                        " exceeds alphabet size " + std::to_string(alphabet_));
    }
    const auto path = context_path(context);
    if (exclusion_) return predict_excluding(path, symbol);
    return distribution_renormalized(path)[symbol];
}

std::vector<double> PpmModel::predict_distribution(std::span<const Symbol> context) const {
    const auto path = context_path(context);
    if (!exclusion_) return distribution_renormalized(path);
    std::vector<double> dist(alphabet_, 0.0);
    for (Symbol s = 0; s < alphabet_; ++s) dist[s] = predict_excluding(path, s);
    return dist;
}

double PpmModel::log_loss(std::span<const Symbol> test) const {
    if (test.empty()) throw DataError("log_loss: test sequence is empty");
    double total = 0.0;
    for (std::size_t i = 0; i < test.size(); ++i) {
        const double p = predict(test.subspan(0, i), test[i]);
        total -= std::log2(p);
    }
    return total / static_cast<double>(test.size());
}

std::uint64_t PpmModel::context_count() const {
    std::uint64_t n = 0;
    for (const Node& node : nodes_) {
        if (!node.counts.empty()) ++n;
    }
    return n;
}

nlohmann::json PpmModel::to_json(const SymbolTable* table) const {
    nlohmann::json contexts = nlohmann::json::array();
    std::vector<Symbol> reversed_ctx; // symbols from newest to oldest along the trie path
    auto walk = [&](auto&& self, const Node& node) -> void {
        if (!node.counts.empty()) {
            nlohmann::json entry;
            // Context in reading order (oldest first).
            nlohmann::json ctx = nlohmann::json::array();
            for (auto it = reversed_ctx.rbegin(); it != reversed_ctx.rend(); ++it) ctx.push_back(*it);
            entry["context"] = std::move(ctx);
            nlohmann::json counts = nlohmann::json::array();
            for (const auto& [s, c] : node.counts) counts.push_back({s, c});
            entry["counts"] = std::move(counts);
            contexts.push_back(std::move(entry));
        }
        for (const auto& [s, child] : node.children) {
            reversed_ctx.push_back(s);
            self(self, nodes_[child]);
            reversed_ctx.pop_back();
        }
    };
    if (!nodes_.empty()) walk(walk, nodes_[0]);

    nlohmann::json j{
        {"format", "tracelens-ppm"},
        {"version", 1},
        {"max_order", max_order_},
        {"alphabet_size", alphabet_},
        {"exclusion", exclusion_},
        {"trained_sequences", trained_},
        {"contexts", std::move(contexts)},
    };
    if (table != nullptr) j["symbols"] = table->to_json();
    return j;
}

PpmModel PpmModel::from_json(const nlohmann::json& j) {
    if (!j.is_object() || j.value("format", "") != "tracelens-ppm") {
        throw ParseError("model file: missing tracelens-ppm format marker");
    }
    if (j.value("version", 0) != 1) {
        throw ParseError("model file: unsupported version");
    }
    PpmModel model;
    model.max_order_ = j.at("max_order").get<int>();
    model.alphabet_ = j.at("alphabet_size").get<std::uint32_t>();
    model.exclusion_ = j.at("exclusion").get<bool>();
    model.trained_ = j.at("trained_sequences").get<int>();
    model.nodes_.emplace_back();
    for (const auto& entry : j.at("contexts")) {
        const auto& ctx = entry.at("context");
        std::uint32_t node = 0;
        // Trie paths are keyed newest-first; the stored context is oldest-first.
        for (auto it = ctx.rbegin(); it != ctx.rend(); ++it) {
            node = model.child_or_create(node, it->get<Symbol>());
        }
        for (const auto& sc : entry.at("counts")) {
            const Symbol s = sc.at(0).get<Symbol>();
            const std::uint64_t c = sc.at(1).get<std::uint64_t>();
            auto& counts = model.nodes_[node].counts;
            auto it = std::lower_bound(counts.begin(), counts.end(), s,
                                       [](const auto& entry_, Symbol sym) { return entry_.first < sym; });
            counts.insert(it, {s, c});
            model.nodes_[node].total += c;
        }
    }
    return model;
}

} // namespace tracelens
