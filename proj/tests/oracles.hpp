#pragma once

// Independent reference implementations the unit and acceptance suites check
// the production code against. Deliberately brute force and structured
// differently from the library: the enumeration oracle walks subsequence
// bitmasks, the DP oracle fills the classic quadratic table, and the
// prediction oracle recounts contexts by scanning the raw training sequences
// on every call.

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "tracelens/trace_model.hpp"

namespace tracelens::oracle {

// Longest common subsequence length by enumerating every subsequence of the
// shorter input. Exponential; inputs must stay small.
inline int lcs_enumeration(const std::vector<Symbol>& a, const std::vector<Symbol>& b) {
    const auto& small = a.size() <= b.size() ? a : b;
    const auto& large = a.size() <= b.size() ? b : a;
    const std::size_t n = small.size();
    int best = 0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        std::vector<Symbol> candidate;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (std::uint64_t{1} << i)) candidate.push_back(small[i]);
        }
        // subsequence check against the larger string
        std::size_t pos = 0;
        bool ok = true;
        for (Symbol s : candidate) {
            while (pos < large.size() && large[pos] != s) ++pos;
            if (pos == large.size()) {
                ok = false;
                break;
            }
            ++pos;
        }
        if (ok) best = std::max(best, static_cast<int>(candidate.size()));
    }
    return best;
}

// Quadratic dynamic-programming LCS length.
inline int lcs_dp(const std::vector<Symbol>& a, const std::vector<Symbol>& b) {
    std::vector<std::vector<int>> dp(a.size() + 1, std::vector<int>(b.size() + 1, 0));
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            dp[i][j] = a[i - 1] == b[j - 1] ? dp[i - 1][j - 1] + 1
                                            : std::max(dp[i - 1][j], dp[i][j - 1]);
        }
    }
    return dp[a.size()][b.size()];
}

// Escape-method-C prediction computed straight from the training sequences:
// occurrence counts come from scanning, and the recursion follows the
// written-out rules rather than a trie walk.
inline double ppm_predict(const std::vector<std::vector<Symbol>>& training, int max_order,
                          std::uint32_t alphabet, bool exclusion,
                          std::vector<Symbol> context, Symbol symbol) {
    if (context.size() > static_cast<std::size_t>(max_order)) {
        context.erase(context.begin(),
                      context.end() - static_cast<std::ptrdiff_t>(max_order));
    }

    auto successor_counts = [&](const std::vector<Symbol>& ctx) {
        std::map<Symbol, std::uint64_t> counts;
        for (const auto& seq : training) {
            for (std::size_t i = 0; i + ctx.size() < seq.size(); ++i) {
                bool match = true;
                for (std::size_t c = 0; c < ctx.size(); ++c) {
                    if (seq[i + c] != ctx[c]) {
                        match = false;
                        break;
                    }
                }
                if (match) ++counts[seq[i + ctx.size()]];
            }
        }
        return counts;
    };

    if (exclusion) {
        std::set<Symbol> excluded;
        double escape_acc = 1.0;
        for (std::size_t len = context.size();; --len) {
            std::vector<Symbol> ctx(context.end() - static_cast<std::ptrdiff_t>(len), context.end());
            auto counts = successor_counts(ctx);
            std::uint64_t total = 0;
            std::uint64_t sym_count = 0;
            std::uint64_t distinct = 0;
            for (const auto& [s, c] : counts) {
                if (excluded.count(s)) continue;
                total += c;
                ++distinct;
                if (s == symbol) sym_count = c;
            }
            if (distinct > 0) {
                if (excluded.size() + distinct >= alphabet) {
                    return escape_acc * static_cast<double>(sym_count) / static_cast<double>(total);
                }
                if (sym_count > 0) {
                    return escape_acc * static_cast<double>(sym_count) /
                           static_cast<double>(total + distinct);
                }
                escape_acc *= static_cast<double>(distinct) / static_cast<double>(total + distinct);
                for (const auto& [s, c] : counts) excluded.insert(s);
            }
            if (len == 0) break;
        }
        return escape_acc / static_cast<double>(alphabet - excluded.size());
    }

    // No exclusion: compute the distribution level by level from order 0 up,
    // renormalizing escape mass over the unseen symbols.
    std::vector<double> dist(alphabet, 1.0 / alphabet);
    for (std::size_t len = 0; len <= context.size(); ++len) {
        std::vector<Symbol> ctx(context.end() - static_cast<std::ptrdiff_t>(len), context.end());
        auto counts = successor_counts(ctx);
        if (counts.empty()) continue;
        std::uint64_t total = 0;
        for (const auto& [s, c] : counts) total += c;
        const std::uint64_t distinct = counts.size();
        if (distinct >= alphabet) {
            for (const auto& [s, c] : counts) dist[s] = static_cast<double>(c) / total;
            continue;
        }
        double unseen_mass = 0.0;
        for (Symbol s = 0; s < alphabet; ++s) {
            if (!counts.count(s)) unseen_mass += dist[s];
        }
        const double escape = static_cast<double>(distinct) / static_cast<double>(total + distinct);
        for (Symbol s = 0; s < alphabet; ++s) {
            if (!counts.count(s)) dist[s] = escape * dist[s] / unseen_mass;
        }
        for (const auto& [s, c] : counts) {
            dist[s] = static_cast<double>(c) / static_cast<double>(total + distinct);
        }
    }
    return dist[symbol];
}

} // namespace tracelens::oracle
