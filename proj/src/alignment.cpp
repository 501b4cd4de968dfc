#include "tracelens/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tracelens/errors.hpp"

namespace tracelens {

namespace {

// Marks indices absent from the sorted match coordinates.
std::vector<std::int32_t> unmatched_indices(std::size_t len, const std::vector<std::int32_t>& matched) {
    std::vector<std::int32_t> out;
    out.reserve(len - matched.size());
    std::size_t m = 0;
    for (std::int32_t i = 0; i < static_cast<std::int32_t>(len); ++i) {
        if (m < matched.size() && matched[m] == i) {
            ++m;
        } else {
            out.push_back(i);
        }
    }
    return out;
}

} // namespace

AlignmentResult lcs(std::span<const Symbol> a, std::span<const Symbol> b) {
    const int n = static_cast<int>(a.size());
    const int m = static_cast<int>(b.size());
    AlignmentResult result;

    if (n == 0 || m == 0) {
        for (int i = 0; i < n; ++i) result.only_in_a.push_back(i);
        for (int j = 0; j < m; ++j) result.only_in_b.push_back(j);
        return result;
    }

    // Forward pass: v[offset + k] is the furthest x reached on diagonal
    // k = x - y after d edits. A snapshot per d is kept for the backtrack.
    const int max_d = n + m;
    const int offset = max_d;
    std::vector<int> v(2 * max_d + 1, 0);
    std::vector<std::vector<int>> trace;
    trace.reserve(16);
    int final_d = -1;

    for (int d = 0; d <= max_d && final_d < 0; ++d) {
        for (int k = -d; k <= d; k += 2) {
            int x;
            if (k == -d || (k != d && v[offset + k - 1] < v[offset + k + 1])) {
                x = v[offset + k + 1];
            } else {
                x = v[offset + k - 1] + 1;
            }
            int y = x - k;
            while (x < n && y < m && a[x] == b[y]) {
                ++x;
                ++y;
            }
            v[offset + k] = x;
            if (x >= n && y >= m) {
                final_d = d;
                break;
            }
        }
        trace.push_back(v);
    }

    // Backtrack from (n, m), reading off the diagonal runs (the matches).
    auto& matches = result.matches;
    int x = n;
    int y = m;
    for (int d = final_d; d > 0; --d) {
        const auto& pv = trace[static_cast<std::size_t>(d) - 1];
        const int k = x - y;
        int prev_k;
        if (k == -d || (k != d && pv[offset + k - 1] < pv[offset + k + 1])) {
            prev_k = k + 1;
        } else {
            prev_k = k - 1;
        }
        const int prev_x = pv[offset + prev_k];
        const int prev_y = prev_x - prev_k;
        const int mid_x = (prev_k == k + 1) ? prev_x : prev_x + 1;
        const int mid_y = mid_x - k;
        for (int t = x - 1, u = y - 1; t >= mid_x && u >= mid_y; --t, --u) {
            matches.emplace_back(t, u);
        }
        x = prev_x;
        y = prev_y;
    }
    for (int i = std::min(x, y) - 1; i >= 0; --i) matches.emplace_back(i, i);
    std::reverse(matches.begin(), matches.end());

    std::vector<std::int32_t> matched_a;
    std::vector<std::int32_t> matched_b;
    matched_a.reserve(matches.size());
    matched_b.reserve(matches.size());
    for (const auto& [i, j] : matches) {
        matched_a.push_back(i);
        matched_b.push_back(j);
    }
    result.only_in_a = unmatched_indices(a.size(), matched_a);
    result.only_in_b = unmatched_indices(b.size(), matched_b);
    result.nlcs = static_cast<double>(matches.size()) /
                  std::sqrt(static_cast<double>(n) * static_cast<double>(m));
    return result;
}

double nlcs(std::span<const Symbol> a, std::span<const Symbol> b) {
    if (a.empty() || b.empty()) {
        throw DataError("nlcs is undefined for empty sequences");
    }
    return lcs(a, b).nlcs;
}

ReferenceSelection select_reference(const EventSequence& test,
                                    const std::vector<EventSequence>& training) {
    if (training.empty()) throw ConfigError("select_reference: training set is empty");
    if (test.empty()) throw DataError("select_reference: test sequence is empty");

    ReferenceSelection best;
    bool have = false;
    for (std::size_t i = 0; i < training.size(); ++i) {
        if (training[i].empty()) {
            throw DataError("select_reference: training trace " + std::to_string(i) +
                            " is empty after background filtering");
        }
        AlignmentResult align = lcs(test.symbols, training[i].symbols);
        if (!have || align.nlcs > best.alignment.nlcs) {
            best.index = i;
            best.alignment = std::move(align);
            have = true;
        }
    }
    return best;
}

} // namespace tracelens
