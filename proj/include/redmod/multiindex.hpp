#pragma once

#include <numeric>
#include <string>
#include <vector>

#include "redmod/errors.hpp"

namespace redmod {

// Derivative multi-index over the n independent variables. Entry k counts
// derivatives along coordinate slot k+1 (slots are 1-based elsewhere).
struct MultiIndex {
    std::vector<int> e;

    MultiIndex() = default;
    explicit MultiIndex(std::vector<int> entries) : e(std::move(entries)) {
        for (int v : e)
            if (v < 0) throw error("InvalidMultiIndex", "negative entry");
    }
    static MultiIndex zero(int n) { return MultiIndex(std::vector<int>(n, 0)); }
    static MultiIndex unit(int n, int slot) {
        MultiIndex a = zero(n);
        a.e[slot - 1] = 1;
        return a;
    }

    int size() const { return static_cast<int>(e.size()); }
    int order() const { return std::accumulate(e.begin(), e.end(), 0); }
    int at(int slot) const { return e[slot - 1]; }  // 1-based

    MultiIndex plus(int slot) const {
        MultiIndex a = *this;
        a.e[slot - 1] += 1;
        return a;
    }
    MultiIndex minus(int slot) const {
        MultiIndex a = *this;
        if (a.e[slot - 1] == 0) throw error("InvalidMultiIndex", "entry underflow");
        a.e[slot - 1] -= 1;
        return a;
    }

    // Weight of the index on a sorted list of 1-based slots.
    int weight_on(const std::vector<int>& slots) const {
        int w = 0;
        for (int s : slots) w += e[s - 1];
        return w;
    }

    std::string to_string() const {
        std::string out = "(";
        for (int i = 0; i < size(); ++i) {
            if (i) out += ",";
            out += std::to_string(e[i]);
        }
        return out + ")";
    }
};

// Graded order with earlier entries weighing more: first total order, then
// entry 1, entry 2, ... This matches the triangularity order used by the
// meta-singularity change of jet coordinates.
inline int compare(const MultiIndex& a, const MultiIndex& b) {
    if (a.order() != b.order()) return a.order() < b.order() ? -1 : 1;
    for (int i = 0; i < a.size() && i < b.size(); ++i)
        if (a.e[i] != b.e[i]) return a.e[i] < b.e[i] ? -1 : 1;
    return a.size() == b.size() ? 0 : (a.size() < b.size() ? -1 : 1);
}

inline bool operator==(const MultiIndex& a, const MultiIndex& b) { return compare(a, b) == 0; }
inline bool operator!=(const MultiIndex& a, const MultiIndex& b) { return compare(a, b) != 0; }
inline bool operator<(const MultiIndex& a, const MultiIndex& b) { return compare(a, b) < 0; }

}  // namespace redmod
