#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "espc/error.hpp"
#include "espc/key_array.hpp"

namespace espc {

/// Result of an instrumented search. `comparisons` counts key-vs-query
/// comparisons only, which makes it a deterministic proxy for query time.
struct SearchOutcome {
    Rank rank = 0;
    std::size_t comparisons = 0;

    friend bool operator==(const SearchOutcome&, const SearchOutcome&) = default;
};

namespace detail {

// Smallest position p in [lo, hi] such that keys[p] > q, assuming
// keys[lo-1] <= q (or lo == 0) and keys[hi] > q (or hi == n).
template <KeyType Key>
std::size_t upper_bound_counted(std::span<const Key> keys, std::size_t lo, std::size_t hi, Key q,
                                std::size_t& comparisons) noexcept {
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        ++comparisons;
        if (keys[mid] <= q) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    return lo;
}

} // namespace detail

/// Plain binary search over the whole array; the O(log n) baseline.
template <KeyType Key>
SearchOutcome binary_search_rank(std::span<const Key> keys, Key q) noexcept {
    SearchOutcome out;
    out.rank = detail::upper_bound_counted(keys, 0, keys.size(), q, out.comparisons);
    return out;
}

template <KeyType Key>
SearchOutcome binary_search_rank(const KeyArray<Key>& keys, Key q) noexcept {
    return binary_search_rank(keys.span(), q);
}

/// Galloping search for rank(q) starting from the rank guess `start`.
///
/// `start` is read as a rank, i.e. the guess that keys[start-1] <= q < keys[start].
/// The guess is checked with at most two comparisons; otherwise offsets
/// 1, 2, 4, ... are probed away from `start` until q is bracketed, and the
/// bracket is finished with binary search. Ties resolve to the rightmost
/// duplicate, so the result is the count of keys <= q. Cost is about
/// 2 log2(eps) + O(1) comparisons for eps = |rank(q) - start|.
template <KeyType Key>
SearchOutcome exponential_search(std::span<const Key> keys, std::size_t start, Key q) {
    const std::size_t n = keys.size();
    if (start > n) {
        throw Error(ErrorCode::StartOutOfRange,
                    "start " + std::to_string(start) + " exceeds n=" + std::to_string(n));
    }
    SearchOutcome out;

    if (start < n) {
        ++out.comparisons;
        if (keys[start] <= q) {
            // rank > start: gallop right. keys[start + offset/2] <= q holds on exit.
            std::size_t offset = 1;
            while (start + offset < n) {
                ++out.comparisons;
                if (keys[start + offset] > q) {
                    break;
                }
                offset *= 2;
            }
            const std::size_t lo = start + offset / 2 + 1;
            const std::size_t hi = start + offset < n ? start + offset : n;
            out.rank = detail::upper_bound_counted(keys, lo, hi, q, out.comparisons);
            return out;
        }
    }
    if (start == 0) {
        out.rank = 0;
        return out;
    }
    ++out.comparisons;
    if (keys[start - 1] <= q) {
        out.rank = start;
        return out;
    }
    // rank < start: gallop left from position start-1, which is known > q.
    const std::size_t top = start - 1;
    std::size_t offset = 1;
    while (offset <= top) {
        ++out.comparisons;
        if (keys[top - offset] <= q) {
            break;
        }
        offset *= 2;
    }
    const std::size_t lo = offset <= top ? top - offset + 1 : 0;
    const std::size_t hi = top - offset / 2;
    out.rank = detail::upper_bound_counted(keys, lo, hi, q, out.comparisons);
    return out;
}

template <KeyType Key>
SearchOutcome exponential_search(const KeyArray<Key>& keys, std::size_t start, Key q) {
    return exponential_search(keys.span(), start, q);
}

} // namespace espc
