#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "espc/error.hpp"
#include "espc/espc_index.hpp"
#include "espc/key_array.hpp"
#include "espc/search.hpp"

namespace espc {

/// Two-layer variant with equal-probability buckets.
///
/// The bottom layer splits A into K buckets holding (almost) the same number
/// of keys; bucket i starts at position s_i = ceil(i n / K). The bucket left
/// endpoints t_i = A[s_i] form a small sorted array A' that is itself indexed
/// by an ordinary EspcIndex with K_top intervals. A query first finds its
/// bucket k = rank_{A'}(q) through the top index, then predicts the bucket
/// midpoint and gallops on A.
///
/// For the bucket k returned by the top layer, A[s_{k-1}] <= q < A[s_k], so
/// rank(q) lies in [s_{k-1} + 1, s_k] even with duplicate keys; the bottom
/// layer needs no stored estimates.
template <KeyType Key>
class HierIndex {
public:
    std::size_t size() const noexcept { return n_; }
    std::size_t buckets() const noexcept { return boundaries_.size(); }
    const KeyArray<Key>& boundaries() const noexcept { return boundaries_; }
    const EspcIndex<Key>& top() const noexcept { return top_; }

    /// First position of bucket i (0-based), for i in [0, K].
    std::size_t bucket_start(std::size_t i) const noexcept {
        return (i * n_ + buckets() - 1) / buckets();
    }

    /// Slots held by both layers: one key per bucket plus the top estimates.
    std::size_t slots() const noexcept { return buckets() + top_.intervals(); }

    template <KeyType K>
    friend HierIndex<K> build_equal_probability(const KeyArray<K>& keys, std::size_t k, std::size_t k_top);

private:
    HierIndex(std::size_t n, KeyArray<Key> boundaries, EspcIndex<Key> top)
        : n_(n), boundaries_(std::move(boundaries)), top_(std::move(top)) {}

    std::size_t n_ = 0;
    KeyArray<Key> boundaries_;
    EspcIndex<Key> top_;
};

template <KeyType Key>
HierIndex<Key> build_equal_probability(const KeyArray<Key>& keys, std::size_t k, std::size_t k_top) {
    if (k < 1 || k_top < 1) {
        throw Error(ErrorCode::InvalidK, "bucket count and top interval count must be at least 1");
    }
    const std::size_t n = keys.size();
    if (k > n) {
        throw Error(ErrorCode::InvalidK,
                    "bucket count " + std::to_string(k) + " exceeds n=" + std::to_string(n));
    }
    std::vector<Key> left(k);
    for (std::size_t i = 0; i < k; ++i) {
        left[i] = keys[(i * n + k - 1) / k];
    }
    KeyArray<Key> boundaries = validate_key_array(std::move(left));
    EspcIndex<Key> top = build_espc(boundaries, k_top);
    return HierIndex<Key>(n, std::move(boundaries), std::move(top));
}

namespace detail {

// Bucket (1-based) and bottom-layer estimate for q in [x(1), x(n)].
struct BucketEstimate {
    std::size_t bucket;
    double estimate;
    std::size_t comparisons;
};

template <KeyType Key>
BucketEstimate bucket_estimate(const HierIndex<Key>& h, Key q) {
    const SearchOutcome top = evaluate_rank(h.top(), h.boundaries(), q);
    const std::size_t k = top.rank; // >= 1 because q >= t_0 = x(1)
    const std::size_t lo = h.bucket_start(k - 1) + 1;
    const std::size_t hi = h.bucket_start(k);
    return {k, 0.5 * static_cast<double>(lo + hi), top.comparisons};
}

} // namespace detail

/// Bottom-layer rank estimate (0 below the keys, n above them).
template <KeyType Key>
double predict_hier(const HierIndex<Key>& h, std::span<const Key> keys, Key q) {
    if (q < keys.front()) {
        return 0.0;
    }
    if (q > keys.back()) {
        return static_cast<double>(h.size());
    }
    return detail::bucket_estimate(h, q).estimate;
}

template <KeyType Key>
SearchOutcome evaluate_rank_hier(const HierIndex<Key>& h, std::span<const Key> keys, Key q) {
    if (h.size() != keys.size()) {
        throw Error(ErrorCode::IndexMismatch, "hierarchical index was built for n=" +
                                                  std::to_string(h.size()) + " keys, array has " +
                                                  std::to_string(keys.size()));
    }
    SearchOutcome out;
    out.comparisons = 1;
    if (q < keys.front()) {
        return out;
    }
    out.comparisons = 2;
    if (q > keys.back()) {
        out.rank = keys.size();
        return out;
    }
    const auto est = detail::bucket_estimate(h, q);
    SearchOutcome found = exponential_search(keys, static_cast<std::size_t>(std::ceil(est.estimate)), q);
    found.comparisons += out.comparisons + est.comparisons;
    return found;
}

template <KeyType Key>
SearchOutcome evaluate_rank_hier(const HierIndex<Key>& h, const KeyArray<Key>& keys, Key q) {
    return evaluate_rank_hier(h, keys.span(), q);
}

} // namespace espc
