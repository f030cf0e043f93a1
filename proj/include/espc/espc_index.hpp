#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "espc/error.hpp"
#include "espc/key_array.hpp"
#include "espc/search.hpp"

namespace espc {

/// Equal-split piecewise-constant rank estimator.
///
/// The key range [x_first, x_last] is cut into K intervals of equal length
/// delta. Interval k (1-based) stores r[k] = rank(t_{k-1}) + n_k / 2, the
/// midpoint of the ranks spanned by the n_k keys that fall into it, so any
/// query in I_k is predicted within n_k / 2 of its true rank.
///
/// Interval membership is decided only by interval_of(), for keys at build
/// time and for queries at lookup time. Boundaries t_k are never recomputed,
/// so each value maps to exactly one interval regardless of rounding.
template <KeyType Key>
class EspcIndex {
public:
    EspcIndex() = default;

    std::size_t size() const noexcept { return n_; }
    std::size_t intervals() const noexcept { return estimates_.size(); }
    double delta() const noexcept { return delta_; }
    Key first_key() const noexcept { return x_first_; }
    Key last_key() const noexcept { return x_last_; }
    std::span<const double> estimates() const noexcept { return estimates_; }

    /// True when every key is equal; the index then holds a single interval.
    bool degenerate() const noexcept { return x_first_ == x_last_; }

    /// 1-based interval of a value inside [x_first, x_last]:
    /// clamp(ceil((q - x_first) / delta), 1, K). No range check.
    std::size_t interval_of(Key q) const noexcept {
        const std::size_t k_max = estimates_.size();
        // Subtract in the key domain first: exact for integers, monotone for doubles.
        const double offset = static_cast<double>(q - x_first_);
        const double raw = std::ceil(offset / delta_);
        // NaN (0/0 on a collapsed delta) lands in the first interval, +inf in the last.
        if (!(raw >= 1.0)) {
            return 1;
        }
        if (raw >= static_cast<double>(k_max)) {
            return k_max;
        }
        return static_cast<std::size_t>(raw);
    }

    friend bool operator==(const EspcIndex&, const EspcIndex&) = default;

    template <KeyType K>
    friend EspcIndex<K> build_espc(const KeyArray<K>& keys, std::size_t k);
    template <KeyType K>
    friend EspcIndex<K> deserialize_index(std::span<const std::byte> bytes);

private:
    std::size_t n_ = 0;
    Key x_first_{};
    Key x_last_{};
    double delta_ = 0.0;
    std::vector<double> estimates_;
};

/// Builds the index in O(n + K). A collapsed key range (all keys equal)
/// yields a single interval with estimate n / 2 whatever K was requested.
template <KeyType Key>
EspcIndex<Key> build_espc(const KeyArray<Key>& keys, std::size_t k) {
    if (k < 1) {
        throw Error(ErrorCode::InvalidK, "K must be at least 1");
    }
    EspcIndex<Key> idx;
    idx.n_ = keys.size();
    idx.x_first_ = keys.front();
    idx.x_last_ = keys.back();
    if (idx.degenerate()) {
        idx.delta_ = 0.0;
        idx.estimates_.assign(1, static_cast<double>(idx.n_) / 2.0);
        return idx;
    }
    idx.delta_ = static_cast<double>(idx.x_last_ - idx.x_first_) / static_cast<double>(k);
    idx.estimates_.assign(k, 0.0);

    std::vector<std::size_t> counts(k, 0);
    for (Key x : keys) {
        ++counts[idx.interval_of(x) - 1];
    }
    // r[k] = rank(t_{k-1}) + n_k/2, with rank(t_{k-1}) the running prefix sum.
    std::size_t before = 0;
    for (std::size_t j = 0; j < k; ++j) {
        idx.estimates_[j] = static_cast<double>(before) + static_cast<double>(counts[j]) / 2.0;
        before += counts[j];
    }
    return idx;
}

/// Interval holding q; q must lie in [x_first, x_last].
template <KeyType Key>
std::size_t locate_interval(const EspcIndex<Key>& idx, Key q) {
    if (q < idx.first_key() || q > idx.last_key()) {
        throw Error(ErrorCode::OutOfRange, "query outside [x_first, x_last]");
    }
    return idx.interval_of(q);
}

/// Rank estimate before correction: 0 below the keys, n above them, r[k] inside.
template <KeyType Key>
double predict(const EspcIndex<Key>& idx, Key q) noexcept {
    if (q < idx.first_key()) {
        return 0.0;
    }
    if (q > idx.last_key()) {
        return static_cast<double>(idx.size());
    }
    return idx.estimates()[idx.interval_of(q) - 1];
}

/// Exact rank: predict, then gallop from ceil(r[k]).
template <KeyType Key>
SearchOutcome evaluate_rank(const EspcIndex<Key>& idx, std::span<const Key> keys, Key q) {
    if (idx.size() != keys.size()) {
        throw Error(ErrorCode::IndexMismatch, "index was built for n=" + std::to_string(idx.size()) +
                                                  " keys, array has " + std::to_string(keys.size()));
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
    if (idx.degenerate()) {
        // keys.front() <= q <= keys.back() and all keys are equal.
        out.rank = keys.size();
        return out;
    }
    const double estimate = idx.estimates()[idx.interval_of(q) - 1];
    const auto start = static_cast<std::size_t>(std::ceil(estimate));
    SearchOutcome found = exponential_search(keys, start, q);
    found.comparisons += out.comparisons;
    return found;
}

template <KeyType Key>
SearchOutcome evaluate_rank(const EspcIndex<Key>& idx, const KeyArray<Key>& keys, Key q) {
    return evaluate_rank(idx, keys.span(), q);
}

/// |rank(q) - predict(q)| with rank taken from the brute-force oracle.
template <KeyType Key>
double approximation_error(const EspcIndex<Key>& idx, const KeyArray<Key>& keys, Key q) {
    if (idx.size() != keys.size()) {
        throw Error(ErrorCode::IndexMismatch, "index and key array sizes differ");
    }
    return std::abs(static_cast<double>(rank_bruteforce(keys, q)) - predict(idx, q));
}

/// Number of keys in each interval, recovered from the estimates:
/// n_k = 2 (r[k] - rank(t_{k-1})).
template <KeyType Key>
std::vector<std::size_t> interval_counts(const EspcIndex<Key>& idx) {
    std::vector<std::size_t> counts(idx.intervals());
    double before = 0.0;
    for (std::size_t j = 0; j < counts.size(); ++j) {
        const double twice = 2.0 * (idx.estimates()[j] - before);
        counts[j] = static_cast<std::size_t>(std::llround(twice));
        before += static_cast<double>(counts[j]);
    }
    return counts;
}

// ---------------------------------------------------------------------------
// Binary layout (little-endian):
//   "ESPC1" | n:u64 | K:u64 | x_first:f64 | x_last:f64 | delta:f64 | r[1..K]:f64

inline constexpr char kIndexMagic[5] = {'E', 'S', 'P', 'C', '1'};
inline constexpr std::size_t kIndexHeaderBytes = sizeof(kIndexMagic) + 2 * 8 + 3 * 8;
inline constexpr std::size_t kIndexSlotBytes = sizeof(double);

/// Exact serialized size: header + one slot per interval.
constexpr std::size_t serialized_size(std::size_t k) noexcept {
    return kIndexHeaderBytes + kIndexSlotBytes * k;
}

namespace detail {

inline void put_u64(std::vector<std::byte>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xFF));
    }
}

inline std::uint64_t get_u64(std::span<const std::byte> in, std::size_t pos) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        v |= static_cast<std::uint64_t>(in[pos + i]) << (8 * i);
    }
    return v;
}

inline void put_f64(std::vector<std::byte>& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

inline double get_f64(std::span<const std::byte> in, std::size_t pos) {
    return std::bit_cast<double>(get_u64(in, pos));
}

} // namespace detail

/// Integer anchors are written as doubles and therefore exact only below 2^53.
template <KeyType Key>
std::vector<std::byte> serialize_index(const EspcIndex<Key>& idx) {
    std::vector<std::byte> out;
    out.reserve(serialized_size(idx.intervals()));
    for (char c : kIndexMagic) {
        out.push_back(static_cast<std::byte>(c));
    }
    detail::put_u64(out, idx.size());
    detail::put_u64(out, idx.intervals());
    detail::put_f64(out, static_cast<double>(idx.first_key()));
    detail::put_f64(out, static_cast<double>(idx.last_key()));
    detail::put_f64(out, idx.delta());
    for (double r : idx.estimates()) {
        detail::put_f64(out, r);
    }
    return out;
}

template <KeyType Key>
EspcIndex<Key> deserialize_index(std::span<const std::byte> bytes) {
    if (bytes.size() < kIndexHeaderBytes) {
        throw Error(ErrorCode::TruncatedFile, "index shorter than its header");
    }
    if (std::memcmp(bytes.data(), kIndexMagic, sizeof(kIndexMagic)) != 0) {
        throw Error(ErrorCode::BadFormat, "missing ESPC1 magic");
    }
    std::size_t pos = sizeof(kIndexMagic);
    const std::uint64_t n = detail::get_u64(bytes, pos);
    const std::uint64_t k = detail::get_u64(bytes, pos + 8);
    pos += 16;
    if (k == 0 || n == 0) {
        throw Error(ErrorCode::BadFormat, "index header has n=0 or K=0");
    }
    if (k > (bytes.size() - kIndexHeaderBytes) / kIndexSlotBytes ||
        bytes.size() != serialized_size(k)) {
        throw Error(bytes.size() < serialized_size(k) ? ErrorCode::TruncatedFile : ErrorCode::CountMismatch,
                    "index size does not match K=" + std::to_string(k));
    }
    EspcIndex<Key> idx;
    idx.n_ = n;
    const double first = detail::get_f64(bytes, pos);
    const double last = detail::get_f64(bytes, pos + 8);
    idx.delta_ = detail::get_f64(bytes, pos + 16);
    pos += 24;
    if (!std::isfinite(first) || !std::isfinite(last) || !(first <= last) || !(idx.delta_ >= 0.0)) {
        throw Error(ErrorCode::BadFormat, "index anchors are not a valid range");
    }
    if constexpr (std::is_same_v<Key, std::uint64_t>) {
        if (first < 0.0 || last >= 18446744073709551616.0) {
            throw Error(ErrorCode::BadFormat, "index anchors do not fit unsigned 64-bit keys");
        }
    }
    idx.x_first_ = static_cast<Key>(first);
    idx.x_last_ = static_cast<Key>(last);
    idx.estimates_.resize(k);
    for (std::size_t j = 0; j < k; ++j, pos += 8) {
        idx.estimates_[j] = detail::get_f64(bytes, pos);
    }
    return idx;
}

} // namespace espc
