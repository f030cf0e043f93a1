#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <span>
#include <type_traits>
#include <utility>
#include <vector>

#include "espc/error.hpp"

namespace espc {

/// Keys are either unsigned 64-bit integers (SOSD-style data) or IEEE doubles.
template <class T>
concept KeyType = std::same_as<T, std::uint64_t> || std::same_as<T, double>;

enum class KeyMode { u64, f64 };

template <KeyType Key>
constexpr KeyMode key_mode_of() noexcept {
    return std::is_same_v<Key, double> ? KeyMode::f64 : KeyMode::u64;
}

/// Number of keys <= q. Always in [0, n].
using Rank = std::size_t;

/// Sorted, validated, immutable array of keys. Duplicates are kept.
///
/// Only obtainable through validate_key_array() (or the sorted-input factory
/// used by loaders that have already checked order), so every instance
/// satisfies: n >= 1, non-decreasing, and finite keys in double mode.
template <KeyType Key>
class KeyArray {
public:
    using key_type = Key;

    std::size_t size() const noexcept { return keys_.size(); }
    Key front() const noexcept { return keys_.front(); }
    Key back() const noexcept { return keys_.back(); }
    Key operator[](std::size_t i) const noexcept { return keys_[i]; }

    std::span<const Key> span() const noexcept { return keys_; }
    const std::vector<Key>& values() const noexcept { return keys_; }

    auto begin() const noexcept { return keys_.begin(); }
    auto end() const noexcept { return keys_.end(); }

    friend bool operator==(const KeyArray&, const KeyArray&) = default;

    template <KeyType K>
    friend KeyArray<K> validate_key_array(std::vector<K> raw);

private:
    explicit KeyArray(std::vector<Key> keys) : keys_(std::move(keys)) {}

    std::vector<Key> keys_;
};

/// Validates raw keys and returns them as a KeyArray, sorting (stably) when
/// the input is out of order.
template <KeyType Key>
KeyArray<Key> validate_key_array(std::vector<Key> raw) {
    if (raw.empty()) {
        throw Error(ErrorCode::EmptyInput, "key array must contain at least one key");
    }
    if constexpr (std::is_same_v<Key, double>) {
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (!std::isfinite(raw[i])) {
                throw Error(ErrorCode::NonFiniteKey,
                            "key at position " + std::to_string(i) + " is NaN or infinite");
            }
        }
    }
    if (!std::is_sorted(raw.begin(), raw.end())) {
        std::stable_sort(raw.begin(), raw.end());
    }
    return KeyArray<Key>(std::move(raw));
}

/// Exact rank by linear scan. This is the reference every other rank
/// implementation is tested against, so it stays deliberately naive.
template <KeyType Key>
Rank rank_bruteforce(std::span<const Key> keys, Key q) noexcept {
    Rank count = 0;
    for (Key x : keys) {
        if (x <= q) {
            ++count;
        }
    }
    return count;
}

template <KeyType Key>
Rank rank_bruteforce(const KeyArray<Key>& keys, Key q) noexcept {
    return rank_bruteforce(keys.span(), q);
}

} // namespace espc
