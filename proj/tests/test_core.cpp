#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "espc/key_array.hpp"
#include "test_util.hpp"

namespace espc {
namespace {

TEST(ValidateKeyArray, SortsUnorderedInput) {
    const auto a = validate_key_array(std::vector<std::uint64_t>{3, 1, 2});
    ASSERT_EQ(a.size(), 3u);
    EXPECT_EQ(a.values(), (std::vector<std::uint64_t>{1, 2, 3}));
}

TEST(ValidateKeyArray, Singleton) {
    const auto a = validate_key_array(std::vector<std::uint64_t>{5});
    EXPECT_EQ(a.size(), 1u);
    EXPECT_EQ(a.front(), 5u);
    EXPECT_EQ(a.back(), 5u);
}

TEST(ValidateKeyArray, KeepsDuplicates) {
    const auto a = validate_key_array(std::vector<double>{2.0, 1.0, 2.0, 1.0});
    EXPECT_EQ(a.values(), (std::vector<double>{1.0, 1.0, 2.0, 2.0}));
}

TEST(ValidateKeyArray, RejectsEmpty) {
    try {
        validate_key_array(std::vector<double>{});
        FAIL() << "expected EmptyInput";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EmptyInput);
    }
}

TEST(ValidateKeyArray, RejectsNonFinite) {
    for (double bad : {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::infinity(),
                       -std::numeric_limits<double>::infinity()}) {
        try {
            validate_key_array(std::vector<double>{1.0, bad});
            FAIL() << "expected NonFiniteKey";
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::NonFiniteKey);
        }
    }
}

TEST(RankBruteforce, Examples) {
    const auto dup = validate_key_array(std::vector<std::uint64_t>{1, 1, 2});
    EXPECT_EQ(rank_bruteforce(dup, std::uint64_t{1}), 2u);
    const auto a = validate_key_array(std::vector<std::uint64_t>{1, 2, 3});
    EXPECT_EQ(rank_bruteforce(a, std::uint64_t{0}), 0u);
    EXPECT_EQ(rank_bruteforce(a, std::uint64_t{3}), 3u);
}

TEST(RankBruteforce, BoundedMonotoneAndCountsTiesRightward) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng() % 200;
        const auto a = testing::random_u64_keys(rng, n, trial % 2 == 0);
        Rank prev = 0;
        for (std::uint64_t q = 0; q <= a.back() + 2; q += 1 + a.back() / 300) {
            const Rank r = rank_bruteforce(a, q);
            EXPECT_LE(r, n);
            EXPECT_GE(r, prev);
            prev = r;
        }
        for (std::size_t i = 0; i < n; ++i) {
            EXPECT_GE(rank_bruteforce(a, a[i]), i + 1);
        }
    }
}

} // namespace
} // namespace espc
