#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "espc/espc_index.hpp"
#include "test_util.hpp"

namespace espc {
namespace {

const auto kFour = validate_key_array(std::vector<double>{0, 1, 2, 3});

template <class F>
ErrorCode code_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorCode::InvalidConfig;
}

TEST(BuildEspc, SmallExample) {
    const auto idx = build_espc(kFour, 2);
    EXPECT_DOUBLE_EQ(idx.delta(), 1.5);
    ASSERT_EQ(idx.intervals(), 2u);
    EXPECT_EQ(idx.estimates()[0], 1.0);
    EXPECT_EQ(idx.estimates()[1], 3.0);
    EXPECT_EQ(interval_counts(idx), (std::vector<std::size_t>{2, 2}));
}

TEST(BuildEspc, SingleIntervalHoldsHalfN) {
    const auto a = validate_key_array(std::vector<std::uint64_t>{10, 20, 30, 40, 50});
    const auto idx = build_espc(a, 1);
    EXPECT_EQ(idx.delta(), 40.0);
    ASSERT_EQ(idx.intervals(), 1u);
    EXPECT_EQ(idx.estimates()[0], 2.5);
}

TEST(BuildEspc, AllEqualKeysCollapseToOneInterval) {
    const auto a = validate_key_array(std::vector<std::uint64_t>{7, 7, 7});
    for (std::size_t k : {1u, 2u, 50u}) {
        const auto idx = build_espc(a, k);
        EXPECT_TRUE(idx.degenerate());
        ASSERT_EQ(idx.intervals(), 1u);
        EXPECT_EQ(idx.estimates()[0], 1.5);
        EXPECT_EQ(evaluate_rank(idx, a, std::uint64_t{7}).rank, 3u);
        EXPECT_EQ(evaluate_rank(idx, a, std::uint64_t{6}).rank, 0u);
        EXPECT_EQ(evaluate_rank(idx, a, std::uint64_t{8}).rank, 3u);
    }
}

TEST(BuildEspc, RejectsZeroK) {
    EXPECT_EQ(code_of([] { build_espc(kFour, 0); }), ErrorCode::InvalidK);
}

// Independent reconstruction: integer keys and K a power of two make
// ceil((x - x1) K / span) computable exactly in integers, and the index's
// floating-point assignment must agree with it.
TEST(BuildEspc, EstimatesMatchExactRationalReconstruction) {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 2 + rng() % 600;
        const auto a = testing::random_u64_keys(rng, n, trial % 3 == 0);
        if (a.front() == a.back()) continue;
        const std::size_t k = std::size_t{1} << (rng() % 11);
        const auto idx = build_espc(a, k);
        const std::uint64_t span = a.back() - a.front();

        std::vector<std::size_t> counts(k, 0);
        for (std::uint64_t x : a) {
            const std::uint64_t num = (x - a.front()) * k;
            std::uint64_t j = (num + span - 1) / span;
            j = std::clamp<std::uint64_t>(j, 1, k);
            ++counts[j - 1];
        }
        std::size_t before = 0;
        for (std::size_t j = 0; j < k; ++j) {
            ASSERT_EQ(idx.estimates()[j], before + counts[j] / 2.0) << "trial " << trial << " k=" << j + 1;
            before += counts[j];
        }
    }
}

TEST(BuildEspc, EstimatesAreNonDecreasingAndBounded) {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng() % 1000;
        const auto a = testing::random_f64_keys(rng, n, trial % 2 == 0);
        const auto idx = build_espc(a, 1 + rng() % 500);
        double prev = 0.0;
        for (double r : idx.estimates()) {
            EXPECT_GE(r, prev);
            EXPECT_LE(r, static_cast<double>(n));
            EXPECT_EQ(std::floor(2 * r), 2 * r) << "estimates are half-integers";
            prev = r;
        }
    }
}

TEST(LocateInterval, Examples) {
    const auto idx = build_espc(kFour, 2);
    EXPECT_EQ(locate_interval(idx, 0.0), 1u);
    EXPECT_EQ(locate_interval(idx, 1.5), 1u);
    EXPECT_EQ(locate_interval(idx, 2.9), 2u);
    EXPECT_EQ(locate_interval(idx, 3.0), 2u);
    EXPECT_EQ(code_of([&] { locate_interval(idx, 3.5); }), ErrorCode::OutOfRange);
    EXPECT_EQ(code_of([&] { locate_interval(idx, -0.1); }), ErrorCode::OutOfRange);
}

TEST(LocateInterval, TopEdgeNeverOverflowsUnderRounding) {
    // Spans that are not representable multiples of delta.
    for (double hi : {0.3, 1.0 / 3.0, 7.1, 1e-300, 123456.789}) {
        const auto a = validate_key_array(std::vector<double>{0.0, hi / 2, hi});
        for (std::size_t k : {1u, 3u, 7u, 10u, 1000u}) {
            const auto idx = build_espc(a, k);
            EXPECT_EQ(locate_interval(idx, hi), k);
            EXPECT_EQ(locate_interval(idx, 0.0), 1u);
        }
    }
}

TEST(LocateInterval, TinySpanWithUnderflowingDelta) {
    const double tiny = 5e-324;
    const auto a = validate_key_array(std::vector<double>{0.0, tiny});
    const auto idx = build_espc(a, 2);
    EXPECT_EQ(evaluate_rank(idx, a, 0.0).rank, 1u);
    EXPECT_EQ(evaluate_rank(idx, a, tiny).rank, 2u);
}

TEST(Predict, Examples) {
    const auto idx = build_espc(kFour, 2);
    EXPECT_EQ(predict(idx, -1.0), 0.0);
    EXPECT_EQ(predict(idx, 4.0), 4.0);
    EXPECT_EQ(predict(idx, 2.9), 3.0);
}

TEST(Predict, MonotoneInQuery) {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        const auto a = testing::random_f64_keys(rng, 1 + rng() % 500, trial % 2 == 0);
        const auto idx = build_espc(a, 1 + rng() % 300);
        double prev = -1.0;
        for (double q = a.front() - 1; q <= a.back() + 1; q += (a.back() - a.front() + 2) / 2000) {
            const double p = predict(idx, q);
            EXPECT_GE(p, prev);
            prev = p;
        }
    }
}

TEST(EvaluateRank, Examples) {
    const auto idx = build_espc(kFour, 2);
    EXPECT_EQ(evaluate_rank(idx, kFour, -5.0).rank, 0u);
    EXPECT_EQ(evaluate_rank(idx, kFour, 100.0).rank, 4u);
    EXPECT_EQ(evaluate_rank(idx, kFour, 2.9).rank, 3u);
}

TEST(EvaluateRank, RejectsForeignArray) {
    const auto idx = build_espc(kFour, 2);
    const auto other = validate_key_array(std::vector<double>{0, 1, 2});
    EXPECT_EQ(code_of([&] { evaluate_rank(idx, other, 1.0); }), ErrorCode::IndexMismatch);
}

TEST(EvaluateRank, ExactOnRandomArraysAndBoundaries) {
    std::mt19937_64 rng(37);
    for (int trial = 0; trial < 400; ++trial) {
        const std::size_t n = 1 + rng() % 2048;
        const auto a = testing::random_f64_keys(rng, n, trial % 5 == 0);
        const std::size_t k = 1 + rng() % 256;
        const auto idx = build_espc(a, k);
        std::vector<double> qs;
        for (std::size_t j = 0; j <= idx.intervals(); ++j) {
            const double t = a.front() + static_cast<double>(j) * idx.delta();
            qs.insert(qs.end(), {std::nextafter(t, -INFINITY), t, std::nextafter(t, INFINITY)});
        }
        for (int r = 0; r < 50; ++r) qs.push_back(a[rng() % n]);
        for (double q : qs) {
            ASSERT_EQ(evaluate_rank(idx, a, q).rank, rank_bruteforce(a, q));
        }
    }
}

TEST(ApproximationError, Examples) {
    const auto idx = build_espc(kFour, 2);
    EXPECT_EQ(approximation_error(idx, kFour, -3.0), 0.0);
    EXPECT_EQ(approximation_error(idx, kFour, 9.0), 0.0);
    EXPECT_EQ(approximation_error(idx, kFour, 1.0), 1.0);
    EXPECT_EQ(approximation_error(idx, kFour, 2.9), 0.0);
}

TEST(ApproximationError, BoundedByHalfIntervalCount) {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 300; ++trial) {
        const auto a = testing::random_u64_keys(rng, 1 + rng() % 40, trial % 2 == 0);
        for (std::size_t k = 1; k <= a.size(); ++k) {
            const auto idx = build_espc(a, k);
            const auto counts = interval_counts(idx);
            std::vector<std::uint64_t> qs;
            for (std::uint64_t x : a) {
                qs.insert(qs.end(), {x, x + 1, x == 0 ? 0 : x - 1});
            }
            std::uniform_int_distribution<std::uint64_t> span(a.front(), a.back());
            for (int i = 0; i < 64; ++i) qs.push_back(span(rng));
            for (std::uint64_t q : qs) {
                if (q < a.front() || q > a.back()) continue;
                const std::size_t j = idx.interval_of(q);
                EXPECT_LE(approximation_error(idx, a, q), counts[j - 1] / 2.0);
            }
        }
    }
}

TEST(Serialization, RoundTripIsBitExact) {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 50; ++trial) {
        const auto a = testing::random_f64_keys(rng, 1 + rng() % 2000, false);
        const auto idx = build_espc(a, 1 + rng() % 700);
        const auto bytes = serialize_index(idx);
        EXPECT_EQ(bytes.size(), serialized_size(idx.intervals()));
        const auto back = deserialize_index<double>(bytes);
        EXPECT_EQ(back, idx);
        EXPECT_EQ(serialize_index(back), bytes);
    }
}

TEST(Serialization, LayoutAndSize) {
    EXPECT_EQ(kIndexHeaderBytes, 45u);
    EXPECT_EQ(serialized_size(1000), 8045u);
    EXPECT_EQ(serialized_size(1), 53u);
    EXPECT_EQ(serialized_size(2000) - kIndexHeaderBytes, 2 * (serialized_size(1000) - kIndexHeaderBytes));

    const auto idx = build_espc(kFour, 2);
    const auto bytes = serialize_index(idx);
    ASSERT_EQ(bytes.size(), 61u);
    EXPECT_EQ(std::string(reinterpret_cast<const char*>(bytes.data()), 5), "ESPC1");
    EXPECT_EQ(static_cast<int>(bytes[5]), 4); // n, little-endian
    EXPECT_EQ(static_cast<int>(bytes[13]), 2); // K
}

TEST(Serialization, RejectsDamagedInput) {
    const auto bytes = serialize_index(build_espc(kFour, 2));
    auto shortened = bytes;
    shortened.pop_back();
    EXPECT_EQ(code_of([&] { deserialize_index<double>(shortened); }), ErrorCode::TruncatedFile);
    auto longer = bytes;
    longer.resize(bytes.size() + 8);
    EXPECT_EQ(code_of([&] { deserialize_index<double>(longer); }), ErrorCode::CountMismatch);
    auto bad_magic = bytes;
    bad_magic[0] = std::byte{'X'};
    EXPECT_EQ(code_of([&] { deserialize_index<double>(bad_magic); }), ErrorCode::BadFormat);
}

TEST(Serialization, IntegerKeysBelowTwoTo53RoundTrip) {
    const auto a = validate_key_array(std::vector<std::uint64_t>{1ull << 40, (1ull << 40) + 17, 1ull << 52});
    const auto idx = build_espc(a, 5);
    EXPECT_EQ(deserialize_index<std::uint64_t>(serialize_index(idx)), idx);
}

} // namespace
} // namespace espc
