#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <cstdint>
#include <random>
#include <vector>

#include "espc/search.hpp"
#include "test_util.hpp"

namespace espc {
namespace {

// Extra comparisons allowed on top of 2 ceil(log2(eps + 2)).
constexpr std::size_t kGallopSlack = 3;

std::size_t ceil_log2(std::size_t x) {
    std::size_t b = 0;
    while ((std::size_t{1} << b) < x) ++b;
    return b;
}

const auto kOdd = validate_key_array(std::vector<std::uint64_t>{1, 3, 5, 7});

TEST(BinarySearchRank, Examples) {
    EXPECT_EQ(binary_search_rank(kOdd, std::uint64_t{5}).rank, 3u);
    EXPECT_EQ(binary_search_rank(kOdd, std::uint64_t{0}).rank, 0u);
    const auto single = validate_key_array(std::vector<std::uint64_t>{2});
    const auto out = binary_search_rank(single, std::uint64_t{2});
    EXPECT_EQ(out.rank, 1u);
    EXPECT_GE(out.comparisons, 1u);
}

TEST(BinarySearchRank, MatchesOracleOnExhaustiveGrid) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 1 + rng() % 300;
        const auto a = testing::random_f64_keys(rng, n, trial % 3 == 0);
        std::vector<double> qs{a.front() - 1.0, a.back() + 1.0};
        for (std::size_t i = 0; i < n; ++i) {
            qs.push_back(a[i]);
            if (i + 1 < n) qs.push_back(0.5 * (a[i] + a[i + 1]));
        }
        const std::size_t limit = ceil_log2(n + 1) + 1;
        for (double q : qs) {
            const auto out = binary_search_rank(a, q);
            ASSERT_EQ(out.rank, rank_bruteforce(a, q));
            EXPECT_LE(out.comparisons, limit);
        }
    }
}

TEST(ExponentialSearch, Examples) {
    EXPECT_EQ(exponential_search(kOdd, 1, std::uint64_t{7}).rank, 4u);
    const auto hit = exponential_search(kOdd, 3, std::uint64_t{5});
    EXPECT_EQ(hit.rank, 3u);
    EXPECT_LE(hit.comparisons, kGallopSlack + 2);
    EXPECT_EQ(exponential_search(kOdd, 2, std::uint64_t{0}).rank, 0u);
}

TEST(ExponentialSearch, RejectsStartBeyondEnd) {
    try {
        exponential_search(kOdd, 5, std::uint64_t{3});
        FAIL() << "expected StartOutOfRange";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::StartOutOfRange);
    }
}

TEST(ExponentialSearch, AllStartsOnEmptyRangesAndEnds) {
    const auto a = validate_key_array(std::vector<double>{1.0, 1.0, 1.0});
    for (std::size_t i = 0; i <= 3; ++i) {
        EXPECT_EQ(exponential_search(a, i, 0.5).rank, 0u);
        EXPECT_EQ(exponential_search(a, i, 1.0).rank, 3u);
        EXPECT_EQ(exponential_search(a, i, 2.0).rank, 3u);
    }
}

TEST(ExponentialSearch, OracleEquivalenceRandomTriples) {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 10'000; ++trial) {
        const std::size_t n = 1 + rng() % 2048;
        const bool dups = trial % 4 == 0;
        if (trial % 2 == 0) {
            const auto a = testing::random_u64_keys(rng, n, dups);
            const std::size_t i = rng() % (n + 1);
            const std::uint64_t q = rng() % (a.back() + 3);
            ASSERT_EQ(exponential_search(a, i, q).rank, rank_bruteforce(a, q));
        } else {
            const auto a = testing::random_f64_keys(rng, n, dups);
            const std::size_t i = rng() % (n + 1);
            const double q = (rng() % 2 == 0) ? a[rng() % n] : std::uniform_real_distribution<double>(-60, 60)(rng);
            ASSERT_EQ(exponential_search(a, i, q).rank, rank_bruteforce(a, q));
        }
    }
}

TEST(ExponentialSearch, CostBoundedByDisplacement) {
    // Distinct keys, every start, every key and gap as the query.
    for (std::size_t n : {1u, 2u, 7u, 64u, 300u}) {
        std::vector<std::uint64_t> xs(n);
        for (std::size_t i = 0; i < n; ++i) xs[i] = 2 * i + 1;
        const auto a = validate_key_array(std::move(xs));
        for (std::size_t start = 0; start <= n; ++start) {
            for (std::uint64_t q = 0; q <= 2 * n + 1; ++q) {
                const auto out = exponential_search(a, start, q);
                const std::size_t truth = rank_bruteforce(a, q);
                ASSERT_EQ(out.rank, truth);
                const std::size_t eps = truth > start ? truth - start : start - truth;
                EXPECT_LE(out.comparisons, 2 * ceil_log2(eps + 2) + kGallopSlack)
                    << "n=" << n << " start=" << start << " q=" << q;
            }
        }
    }
}

TEST(ExponentialSearch, CostGrowsLogarithmically) {
    constexpr std::size_t n = 1 << 16;
    std::vector<std::uint64_t> xs(n);
    for (std::size_t i = 0; i < n; ++i) xs[i] = i;
    const auto a = validate_key_array(std::move(xs));
    std::mt19937_64 rng(5);

    std::vector<double> lx, ly;
    for (std::size_t eps = 1; eps <= 4096; eps *= 2) {
        double total = 0.0;
        const int reps = 2000;
        for (int r = 0; r < reps; ++r) {
            const std::size_t truth = 5000 + rng() % (n - 10'000);
            const std::size_t start = (r % 2 == 0) ? truth + eps : truth - eps;
            total += static_cast<double>(exponential_search(a, start, a[truth - 1]).comparisons);
        }
        lx.push_back(std::log2(static_cast<double>(eps)));
        ly.push_back(total / reps);
    }
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    const double slope = sxy / sxx;
    EXPECT_GE(slope, 0.8);
    EXPECT_LE(slope, 2.5);
}

} // namespace
} // namespace espc
