#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "ces/diversity.hpp"
#include "oracles.hpp"

using namespace ces;
using namespace ces::diversity;

namespace {

Partition halves(std::size_t n) {
    std::vector<int> l(n);
    for (std::size_t i = 0; i < n; ++i) l[i] = i < n / 2 ? 0 : 1;
    return Partition(l, 2);
}

ClusterView view(std::vector<std::size_t> members, std::size_t n) { return {std::move(members), n}; }

Partition random_partition(std::mt19937_64& rng, std::size_t n, int k) {
    std::uniform_int_distribution<int> lab(0, k - 1);
    std::vector<int> l(n);
    for (auto& v : l) v = lab(rng);
    return Partition::from_labels(l);
}

}  // namespace

TEST(Apmm, HandDerivedHalves) {
    EXPECT_NEAR(apmm(view({0, 1}, 4), halves(4)), 2.0 / 3.0, 1e-9);
}

TEST(Apmm, FullClusterCases) {
    EXPECT_EQ(apmm(view({0, 1, 2, 3}, 4), halves(4)), 0.0);
    EXPECT_EQ(apmm(view({0, 1, 2, 3}, 4), Partition({0, 0, 0, 0}, 1)), 1.0);
    // A proper cluster against the one-cluster partition has ratio 2.
    EXPECT_DOUBLE_EQ(apmm(view({0, 1}, 4), Partition({0, 0, 0, 0}, 1)), 2.0);
}

TEST(Apmm, Errors) {
    EXPECT_THROW(apmm(view({0}, 5), halves(4)), LengthMismatch);
    EXPECT_THROW(apmm(view({}, 4), halves(4)), std::invalid_argument);
    EXPECT_THROW(aapmm(halves(4), halves(6)), LengthMismatch);
}

TEST(Aapmm, Examples) {
    EXPECT_NEAR(aapmm(halves(4), halves(4)), 2.0 / 3.0, 1e-12);
    const auto v = aapmm_detail(halves(4), Partition({0, 0, 0, 0}, 1));
    EXPECT_DOUBLE_EQ(v.raw, 2.0);
    EXPECT_EQ(v.clamped, 1.0);
}

TEST(Aapmm, SingletonsAgainstSingletons) {
    const std::size_t n = 6;
    std::vector<int> l(n);
    std::iota(l.begin(), l.end(), 0);
    const Partition s(l, static_cast<int>(n));
    const std::vector<std::size_t> sizes(n, 1);
    EXPECT_NEAR(aapmm_detail(s, s).raw, oracle::apmm(1, sizes, n), 1e-12);
}

TEST(Uniformity, Examples) {
    const auto p = halves(20);
    const auto q = Partition::from_labels({0, 1, 2, 3, 0, 1, 2, 3, 0, 1, 2, 3, 0, 1, 2, 3, 0, 1, 2, 3});
    EXPECT_EQ(uniformity(p, {p}), aapmm(p, p));
    EXPECT_EQ(uniformity(p, {p, q}), std::max(aapmm(p, p), aapmm(p, q)));
    EXPECT_EQ(uniformity(p, {p, p, p}), uniformity(p, {p}));
    EXPECT_THROW(uniformity(p, {}), EmptyCommittee);
}

TEST(Admit, EmptyCommitteeAdmits) {
    const auto r = admit(halves(10), {}, 0.9);
    EXPECT_TRUE(r.admitted);
    EXPECT_EQ(r.div, 1.0);
    EXPECT_TRUE(r.raw_aapmm.empty());
}

TEST(Admit, IdenticalBalancedPartitionHasDivOneThird) {
    // Two clusters of 10: each cluster scores 2*10*ln2 / (10*ln2 + 20*ln2) = 2/3.
    const auto p = halves(20);
    const auto r = admit(p, {p}, 0.1);
    EXPECT_NEAR(r.uniformity, 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(r.div, 1.0 / 3.0, 1e-12);
    EXPECT_TRUE(r.admitted);
    EXPECT_FALSE(admit(p, {p}, 0.34).admitted);
}

TEST(Admit, ZeroThresholdAdmitsEverything) {
    std::mt19937_64 rng(3);
    std::vector<Partition> committee;
    for (int i = 0; i < 50; ++i) {
        const auto p = random_partition(rng, 25, 1 + i % 5);
        EXPECT_TRUE(admit(p, committee, 0.0).admitted);
        committee.push_back(p);
    }
    EXPECT_THROW(admit(halves(4), {}, 1.5), std::invalid_argument);
    EXPECT_THROW(admit(halves(4), {}, -0.1), std::invalid_argument);
}

TEST(Property, ApmmMatchesDirectFormula) {
    std::mt19937_64 rng(500);
    std::uniform_int_distribution<std::size_t> nn(2, 30);
    for (int trial = 0; trial < 500; ++trial) {
        const auto n = nn(rng);
        const auto p = random_partition(rng, n, std::uniform_int_distribution<int>(1, static_cast<int>(n))(rng));
        // Random non-empty cluster.
        std::vector<std::size_t> members;
        while (members.empty())
            for (std::size_t i = 0; i < n; ++i)
                if (rng() % 2) members.push_back(i);
        const double got = apmm(view(members, n), p);
        const double want = oracle::apmm(members.size(), p.cluster_sizes(), n);
        EXPECT_NEAR(got, want, 1e-12 * std::max(1.0, std::abs(want))) << "n=" << n;
    }
}

TEST(Property, InvarianceAndRange) {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 12;
        const auto p = random_partition(rng, n, 3), ref = random_partition(rng, n, 4);
        // Relabel ref's clusters.
        std::vector<int> relabeled(ref.labels());
        for (auto& v : relabeled) v = ref.k() - 1 - v;
        const double base = aapmm(p, ref);
        EXPECT_DOUBLE_EQ(base, aapmm(p, Partition(relabeled, ref.k())));
        // Permute samples in both.
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<int> pp(n), rp(n);
        for (std::size_t i = 0; i < n; ++i) {
            pp[i] = p[perm[i]];
            rp[i] = ref[perm[i]];
        }
        EXPECT_DOUBLE_EQ(base, aapmm(Partition(pp, p.k()), Partition(rp, ref.k())));
        EXPECT_GE(base, 0.0);
        EXPECT_LE(base, 1.0);
    }
}

TEST(Property, UniformityGrowsWithCommittee) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 50; ++trial) {
        const auto p = random_partition(rng, 20, 3);
        std::vector<Partition> committee;
        double prev = 0.0;
        bool admissible = true;
        for (int i = 0; i < 8; ++i) {
            committee.push_back(random_partition(rng, 20, 2 + i % 3));
            const double u = uniformity(p, committee);
            EXPECT_GE(u, prev);
            prev = u;
            const bool now = admit(p, committee, 0.3).admitted;
            EXPECT_TRUE(admissible || !now);
            admissible = now;
        }
    }
}
