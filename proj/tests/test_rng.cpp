#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "dme/rng.hpp"
#include "oracle.hpp"

using dme::RngStream;

TEST_CASE("philox4x32-10 known answers") {
    using A4 = std::array<std::uint32_t, 4>;
    using A2 = std::array<std::uint32_t, 2>;
    CHECK(RngStream::philox4x32(A4{0, 0, 0, 0}, A2{0, 0}) ==
          A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(RngStream::philox4x32(A4{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                                A2{0xffffffff, 0xffffffff}) ==
          A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(RngStream::philox4x32(A4{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                                A2{0xa4093822, 0x299f31d0}) ==
          A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("same (seed, stream) reproduces the sequence") {
    RngStream a(42, 7), b(42, 7);
    for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());
    CHECK(a.counter() == b.counter());
}

TEST_CASE("copies are independent snapshots") {
    RngStream a(1, 2);
    a.next_u64();
    RngStream b = a;
    const auto x = a.next_u64();
    a.next_u64();
    CHECK(b.next_u64() == x);
}

TEST_CASE("distinct streams and seeds differ") {
    std::set<std::uint64_t> first;
    for (std::uint64_t s = 0; s < 64; ++s) {
        first.insert(RngStream(5, s).next_u64());
        first.insert(RngStream(s + 100, 0).next_u64());
    }
    CHECK(first.size() == 128);
}

TEST_CASE("substreams are reproducible and distinct") {
    const RngStream base(9, 3);
    auto s1 = base.substream(4), s2 = base.substream(4), s3 = base.substream(5);
    CHECK(s1.stream_id() == s2.stream_id());
    CHECK(s1.stream_id() != s3.stream_id());
    CHECK(s1.seed() == 9);
    CHECK(s1.next_u64() == s2.next_u64());
    CHECK(base.counter() == 0);
    CHECK(dme::replica_stream(1, 300, 0) != dme::replica_stream(1, 300, 1));
    CHECK(dme::replica_stream(1, 300, 0) != dme::replica_stream(1, 100, 0));
    CHECK(dme::replica_stream(1, 300, 0) != dme::replica_stream(2, 300, 0));
}

TEST_CASE("uniform lies strictly inside (0, 1) and has the right moments") {
    RngStream rng(123, 0);
    const int n = 1000000;
    std::vector<double> u(n);
    for (double& x : u) {
        x = rng.uniform();
        REQUIRE(x > 0.0);
        REQUIRE(x < 1.0);
    }
    CHECK(std::abs(oracle::mean(u) - 0.5) < 0.002);
    CHECK(std::abs(oracle::variance(u) - 1.0 / 12.0) < 5e-4);
    CHECK(oracle::ks_one_sample(u, [](double x) { return x; }) < 0.002);
}

TEST_CASE("normal has zero mean and unit variance") {
    RngStream rng(7, 1);
    std::vector<double> z(1000000);
    for (double& x : z) x = rng.normal();
    CHECK(std::abs(oracle::mean(z)) < 0.005);
    CHECK(std::abs(oracle::variance(z) - 1.0) < 0.01);
    CHECK(oracle::ks_one_sample(z, [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }) <
          0.002);
}
