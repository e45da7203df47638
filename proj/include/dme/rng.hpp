#pragma once

#include <array>
#include <cstdint>

namespace dme {

/// Counter-based random stream keyed by (seed, stream_id, counter).
///
/// Output block k of a stream is Philox4x32-10 applied to the counter
/// (k, stream_id) under the key `seed`, so two streams never share state and a
/// stream can be recreated anywhere from its two identifiers. Copies are
/// independent snapshots: advancing one never affects the other.
class RngStream {
public:
    RngStream() = default;
    RngStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }
    /// Number of 128-bit blocks consumed so far.
    std::uint64_t counter() const { return counter_; }

    std::uint64_t next_u64();

    /// Uniform on the open interval (0, 1); never returns 0 or 1.
    double uniform();

    /// Standard normal by the Box-Muller transform.
    double normal();

    /// A fresh stream on the same seed whose id is a hash of (stream_id, index).
    /// Used to give every row / replica its own reproducible sequence.
    RngStream substream(std::uint64_t index) const;

    /// Raw Philox4x32-10 block function, exposed for known-answer tests.
    static std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                                   std::array<std::uint32_t, 2> key);

private:
    std::uint64_t seed_ = 0;
    std::uint64_t stream_id_ = 0;
    std::uint64_t counter_ = 0;
    std::uint64_t pending_ = 0;
    bool has_pending_ = false;
    double pending_normal_ = 0.0;
    bool has_pending_normal_ = false;
};

/// SplitMix64 finalizer; a bijective 64-bit mixer.
std::uint64_t mix64(std::uint64_t x);

/// Stream id for replica `replica` of an experiment tagged `tag` at dimension `n`.
std::uint64_t replica_stream(std::uint64_t tag, std::uint64_t n, std::uint64_t replica);

}  // namespace dme
