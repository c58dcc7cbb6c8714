#pragma once

#include <cstdint>
#include <vector>

#include "repc/errors.hpp"

namespace repc {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11 constants).
//
// A fixed 64-bit key is derived from the seed; the 128-bit counter is split
// into a 64-bit stream id (high words) and a 64-bit block index (low words).
// Every (seed, stream) pair therefore yields an independent, never-overlapping
// sequence, which is what lets sweep rows and table rows sample in parallel
// while staying bit-reproducible.
class Philox {
  public:
    explicit Philox(uint64_t seed, uint64_t stream = 0);

    uint32_t next_u32();
    uint64_t next_u64();

    // Uniform on [0,1), 53 random bits.
    double next_double();
    // Uniform on (0,1); safe to pass to log().
    double next_double_open();
    // Unbiased uniform integer in [0,n); requires n >= 1.
    uint64_t next_below(uint64_t n);

    uint64_t seed() const { return seed_; }
    uint64_t stream() const { return stream_; }

  private:
    void refill();

    uint64_t seed_ = 0;
    uint64_t stream_ = 0;
    uint32_t key_[2] = {0, 0};
    uint32_t ctr_[4] = {0, 0, 0, 0};
    uint32_t out_[4] = {0, 0, 0, 0};
    int have_ = 0;
};

// Stream-id layout: task tag in the top byte, element index below. Keeps the
// independent sampling tasks of one run on disjoint streams.
enum class StreamTag : uint64_t {
    generic = 0,
    lookup_table_row = 1,
    lookup_sentences = 2,
    lookup_noise = 3,
    grammar_sentences = 4,
    grammar_embeddings = 5,
    grammar_rule_maps = 6,
    grammar_noise = 7,
    langsys_mapping = 8,
    langsys_shuffle = 9,
    nn_init = 10,
    nn_epoch_order = 11,
    preq_stage = 12,
    metrics_pairs = 13,
    sweep_row = 14,
};

constexpr uint64_t make_stream(StreamTag tag, uint64_t index = 0) {
    return (static_cast<uint64_t>(tag) << 56) | (index & ((uint64_t{1} << 56) - 1));
}

// Poisson draw. Inversion by multiplication below mu = 10, Hormann's PTRS
// transformed rejection above. Variable uniform consumption per draw, but
// deterministic for a given generator state.
int64_t sample_poisson(Philox& g, double mu);

template <typename T>
void shuffle(Philox& g, std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
        const size_t j = static_cast<size_t>(g.next_below(i));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace repc
