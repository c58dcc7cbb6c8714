#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "repc/dataset.hpp"
#include "repc/matrix.hpp"

namespace repc::langsys {

struct ObjectWorld {
    int64_t n_attributes = 2;
    int64_t n_values = 8;

    int64_t n_objects() const;
    void validate() const;
    // Mixed-radix digits, first attribute most significant.
    void attributes_of(int64_t object, int32_t* out) const;
    int64_t object_of(const int32_t* attrs) const;
};

enum class LanguageKind { compositional, holistic, noisy };

std::string to_string(LanguageKind kind);

// A total mapping object -> sentence over vocab = n_values, length =
// n_attributes.
//   compositional: token m is a per-position permutation of attribute m.
//   holistic:      a uniformly random bijection objects -> sentences.
//   noisy(p):      compositional, then each object remapped to a uniformly
//                  random sentence with probability p (a graded axis between
//                  the two; not part of the reference constructions).
struct LanguageSystem {
    LanguageKind kind = LanguageKind::compositional;
    double p_swap = 0.0;
    ObjectWorld world;
    TokenMatrix sentence_of;  // n_objects x n_attributes

    static LanguageSystem compositional(const ObjectWorld& world, uint64_t seed);
    static LanguageSystem holistic(const ObjectWorld& world, uint64_t seed);
    static LanguageSystem noisy(const ObjectWorld& world, double p_swap, uint64_t seed);
};

// |O| * repeats records of (sentence, attribute values), shuffled with the
// seed. Symbolic dataset: vocab = classes = n_values, dim = n_attributes.
data::Dataset emit_dataset(const ObjectWorld& world, const LanguageSystem& language,
                           int64_t repeats, uint64_t seed);

// K(Z) for the uniform object code: |O| log2 |O|.
double k_z_uniform_bits(const ObjectWorld& world);

// Per-row variant |O| * repeats * log2 |O|; not the reference convention,
// offered for comparison only.
double k_z_per_row_bits(const ObjectWorld& world, int64_t rows);

// Validated read of an external (sentence, representation) dataset.
data::Dataset ingest_external(const std::string& path);

}  // namespace repc::langsys
