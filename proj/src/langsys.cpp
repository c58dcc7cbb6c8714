#include "repc/langsys.hpp"

#include <cmath>
#include <numeric>

#include "repc/errors.hpp"
#include "repc/rng.hpp"

namespace repc::langsys {

int64_t ObjectWorld::n_objects() const {
    validate();
    int64_t n = 1;
    for (int64_t i = 0; i < n_attributes; ++i) {
        if (n > (int64_t{1} << 56) / n_values) {
            throw contract_error("ObjectWorld: too many objects");
        }
        n *= n_values;
    }
    return n;
}

void ObjectWorld::validate() const {
    if (n_attributes < 1) throw contract_error("ObjectWorld: need at least one attribute");
    if (n_values < 2) throw contract_error("ObjectWorld: need at least two values per attribute");
}

void ObjectWorld::attributes_of(int64_t object, int32_t* out) const {
    for (int64_t m = n_attributes; m-- > 0;) {
        out[m] = static_cast<int32_t>(object % n_values);
        object /= n_values;
    }
}

int64_t ObjectWorld::object_of(const int32_t* attrs) const {
    int64_t o = 0;
    for (int64_t m = 0; m < n_attributes; ++m) o = o * n_values + attrs[m];
    return o;
}

std::string to_string(LanguageKind kind) {
    switch (kind) {
        case LanguageKind::compositional: return "compositional";
        case LanguageKind::holistic: return "holistic";
        case LanguageKind::noisy: return "noisy";
    }
    return "?";
}

namespace {

std::vector<int32_t> permutation(Philox& rng, int64_t n) {
    std::vector<int32_t> p(static_cast<size_t>(n));
    std::iota(p.begin(), p.end(), 0);
    shuffle(rng, p);
    return p;
}

LanguageSystem compositional_mapping(const ObjectWorld& world, Philox& rng) {
    LanguageSystem lang;
    lang.kind = LanguageKind::compositional;
    lang.world = world;
    const int64_t n = world.n_objects();
    std::vector<std::vector<int32_t>> perms;
    for (int64_t m = 0; m < world.n_attributes; ++m) {
        perms.push_back(permutation(rng, world.n_values));
    }
    lang.sentence_of = TokenMatrix(n, world.n_attributes);
    std::vector<int32_t> attrs(static_cast<size_t>(world.n_attributes));
    for (int64_t o = 0; o < n; ++o) {
        world.attributes_of(o, attrs.data());
        for (int64_t m = 0; m < world.n_attributes; ++m) {
            lang.sentence_of.at(o, m) =
                perms[static_cast<size_t>(m)][static_cast<size_t>(attrs[static_cast<size_t>(m)])];
        }
    }
    return lang;
}

}  // namespace

LanguageSystem LanguageSystem::compositional(const ObjectWorld& world, uint64_t seed) {
    Philox rng(seed, make_stream(StreamTag::langsys_mapping));
    return compositional_mapping(world, rng);
}

LanguageSystem LanguageSystem::holistic(const ObjectWorld& world, uint64_t seed) {
    Philox rng(seed, make_stream(StreamTag::langsys_mapping));
    LanguageSystem lang;
    lang.kind = LanguageKind::holistic;
    lang.world = world;
    const int64_t n = world.n_objects();
    // a bijection: sentence of object o spells the digits of a permuted index
    std::vector<int32_t> perm64(static_cast<size_t>(n));
    std::iota(perm64.begin(), perm64.end(), 0);
    shuffle(rng, perm64);
    lang.sentence_of = TokenMatrix(n, world.n_attributes);
    std::vector<int32_t> digits(static_cast<size_t>(world.n_attributes));
    for (int64_t o = 0; o < n; ++o) {
        world.attributes_of(perm64[static_cast<size_t>(o)], digits.data());
        for (int64_t m = 0; m < world.n_attributes; ++m) {
            lang.sentence_of.at(o, m) = digits[static_cast<size_t>(m)];
        }
    }
    return lang;
}

LanguageSystem LanguageSystem::noisy(const ObjectWorld& world, double p_swap, uint64_t seed) {
    if (p_swap < 0.0 || p_swap > 1.0) throw contract_error("noisy: p_swap must be in [0, 1]");
    Philox rng(seed, make_stream(StreamTag::langsys_mapping));
    LanguageSystem lang = compositional_mapping(world, rng);
    lang.kind = LanguageKind::noisy;
    lang.p_swap = p_swap;
    const int64_t n = world.n_objects();
    std::vector<int32_t> digits(static_cast<size_t>(world.n_attributes));
    for (int64_t o = 0; o < n; ++o) {
        if (rng.next_double() < p_swap) {
            const auto target = static_cast<int64_t>(rng.next_below(static_cast<uint64_t>(n)));
            world.attributes_of(target, digits.data());
            for (int64_t m = 0; m < world.n_attributes; ++m) {
                lang.sentence_of.at(o, m) = digits[static_cast<size_t>(m)];
            }
        }
    }
    return lang;
}

data::Dataset emit_dataset(const ObjectWorld& world, const LanguageSystem& language,
                           int64_t repeats, uint64_t seed) {
    world.validate();
    if (repeats < 1) throw contract_error("emit_dataset: repeats must be >= 1");
    if (language.sentence_of.rows != world.n_objects() ||
        language.sentence_of.cols != world.n_attributes) {
        throw contract_error("emit_dataset: language does not cover the world");
    }
    const int64_t n_obj = world.n_objects();
    const int64_t n = n_obj * repeats;

    std::vector<int64_t> object_rows(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) object_rows[static_cast<size_t>(i)] = i / repeats;
    Philox rng(seed, make_stream(StreamTag::langsys_shuffle));
    shuffle(rng, object_rows);

    data::Dataset ds;
    ds.symbolic = true;
    ds.meta.vocab = world.n_values;
    ds.meta.dim = world.n_attributes;
    ds.meta.classes = world.n_values;
    ds.meta.seed = seed;
    ds.meta.generator = "langsys-" + to_string(language.kind);
    ds.w = TokenMatrix(n, world.n_attributes);
    ds.y = TokenMatrix(n, world.n_attributes);
    std::vector<int32_t> attrs(static_cast<size_t>(world.n_attributes));
    for (int64_t i = 0; i < n; ++i) {
        const int64_t o = object_rows[static_cast<size_t>(i)];
        world.attributes_of(o, attrs.data());
        for (int64_t m = 0; m < world.n_attributes; ++m) {
            ds.w.at(i, m) = language.sentence_of.at(o, m);
            ds.y.at(i, m) = attrs[static_cast<size_t>(m)];
        }
    }
    return ds;
}

double k_z_uniform_bits(const ObjectWorld& world) {
    const int64_t n = world.n_objects();
    if (n < 2) throw contract_error("k_z_uniform_bits: need at least two objects");
    return static_cast<double>(n) * std::log2(static_cast<double>(n));
}

double k_z_per_row_bits(const ObjectWorld& world, int64_t rows) {
    if (rows < 1) throw contract_error("k_z_per_row_bits: rows must be >= 1");
    const int64_t n = world.n_objects();
    if (n < 2) throw contract_error("k_z_per_row_bits: need at least two objects");
    return static_cast<double>(rows) * std::log2(static_cast<double>(n));
}

data::Dataset ingest_external(const std::string& path) { return data::read_jsonl(path); }

}  // namespace repc::langsys
