#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace repc {

// Invalid arguments or broken call contracts (bad shapes, lattice mismatches,
// out-of-range tokens, ...).
struct contract_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A numeric computation left its supported range (series divergence,
// non-finite intermediate, overflow).
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A sentence has no derivation under the grammar. Distinct from
// contract_error so callers can tell "unparseable" from "malformed input".
struct parse_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed dataset file. Carries the 1-based offending line when known.
struct format_error : std::runtime_error {
    explicit format_error(const std::string& msg, int64_t line = -1)
        : std::runtime_error(line >= 0 ? "line " + std::to_string(line) + ": " + msg : msg),
          line(line) {}
    int64_t line;
};

// Model training failed (divergence, non-finite loss).
struct train_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace repc
