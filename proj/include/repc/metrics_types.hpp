#pragma once

#include "repc/errors.hpp"

namespace repc::metrics {

// The four bit counts of the two-part program that writes Z through sentences:
// numerator of the compositionality ratio is their sum, denominator is the
// semantics part K(f) + K(Z|W,f).
struct ComplexityBreakdown {
    double k_pw = 0.0;
    double k_w_given_pw = 0.0;
    double k_f = 0.0;
    double k_z_given_wf = 0.0;

    double numerator() const { return k_pw + k_w_given_pw + k_f + k_z_given_wf; }
    double denominator() const { return k_f + k_z_given_wf; }

    void validate() const {
        if (k_pw < 0.0 || k_w_given_pw < 0.0 || k_f < 0.0 || k_z_given_wf < 0.0) {
            throw contract_error("ComplexityBreakdown: all terms must be nonnegative");
        }
    }
};

}  // namespace repc::metrics
