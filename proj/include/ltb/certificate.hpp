#pragma once

#include <map>
#include <string>

namespace ltb {

enum class ClaimId {
    thm1_case1,
    thm1_case2,
    thm2,
    growth_corollary,
    monotonicity_corollary,
    prop6_box,
    zlambda_bounds,
};

inline const char* to_string(ClaimId id) {
    switch (id) {
        case ClaimId::thm1_case1: return "thm1_case1";
        case ClaimId::thm1_case2: return "thm1_case2";
        case ClaimId::thm2: return "thm2";
        case ClaimId::growth_corollary: return "growth_corollary";
        case ClaimId::monotonicity_corollary: return "monotonicity_corollary";
        case ClaimId::prop6_box: return "prop6_box";
        case ClaimId::zlambda_bounds: return "zlambda_bounds";
    }
    return "?";
}

// Verdict + constants for a theorem-level inequality checked along a trajectory.
// verdict is true iff worst_margin >= 0. A certificate whose hypotheses fail on the
// given data is marked not applicable (verdict meaningless then).
struct BoundCertificate {
    ClaimId claim_id{};
    std::map<std::string, double> constants;
    double z_lo = 0.0;
    double z_hi = 0.0;
    bool verdict = false;
    double worst_margin = 0.0;
    bool applicable = true;
    std::string note;
};

} // namespace ltb
