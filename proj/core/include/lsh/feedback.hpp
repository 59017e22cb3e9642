#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lsh/invariant.hpp"
#include "lsh/robust.hpp"

namespace lsh {

/// Feedback interconnection of two LSH subsystems with equal (n, m):
/// a single LSH system with 2n degrees of freedom and 2m force channels.
struct ClosedLoop {
    LshSystem loop;
    LshSystem s1;
    LshSystem s2;
};

struct SmallGainReport {
    double norm;                    // ||K1^{-1/2} N1^T N2 K2^{-1/2}||
    bool definite;                  // norm < 1  <=>  closed-loop K > 0
    double sufficient_gain_product; // ||Phi1(0)|| ||Phi2(0)||
};

/// Full Theorem-1/robustness screening of the interconnection. When a
/// hypothesis fails, `failures` names the offending matrix and the analysis
/// fields stay empty; no instability claim is made.
struct ClosedLoopReport {
    ClosedLoop loop;
    std::optional<SmallGainReport> small_gain;
    std::vector<std::string> failures;
    bool applicable = false;
    std::optional<EpsWindow> window;
    std::optional<LyapunovCertificate> cert;
    bool hurwitz = false;
    std::optional<InvariantMeasure> invariant;
    std::optional<RobustBound> robust;
};

ClosedLoop compose(const LshSystem& s1, const LshSystem& s2);

SmallGainReport small_gain_check(const LshSystem& s1, const LshSystem& s2);

ClosedLoopReport closed_loop_stability(const LshSystem& s1, const LshSystem& s2,
                                       const std::optional<UncertaintyClass>& uc = std::nullopt,
                                       double second_moment_x0 = 0.0);

}  // namespace lsh
