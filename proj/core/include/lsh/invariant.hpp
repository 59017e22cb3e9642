#pragma once

#include "lsh/stability.hpp"

namespace lsh {

/// Stationary Gaussian covariance Pi of the LSH state under standard Wiener
/// forcing, with its 2x2 block structure and the antisymmetric factor
/// Xi = Pi12 M^{-1}.
struct InvariantMeasure {
    SymMatrix Pi;
    MatrixXd Pi11;
    MatrixXd Pi12;
    MatrixXd Pi22;
    MatrixXd Xi;                 // antisymmetrized for reporting
    double antisymmetry_defect;  // ||Xi_raw + Xi_raw^T||_F before projection
};

/// Stationary energy accounting: E T = -E(q^T f)/2 and trace Pi12 = 0.
struct VirialReport {
    double mean_kinetic;
    double virial_rhs;
    double trace_pi12;
};

struct ControllabilityBound {
    SymMatrix bound_matrix;  // B B^T + A B B^T A^T
    double min_eig;
    bool full_rank_coupling;  // D = N^T N > 0
};

/// Solves A Pi + Pi A^T + B B^T = 0. Requires a Hurwitz A.
InvariantMeasure invariant_covariance(const LshSystem& sys);

/// Frobenius residuals of the (1,1), (1,2), (2,2) block equations of the ALE.
struct SylvesterResiduals {
    double r11;
    double r12;
    double r22;
};
SylvesterResiduals sylvester_residuals(const LshSystem& sys, const InvariantMeasure& meas);

VirialReport virial_check(const LshSystem& sys, const InvariantMeasure& meas);

/// Two-term lower bound on the controllability Gramian; positive definite
/// whenever M > 0 and the coupling has full column rank.
ControllabilityBound controllability_bound(const LshSystem& sys);

}  // namespace lsh
