#pragma once

// Central registry of statistical decision thresholds.  Every Monte-Carlo
// check in the library and test suites reads its budget from here so that
// flakiness is controlled in one place and each tolerance documents where it
// comes from.
namespace addwn::thresholds {

// A stochastic bound lhs <= rhs is accepted when lhs <= rhs + 2 se.  Two
// standard errors keep the false-alarm rate of a true bound below ~2.5% per
// report while still detecting an inequality violated by any real margin.
inline constexpr double kBoundSeFactor = 2.0;

// Strict inequalities of the feasibility conditions are decided with this
// symmetric slack: values within the slack of the boundary count as failing
// the strict inequality.  Rationale: the published boundary cases are exact
// rationals whose floating evaluation can land an ulp on either side; the
// slack makes the boundary verdict deterministic, and any genuinely feasible
// pair sits far further from the boundary than 1e-9.
inline constexpr double kRegimeBoundaryTol = 1e-9;

// Permutation count of the two-sample energy test.  500 resamples give a
// p-value resolution of ~0.002, ample for decisions at the 5% level.
inline constexpr int kEnergyDefaultPermutations = 500;
// Below ~100 points per group the energy permutation null is too coarse for
// the 5% decisions made here.
inline constexpr int kEnergyMinSamples = 100;
// Nominal level of all permutation decisions.
inline constexpr double kEnergyAlpha = 0.05;
// Share of matched-law runs that must not reject; with 20 runs at level 5%
// the expected number of false rejections is 1, so demanding >= 90%
// non-rejection leaves two-sigma headroom.
inline constexpr double kNonRejectionShare = 0.90;

// Monte-Carlo localization averages need at least this many replicates for
// the normal-theory 2-se acceptance rule to be meaningful.
inline constexpr int kLocalizationMinReps = 50;

// Pilot-risk rate acceptance: fitted log-log slope target and tolerance.
// The tolerance absorbs the quantization of the coarse resolution to
// divisors of the fine grid plus Monte-Carlo noise at <= 200 replicates.
inline constexpr double kSlopeTarget = -2.0 / 3.0;
inline constexpr double kSlopeTolerance = 0.15;

// Bootstrap resamples for the slope confidence interval; 200 gives stable
// 2.5%/97.5% percentiles at the replicate counts used by the suites.
inline constexpr int kBootstrapResamples = 200;

// Empirical correlations of theoretically independent coordinates must stay
// below this at the replicate counts of the suites (>= 1e4 pooled samples,
// so the null standard error is at most ~0.01).
inline constexpr double kCrossCorrelationLimit = 0.05;

}  // namespace addwn::thresholds
