#ifndef RRUM_ANALYSIS_HPP
#define RRUM_ANALYSIS_HPP

#include <span>
#include <string>
#include <vector>

#include "rrum/common.hpp"
#include "rrum/patterns.hpp"
#include "rrum/sampler.hpp"

namespace rrum {

/// Posterior marginal mean of each alpha_ik over the stored draws (I x K).
Matrix alpha_marginal_mean(const ChainDraws& draws);

/// Most frequently sampled pattern per examinee; ties break to the lower
/// index so summaries are deterministic.
std::vector<std::uint32_t> modal_patterns(const ChainDraws& draws);

struct RecoveryReport {
  double delta_alpha = 0.0;
  std::vector<double> per_replicate;
};

/// Mean proportion of attribute cells recovered after rounding each
/// real-valued estimate matrix (ties at 0.5 round up) against the truth.
RecoveryReport delta_alpha(const std::vector<Matrix>& estimates,
                           const AttributeMatrix& truth);

/// How examinees are assigned to patterns for the rate report:
/// by their modal sampled pattern, by rounding the marginal mastery
/// means, or by averaging each draw's pattern frequencies (the average
/// posterior membership probability per pattern).
enum class ClassificationMode { modal_pattern, rounded_marginal, draw_average };

struct ClassificationReport {
  std::vector<double> rates;  // length M, sums to 1
  ClassificationMode mode = ClassificationMode::modal_pattern;
};

/// Share of examinees classified into each of the M patterns.
ClassificationReport classification_rates(
    const ChainDraws& draws,
    ClassificationMode mode = ClassificationMode::modal_pattern);

struct ParamSummary {
  std::vector<double> pi_mean, pi_sd;
  Matrix r_mean, r_sd;  // J x K, NaN where masked
  std::vector<double> theta_mean;
};

ParamSummary summarize_params(const ChainDraws& draws, const QMatrix& q);

/// Mean difference between the first 10% and last 50% of a trace, scaled by
/// the estimated standard error of the difference.
double geweke_z(std::span<const double> trace);

/// Effective draw count from the autocorrelation sum (Geyer initial
/// positive-sequence truncation), clamped to [1, n].
double effective_sample_size(std::span<const double> trace);

struct ScalarDiagnostic {
  std::string name;
  double acceptance = 0.0;
  double z = 0.0;
  double ess = 0.0;
  bool flagged = false;  // |z| > 2.58
};

struct DiagnosticsReport {
  std::vector<ScalarDiagnostic> params;
  double overall_acceptance = 0.0;
  int flagged_count = 0;
};

/// Acceptance rates plus a stationarity screen over every pi* and masked r*
/// trace.
DiagnosticsReport diagnose(const ChainDraws& draws);

}  // namespace rrum

#endif  // RRUM_ANALYSIS_HPP
