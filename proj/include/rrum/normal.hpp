#ifndef RRUM_NORMAL_HPP
#define RRUM_NORMAL_HPP

namespace rrum {

/// Standard normal CDF. Absolute error well below 1e-9 over the real line.
double normal_cdf(double x);

/// Standard normal quantile for p in (0,1). Rational approximation plus one
/// Halley refinement against normal_cdf; composed round-trip error < 1e-12.
double normal_quantile(double p);

}  // namespace rrum

#endif  // RRUM_NORMAL_HPP
