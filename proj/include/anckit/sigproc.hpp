#ifndef ANCKIT_SIGPROC_HPP
#define ANCKIT_SIGPROC_HPP

#include <vector>

#include "anckit/types.hpp"

namespace anckit::sigproc {

/// Q_k = sum_n q(n) e^{-j n omega_k} for every grid bin.
/// Throws config_error on sample-rate mismatch.
std::vector<cplx> evaluate_fir(const FirFilter& filter, const FrequencyGrid& grid);

/// Same transform for an arbitrary real coefficient vector (no rate check).
std::vector<cplx> evaluate_coeffs(const std::vector<double>& coeffs,
                                  const std::vector<double>& bins);

/// Analog-prototype Butterworth bandpass magnitude weight:
///   |W(f)|^2 = Gp^2 / (1 + ((f^2 - f0^2)/(f B))^order),
/// f0 = sqrt(f_lo*f_hi), B chosen so |W(f_lo)| = |W(f_hi)| = 1 exactly.
PerformanceWeight butterworth_bandpass_weight(const FrequencyGrid& grid, int order,
                                              double peak_gain_db, double f_lo,
                                              double f_hi);

/// Mean of ln|S| over a full-circle sample set. Any |S| == 0 reports the
/// degenerate -inf guard value.
double waterbed_functional(const std::vector<cplx>& full_circle_sensitivity);

/// Evaluate the polynomial with the given real coefficients on the uniform
/// full-circle grid omega_j = 2 pi j / M, j = 0..M-1.
std::vector<cplx> full_circle_response(const std::vector<double>& coeffs, std::size_t M);

/// Mean over the unit circle of ln|1 - Q(e^{jw}) Ghat(e^{jw})| evaluated on
/// the uniform 2(K+1)-point circle for a K-bin default grid.
double waterbed_of_design(const std::vector<double>& q, const std::vector<double>& ghat,
                          std::size_t num_half_bins);

/// 1/B-octave smoothing of a dB magnitude curve: each bin becomes the mean of
/// dB values whose frequencies lie within +-1/(2B) octave (truncated windows
/// at the grid edges).
std::vector<double> octave_smooth(const std::vector<double>& magnitude_db,
                                  const FrequencyGrid& grid, double fraction);

}  // namespace anckit::sigproc

#endif
