#ifndef ANCKIT_TYPES_HPP
#define ANCKIT_TYPES_HPP

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace anckit {

using cplx = std::complex<double>;

/// Thrown when inputs violate an operation's preconditions (bad files,
/// mismatched grids, out-of-range parameters).
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// K normalized angular frequencies 0 < omega_k < pi on a shared sample rate.
///
/// The default layout places bin k (1-based) at omega_k = pi*k/(K+1), i.e.
/// linearly spaced with both endpoints excluded. Extending by conjugate
/// symmetry plus {0, pi} then yields a uniform 2(K+1)-point full-circle grid,
/// which the waterbed functional relies on.
struct FrequencyGrid {
    double sample_rate = 0.0;
    std::vector<double> bins;  // normalized angular frequency, strictly increasing

    static FrequencyGrid linspaced(double sample_rate, std::size_t num_bins);

    std::size_t size() const { return bins.size(); }
    double freq_hz(std::size_t k) const { return bins[k] * sample_rate / (2.0 * M_PI); }

    void validate() const;
};

/// Real FIR filter q(0..N-1). The frequency response convention is the
/// forward transform Q(omega) = sum_n q(n) e^{-j n omega}, everywhere.
struct FirFilter {
    std::vector<double> coefficients;
    double sample_rate = 0.0;

    std::size_t size() const { return coefficients.size(); }
    void validate() const;
};

/// Per-bin nonnegative weight magnitudes |W_k| on a linear scale.
struct PerformanceWeight {
    std::vector<double> magnitudes;
};

inline double db_from_mag(double mag) { return 20.0 * std::log10(mag); }
inline double mag_from_db(double db) { return std::pow(10.0, db / 20.0); }

}  // namespace anckit

#endif
