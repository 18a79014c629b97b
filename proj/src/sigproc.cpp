#include "anckit/sigproc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace anckit {

FrequencyGrid FrequencyGrid::linspaced(double sample_rate, std::size_t num_bins) {
    if (sample_rate <= 0.0) throw config_error("sample_rate must be positive");
    if (num_bins == 0) throw config_error("num_bins must be >= 1");
    FrequencyGrid g;
    g.sample_rate = sample_rate;
    g.bins.resize(num_bins);
    for (std::size_t k = 0; k < num_bins; ++k)
        g.bins[k] = M_PI * static_cast<double>(k + 1) / static_cast<double>(num_bins + 1);
    return g;
}

void FrequencyGrid::validate() const {
    if (sample_rate <= 0.0) throw config_error("grid sample_rate must be positive");
    if (bins.empty()) throw config_error("grid has no bins");
    double prev = 0.0;
    for (double w : bins) {
        if (!(w > prev && w < M_PI))
            throw config_error("grid bins must be strictly increasing in (0, pi)");
        prev = w;
    }
}

void FirFilter::validate() const {
    if (coefficients.empty()) throw config_error("FIR filter needs at least one tap");
    for (double c : coefficients)
        if (!std::isfinite(c)) throw config_error("FIR coefficients must be finite");
}

namespace sigproc {

std::vector<cplx> evaluate_coeffs(const std::vector<double>& coeffs,
                                  const std::vector<double>& bins) {
    std::vector<cplx> out(bins.size());
    for (std::size_t k = 0; k < bins.size(); ++k) {
        // Horner evaluation in z^{-1} = e^{-j omega}
        const cplx zinv = std::polar(1.0, -bins[k]);
        cplx acc = 0.0;
        for (std::size_t n = coeffs.size(); n-- > 0;) acc = acc * zinv + coeffs[n];
        out[k] = acc;
    }
    return out;
}

std::vector<cplx> evaluate_fir(const FirFilter& filter, const FrequencyGrid& grid) {
    filter.validate();
    grid.validate();
    if (filter.sample_rate != grid.sample_rate)
        throw config_error("filter/grid sample rate mismatch");
    return evaluate_coeffs(filter.coefficients, grid.bins);
}

PerformanceWeight butterworth_bandpass_weight(const FrequencyGrid& grid, int order,
                                              double peak_gain_db, double f_lo,
                                              double f_hi) {
    grid.validate();
    if (order < 2 || order % 2 != 0) throw config_error("Butterworth order must be even and >= 2");
    if (!(f_lo > 0.0 && f_lo < f_hi)) throw config_error("need 0 < f_lo < f_hi");
    if (f_hi >= grid.sample_rate / 2.0) throw config_error("f_hi must be below Nyquist");

    const double gp = mag_from_db(peak_gain_db);
    const double gp2 = gp * gp;
    if (gp2 <= 1.0) throw config_error("peak gain must exceed 0 dB");
    const double f0sq = f_lo * f_hi;
    // |W(f_lo)|^2 = 1  =>  ((f0^2 - f_lo^2)/(f_lo B))^order = gp^2 - 1
    const double bw = (f_hi - f_lo) / std::pow(gp2 - 1.0, 1.0 / order);

    PerformanceWeight w;
    w.magnitudes.resize(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double f = grid.freq_hz(k);
        const double x = (f * f - f0sq) / (f * bw);
        w.magnitudes[k] = gp / std::sqrt(1.0 + std::pow(std::abs(x), order));
    }
    return w;
}

double waterbed_functional(const std::vector<cplx>& s) {
    if (s.empty()) throw config_error("empty sensitivity vector");
    double acc = 0.0;
    for (const cplx& v : s) {
        const double m = std::abs(v);
        if (m == 0.0) return -std::numeric_limits<double>::infinity();
        acc += std::log(m);
    }
    return acc / static_cast<double>(s.size());
}

std::vector<cplx> full_circle_response(const std::vector<double>& coeffs, std::size_t M) {
    std::vector<cplx> out(M);
    for (std::size_t j = 0; j < M; ++j) {
        const cplx zinv = std::polar(1.0, -2.0 * M_PI * static_cast<double>(j) / M);
        cplx acc = 0.0;
        for (std::size_t n = coeffs.size(); n-- > 0;) acc = acc * zinv + coeffs[n];
        out[j] = acc;
    }
    return out;
}

namespace {

// iterative radix-2 FFT, in place, size must be a power of two
void fft_pow2(std::vector<cplx>& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const cplx wl = std::polar(1.0, -2.0 * M_PI / static_cast<double>(len));
        for (std::size_t i = 0; i < n; i += len) {
            cplx w = 1.0;
            for (std::size_t k = 0; k < len / 2; ++k) {
                const cplx u = a[i + k], v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

double mean_log_mag(const std::vector<double>& s, std::size_t m) {
    std::vector<cplx> a(m, 0.0);
    for (std::size_t n = 0; n < s.size(); ++n) a[n] = s[n];
    fft_pow2(a);
    return waterbed_functional(a);
}

}  // namespace

double waterbed_of_design(const std::vector<double>& q, const std::vector<double>& ghat,
                          std::size_t num_half_bins) {
    // coefficients of S(z) = 1 - Q(z) Ghat(z)
    std::vector<double> s(q.size() + ghat.size() - 1, 0.0);
    if (s.empty()) s.resize(1, 0.0);
    for (std::size_t a = 0; a < q.size(); ++a)
        for (std::size_t b = 0; b < ghat.size(); ++b) s[a + b] -= q[a] * ghat[b];
    if (s.empty()) s.push_back(0.0);
    s[0] += 1.0;
    // quadrature of mean ln|S| over the circle: refine until the estimate
    // settles (ln|S| dips sharpen near sensitivity notches, so the nominal
    // grid density can undershoot badly)
    std::size_t m = 1;
    while (m < 2 * (num_half_bins + 1) || m < 4 * s.size()) m <<= 1;
    double est = mean_log_mag(s, m);
    for (int i = 0; i < 12 && m < (std::size_t(1) << 20); ++i) {
        m <<= 1;
        const double next = mean_log_mag(s, m);
        const bool settled = std::abs(next - est) < 1e-8;
        est = next;
        if (settled) break;
    }
    return est;
}

std::vector<double> octave_smooth(const std::vector<double>& magnitude_db,
                                  const FrequencyGrid& grid, double fraction) {
    if (fraction <= 0.0) throw config_error("octave fraction must be positive");
    if (magnitude_db.size() != grid.size())
        throw config_error("magnitude/grid length mismatch");
    const double half_window = std::log(2.0) / (2.0 * fraction);  // in ln(f)
    const std::size_t K = grid.size();
    std::vector<double> u(K);
    for (std::size_t k = 0; k < K; ++k) u[k] = std::log(grid.freq_hz(k));

    // Trapezoid average of magnitude_db over ln(f) in [u_k - h, u_k + h],
    // clipped to the grid range; linear-in-ln(f) curves pass through unchanged.
    auto value_at = [&](double uu, std::size_t hint) {
        std::size_t i = hint;
        while (i + 1 < K && u[i + 1] < uu) ++i;
        if (i + 1 >= K) return magnitude_db[K - 1];
        const double t = (uu - u[i]) / (u[i + 1] - u[i]);
        return magnitude_db[i] * (1.0 - t) + magnitude_db[i + 1] * t;
    };

    std::vector<double> out(K);
    for (std::size_t k = 0; k < K; ++k) {
        if (K == 1) {
            out[k] = magnitude_db[0];
            continue;
        }
        const double a = std::max(u[k] - half_window, u.front());
        const double b = std::min(u[k] + half_window, u.back());
        if (b <= a) {
            out[k] = magnitude_db[k];
            continue;
        }
        std::size_t lo = k;
        while (lo > 0 && u[lo - 1] > a) --lo;
        double acc = 0.0;
        double prev_u = a, prev_v = value_at(a, lo > 0 ? lo - 1 : 0);
        for (std::size_t i = lo; i < K && u[i] < b; ++i) {
            if (u[i] <= a) continue;
            acc += 0.5 * (prev_v + magnitude_db[i]) * (u[i] - prev_u);
            prev_u = u[i];
            prev_v = magnitude_db[i];
        }
        const double vb = value_at(b, lo > 0 ? lo - 1 : 0);
        acc += 0.5 * (prev_v + vb) * (b - prev_u);
        out[k] = acc / (b - a);
    }
    return out;
}

}  // namespace sigproc
}  // namespace anckit
