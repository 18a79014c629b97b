#ifndef ANCKIT_ANALYSIS_HPP
#define ANCKIT_ANALYSIS_HPP

#include <string>
#include <vector>

#include "anckit/constraints.hpp"
#include "anckit/dataio.hpp"
#include "anckit/types.hpp"
#include "anckit/uncertainty.hpp"

namespace anckit::analysis {

/// Closed-loop sensitivity in the stable algebraic form
///   S_k = (1 - Ghat_k Q_k) / (1 + Q_k (G_k - Ghat_k)),
/// which equals 1 - Q Ghat exactly at G = Ghat and avoids the near-singular
/// division of C = Q/(1 - Ghat Q). Bins where the denominator magnitude drops
/// below 1e-12 are appended to on_boundary (if given).
std::vector<cplx> closed_loop_response(const std::vector<cplx>& q_resp,
                                       const std::vector<cplx>& ghat_resp,
                                       const std::vector<cplx>& plant_resp,
                                       std::vector<std::size_t>* on_boundary = nullptr);

enum class Excitation { impulse, noise };

struct SimulationResult {
    std::vector<double> error;  // residual e(n)
    bool stable = false;
    double tail_ratio = 0.0;             // tail energy / head energy
    std::size_t overflow_index = 0;      // first overflow sample (stable == false)
    bool overflowed = false;
};

/// Sample-by-sample IMC loop recursion:
///   e(n) = d(n) - (g * u)(n),  v(n) = e(n) + (ghat * u)(n),  u(n) = (q * v)(n).
/// Requires plant[0] == 0 and ghat[0] == 0 (one-sample loop delay). Stable
/// verdict: last-10%% error energy < 1e-10 x first-10%% energy; horizon must
/// be >= 8 x max(len(q), len(plant)).
SimulationResult simulate_closed_loop(const std::vector<double>& q,
                                      const std::vector<double>& ghat,
                                      const std::vector<double>& plant,
                                      Excitation excitation, std::size_t horizon,
                                      unsigned long long noise_seed = 0);

/// Fit-transition test: the plant cross-fades linearly from plant_a to
/// plant_b over the middle third of the horizon.
SimulationResult simulate_transition(const std::vector<double>& q,
                                     const std::vector<double>& ghat,
                                     const std::vector<double>& plant_a,
                                     const std::vector<double>& plant_b,
                                     Excitation excitation, std::size_t horizon,
                                     unsigned long long noise_seed = 0);

struct VerificationReport {
    FrequencyGrid grid;
    std::string model_kind;
    // signed per-bin geometric margin: min over sampled set boundary of
    // |1 + Q (G - Ghat)|, negated when the critical point is NOT excluded
    std::vector<double> margins;
    std::vector<std::string> labels;                  // per observation
    std::vector<std::vector<double>> closed_loop_db;  // [observation][bin]
    std::vector<char> stable;                         // per observation verdict
    std::vector<double> mean_db;                      // decibel-averaged curve
    std::vector<double> mean_db_smoothed;             // 1/6-octave smoothed
    std::vector<double> areas;                        // model area per bin
    double waterbed = 0.0;
    bool transition_stable = true;
    double runtime_seconds = 0.0;

    bool all_stable() const;
};

/// Full verification of a controller against an observation set and the
/// uncertainty model it was designed for: geometric margins at every bin,
/// closed-loop curves and time-domain verdicts per observation, a loose/tight
/// cross-fade transition run, the waterbed functional, and model areas.
VerificationReport verify_design(const std::vector<double>& q,
                                 const std::vector<double>& ghat_fir,
                                 const dataio::ObservationSet& set,
                                 const uncertainty::UncertaintyModel& model,
                                 const constraints::ConstraintConfig& config = {});

struct AttenuationSummary {
    double peak_attenuation_db = 0.0;  // most negative smoothed mean dB
    double peak_frequency_hz = 0.0;
    double overshoot_db = 0.0;  // max smoothed mean dB above 1 kHz
};

AttenuationSummary attenuation_metrics(const VerificationReport& report);

/// Per-bin dB improvement of report b over report a (mean curves, a - b).
std::vector<double> improvement_curve(const VerificationReport& a,
                                      const VerificationReport& b);

/// Writes report.csv (model, observation, bin, f, |S| dB, margin), areas.csv,
/// and self-contained SVG line plots into out_dir.
void emit_report(const VerificationReport& report, const std::string& out_dir);

}  // namespace anckit::analysis

#endif
