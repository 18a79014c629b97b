#ifndef ANCKIT_DATAIO_HPP
#define ANCKIT_DATAIO_HPP

#include <optional>
#include <string>
#include <vector>

#include "anckit/types.hpp"
#include "anckit/uncertainty.hpp"

namespace anckit::dataio {

struct Observation {
    std::string label = "other";  // normal | loose | tight | other
    std::vector<cplx> response;   // length K, on the set's grid
    std::vector<double> impulse;  // optional time-domain response (empty if unknown)
};

struct ObservationSet {
    FrequencyGrid grid;
    std::vector<Observation> observations;
    std::string metadata;

    std::size_t num_observations() const { return observations.size(); }
    std::vector<std::vector<cplx>> response_matrix() const;
    void validate() const;
};

/// Deterministic synthetic secondary-path family: per observation a pure
/// delay in cascade with a resonant second-order section and a broadband
/// driver section. Loose fits shift the resonance up and attenuate below
/// 200 Hz; tight fits add a broadband low-shelf boost below 1 kHz.
struct SyntheticFitConfig {
    std::size_t num_normal = 12;
    std::size_t num_loose = 6;
    std::size_t num_tight = 6;
    double resonance_hz_lo = 90.0;
    double resonance_hz_hi = 170.0;
    double loose_shift_lo = 1.4;   // resonance shift factor, > 1
    double loose_shift_hi = 2.4;
    double loose_drop_db_lo = 10.0;  // low-frequency attenuation below 200 Hz
    double loose_drop_db_hi = 22.0;
    double tight_gain_db_lo = 6.0;  // broadband boost below 1 kHz
    double tight_gain_db_hi = 6.0;
    std::size_t delay_samples = 2;  // >= 1, keeps the internal model strictly delayed
    std::size_t impulse_length = 4096;
    unsigned long long rng_seed = 7;
};

ObservationSet generate_synthetic(const SyntheticFitConfig& config, const FrequencyGrid& grid);

ObservationSet load_observations(const std::string& path, const std::string& format = "auto");
void save_observations(const ObservationSet& set, const std::string& path,
                       const std::string& format = "auto");

/// Mean impulse response over observations with the given label (used as the
/// internal model of the design pipeline). Requires impulse data.
std::vector<double> mean_impulse(const ObservationSet& set, const std::string& label = "normal");

struct ControllerFile {
    std::vector<double> q;
    std::vector<double> internal_model;
    double sample_rate = 0.0;
    std::string model_kind;
    std::string status;
    unsigned long long seed = 0;
    std::size_t iterations = 0;
    double final_loss = 0.0;
    // design parameters sufficient to recompute the loss
    std::size_t num_bins = 0;
    int weight_order = 8;
    double weight_peak_db = 31.0;
    double weight_f_lo = 40.0;
    double weight_f_hi = 1000.0;
};

void export_controller(const ControllerFile& design, const std::string& path,
                       const std::string& format = "auto");
ControllerFile import_controller(const std::string& path, const std::string& format = "auto");

}  // namespace anckit::dataio

#endif
