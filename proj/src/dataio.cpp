#include "anckit/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "anckit/sigproc.hpp"

namespace anckit::dataio {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kObsSchemaVersion = "1";
constexpr const char* kControllerSchemaVersion = "1";

std::string format_from_path(const std::string& path, const std::string& format) {
    if (format != "auto") return format;
    if (fs::is_directory(path)) return "wav-dir";
    const auto dot = path.find_last_of('.');
    const std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
    if (ext == "json") return "json";
    if (ext == "csv") return "csv";
    throw config_error("cannot infer file format of '" + path + "', pass format explicitly");
}

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// --- biquad cascade machinery for the synthetic generator ---

struct Biquad {
    double b0, b1, b2, a1, a2;  // a0 normalized to 1

    void apply(std::vector<double>& x) const {
        double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
        for (double& v : x) {
            const double y = b0 * v + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
            x2 = x1;
            x1 = v;
            y2 = y1;
            y1 = y;
            v = y;
        }
    }
};

Biquad resonant_lowpass(double f, double q, double fs) {
    const double w0 = 2.0 * M_PI * f / fs;
    const double alpha = std::sin(w0) / (2.0 * q);
    const double c = std::cos(w0);
    const double a0 = 1.0 + alpha;
    return Biquad{(1.0 - c) / 2.0 / a0, (1.0 - c) / a0, (1.0 - c) / 2.0 / a0,
                  -2.0 * c / a0, (1.0 - alpha) / a0};
}

Biquad highpass(double f, double q, double fs) {
    const double w0 = 2.0 * M_PI * f / fs;
    const double alpha = std::sin(w0) / (2.0 * q);
    const double c = std::cos(w0);
    const double a0 = 1.0 + alpha;
    return Biquad{(1.0 + c) / 2.0 / a0, -(1.0 + c) / a0, (1.0 + c) / 2.0 / a0,
                  -2.0 * c / a0, (1.0 - alpha) / a0};
}

Biquad low_shelf(double f, double gain_db, double q, double fs) {
    const double A = std::pow(10.0, gain_db / 40.0);
    const double w0 = 2.0 * M_PI * f / fs;
    const double alpha = std::sin(w0) / (2.0 * q);
    const double c = std::cos(w0);
    const double sq = 2.0 * std::sqrt(A) * alpha;
    const double a0 = (A + 1.0) + (A - 1.0) * c + sq;
    return Biquad{A * ((A + 1.0) - (A - 1.0) * c + sq) / a0,
                  2.0 * A * ((A - 1.0) - (A + 1.0) * c) / a0,
                  A * ((A + 1.0) - (A - 1.0) * c - sq) / a0,
                  -2.0 * ((A - 1.0) + (A + 1.0) * c) / a0,
                  ((A + 1.0) + (A - 1.0) * c - sq) / a0};
}

}  // namespace

std::vector<std::vector<cplx>> ObservationSet::response_matrix() const {
    std::vector<std::vector<cplx>> m;
    m.reserve(observations.size());
    for (const Observation& o : observations) m.push_back(o.response);
    return m;
}

void ObservationSet::validate() const {
    grid.validate();
    if (observations.empty()) throw config_error("observation set is empty");
    for (std::size_t i = 0; i < observations.size(); ++i) {
        const Observation& o = observations[i];
        if (o.response.size() != grid.size())
            throw config_error("observation " + std::to_string(i) + " ('" + o.label +
                               "') has " + std::to_string(o.response.size()) +
                               " bins, grid needs " + std::to_string(grid.size()));
        for (const cplx& v : o.response)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                throw config_error("observation " + std::to_string(i) +
                                   " contains a non-finite response value");
        for (double v : o.impulse)
            if (!std::isfinite(v))
                throw config_error("observation " + std::to_string(i) +
                                   " contains a non-finite impulse value");
    }
}

ObservationSet generate_synthetic(const SyntheticFitConfig& config, const FrequencyGrid& grid) {
    grid.validate();
    if (config.num_normal + config.num_loose + config.num_tight == 0)
        throw config_error("synthetic config requests zero observations");
    if (config.delay_samples < 1) throw config_error("delay_samples must be >= 1");
    if (config.loose_shift_lo <= 1.0) throw config_error("loose_shift factors must exceed 1");

    const double fs = grid.sample_rate;
    std::mt19937_64 rng(config.rng_seed);
    auto uniform = [&](double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    };

    ObservationSet set;
    set.grid = grid;
    set.metadata = "synthetic secondary-path family, seed " + std::to_string(config.rng_seed);

    struct Draw {
        std::string label;
    };
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < config.num_normal; ++i) labels.emplace_back("normal");
    for (std::size_t i = 0; i < config.num_loose; ++i) labels.emplace_back("loose");
    for (std::size_t i = 0; i < config.num_tight; ++i) labels.emplace_back("tight");

    for (const std::string& label : labels) {
        const double f_res = uniform(config.resonance_hz_lo, config.resonance_hz_hi);
        const double q_res = uniform(1.8, 3.5);
        const double gain_db = uniform(-2.0, 2.0);

        double f_eff = f_res;
        std::vector<Biquad> chain;
        if (label == "loose") {
            f_eff *= uniform(config.loose_shift_lo, config.loose_shift_hi);
            const double drop = uniform(config.loose_drop_db_lo, config.loose_drop_db_hi);
            chain.push_back(low_shelf(200.0, -drop, 0.8, fs));
        } else if (label == "tight") {
            const double boost = uniform(config.tight_gain_db_lo, config.tight_gain_db_hi);
            chain.push_back(low_shelf(1600.0, boost, 0.7, fs));
        }
        chain.push_back(resonant_lowpass(f_eff, q_res, fs));
        chain.push_back(highpass(30.0, 0.707, fs));

        Observation obs;
        obs.label = label;
        obs.impulse.assign(config.impulse_length, 0.0);
        if (config.delay_samples < config.impulse_length)
            obs.impulse[config.delay_samples] = 1.0;
        for (const Biquad& bq : chain) bq.apply(obs.impulse);
        const double scale = 2.0 * mag_from_db(gain_db) / q_res;
        for (double& v : obs.impulse) v *= scale;
        obs.response = sigproc::evaluate_coeffs(obs.impulse, grid.bins);
        set.observations.push_back(std::move(obs));
    }
    set.validate();
    return set;
}

std::vector<double> mean_impulse(const ObservationSet& set, const std::string& label) {
    std::vector<double> mean;
    std::size_t count = 0;
    for (const Observation& o : set.observations) {
        if (o.label != label) continue;
        if (o.impulse.empty())
            throw config_error("observation labeled '" + label + "' carries no impulse response");
        if (mean.empty()) mean.assign(o.impulse.size(), 0.0);
        if (o.impulse.size() != mean.size())
            throw config_error("impulse length mismatch inside label '" + label + "'");
        for (std::size_t n = 0; n < mean.size(); ++n) mean[n] += o.impulse[n];
        ++count;
    }
    if (count == 0) throw config_error("no observations labeled '" + label + "'");
    for (double& v : mean) v /= static_cast<double>(count);
    return mean;
}

// ---------------------------------------------------------------- JSON / CSV

namespace {

json grid_to_json(const FrequencyGrid& g) {
    return json{{"sample_rate", g.sample_rate}, {"num_bins", g.bins.size()}, {"bins", g.bins}};
}

FrequencyGrid grid_from_json(const json& j) {
    FrequencyGrid g;
    g.sample_rate = j.at("sample_rate").get<double>();
    g.bins = j.at("bins").get<std::vector<double>>();
    g.validate();
    return g;
}

void save_observations_json(const ObservationSet& set, const std::string& path) {
    json j;
    j["version"] = kObsSchemaVersion;
    j["grid"] = grid_to_json(set.grid);
    j["metadata"] = set.metadata;
    json obs = json::array();
    for (const Observation& o : set.observations) {
        json rec;
        rec["label"] = o.label;
        json resp = json::array();
        for (const cplx& v : o.response) resp.push_back(json::array({v.real(), v.imag()}));
        rec["response"] = resp;
        if (!o.impulse.empty()) rec["impulse"] = o.impulse;
        obs.push_back(std::move(rec));
    }
    j["observations"] = std::move(obs);
    std::ofstream out(path);
    if (!out) throw config_error("cannot write " + path);
    out << j.dump() << "\n";
}

ObservationSet load_observations_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot read " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw config_error("invalid observations JSON in " + path + ": " + e.what());
    }
    if (j.at("version").get<std::string>() != kObsSchemaVersion)
        throw config_error("observations schema version mismatch in " + path);
    ObservationSet set;
    set.grid = grid_from_json(j.at("grid"));
    set.metadata = j.value("metadata", "");
    for (const json& rec : j.at("observations")) {
        Observation o;
        o.label = rec.value("label", "other");
        if (rec.contains("impulse")) o.impulse = rec.at("impulse").get<std::vector<double>>();
        if (rec.contains("response")) {
            for (const json& v : rec.at("response"))
                o.response.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
        } else if (!o.impulse.empty()) {
            o.response = sigproc::evaluate_coeffs(o.impulse, set.grid.bins);
        } else {
            throw config_error("observation record without response or impulse in " + path);
        }
        set.observations.push_back(std::move(o));
    }
    set.validate();
    return set;
}

void save_observations_csv(const ObservationSet& set, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw config_error("cannot write " + path);
    bool all_impulse = true;
    std::size_t impulse_len = 0;
    for (const Observation& o : set.observations) {
        if (o.impulse.empty()) all_impulse = false;
        impulse_len = std::max(impulse_len, o.impulse.size());
    }
    for (const Observation& o : set.observations)
        if (all_impulse && o.impulse.size() != impulse_len) all_impulse = false;
    out << "# anckit-observations v" << kObsSchemaVersion
        << " sample_rate=" << fmt17(set.grid.sample_rate) << " num_bins=" << set.grid.size()
        << " data=" << (all_impulse ? "impulse" : "response") << "\n";
    for (const Observation& o : set.observations) {
        out << o.label;
        if (all_impulse) {
            for (double v : o.impulse) out << "," << fmt17(v);
        } else {
            for (const cplx& v : o.response)
                out << "," << fmt17(v.real()) << "," << fmt17(v.imag());
        }
        out << "\n";
    }
}

ObservationSet load_observations_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot read " + path);
    std::string header;
    if (!std::getline(in, header) || header.rfind("# anckit-observations", 0) != 0)
        throw config_error("missing anckit-observations header in " + path);
    double fs = 0.0;
    std::size_t num_bins = 0;
    std::string data_kind;
    {
        std::istringstream hs(header);
        std::string tok;
        while (hs >> tok) {
            if (tok.rfind("sample_rate=", 0) == 0) fs = std::stod(tok.substr(12));
            if (tok.rfind("num_bins=", 0) == 0) num_bins = std::stoul(tok.substr(9));
            if (tok.rfind("data=", 0) == 0) data_kind = tok.substr(5);
        }
    }
    if (fs <= 0.0 || num_bins == 0 || data_kind.empty())
        throw config_error("incomplete observations CSV header in " + path);

    ObservationSet set;
    set.grid = FrequencyGrid::linspaced(fs, num_bins);
    std::string line;
    std::size_t row = 0;
    std::size_t expected_fields = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        ++row;
        std::istringstream ls(line);
        std::string field;
        Observation o;
        std::getline(ls, field, ',');
        o.label = field;
        std::vector<double> vals;
        while (std::getline(ls, field, ',')) vals.push_back(std::stod(field));
        if (expected_fields == 0) expected_fields = vals.size();
        if (vals.size() != expected_fields)
            throw config_error("row " + std::to_string(row) + " ('" + o.label + "') in " + path +
                               " has " + std::to_string(vals.size()) + " values, expected " +
                               std::to_string(expected_fields));
        if (data_kind == "impulse") {
            o.impulse = std::move(vals);
            o.response = sigproc::evaluate_coeffs(o.impulse, set.grid.bins);
        } else {
            if (vals.size() != 2 * num_bins)
                throw config_error("row " + std::to_string(row) + " in " + path +
                                   " does not match 2*num_bins response values");
            for (std::size_t k = 0; k < num_bins; ++k)
                o.response.emplace_back(vals[2 * k], vals[2 * k + 1]);
        }
        set.observations.push_back(std::move(o));
    }
    set.validate();
    return set;
}

// ------------------------------------------------------------------- WAV

std::uint32_t rd_u32(const unsigned char* p) {
    return p[0] | (p[1] << 8) | (p[2] << 16) | (std::uint32_t(p[3]) << 24);
}
std::uint16_t rd_u16(const unsigned char* p) { return p[0] | (p[1] << 8); }

std::pair<std::vector<double>, double> load_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot read " + path);
    std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
    if (buf.size() < 44 || std::memcmp(buf.data(), "RIFF", 4) != 0 ||
        std::memcmp(buf.data() + 8, "WAVE", 4) != 0)
        throw config_error(path + " is not a RIFF/WAVE file");
    std::size_t pos = 12;
    int audio_format = 0, channels = 0, bits = 0;
    double fs = 0.0;
    std::vector<double> samples;
    while (pos + 8 <= buf.size()) {
        const std::string id(reinterpret_cast<const char*>(buf.data() + pos), 4);
        const std::uint32_t size = rd_u32(buf.data() + pos + 4);
        const std::size_t body = pos + 8;
        if (body + size > buf.size()) throw config_error("truncated chunk in " + path);
        if (id == "fmt ") {
            audio_format = rd_u16(buf.data() + body);
            channels = rd_u16(buf.data() + body + 2);
            fs = rd_u32(buf.data() + body + 4);
            bits = rd_u16(buf.data() + body + 14);
        } else if (id == "data") {
            if (channels != 1) throw config_error(path + ": only mono WAV supported");
            if (audio_format == 1 && bits == 16) {
                for (std::size_t i = 0; i + 1 < size; i += 2) {
                    const std::int16_t v =
                        static_cast<std::int16_t>(rd_u16(buf.data() + body + i));
                    samples.push_back(v / 32768.0);
                }
            } else if (audio_format == 1 && bits == 24) {
                for (std::size_t i = 0; i + 2 < size; i += 3) {
                    std::int32_t v = buf[body + i] | (buf[body + i + 1] << 8) |
                                     (buf[body + i + 2] << 16);
                    if (v & 0x800000) v |= ~0xFFFFFF;
                    samples.push_back(v / 8388608.0);
                }
            } else if (audio_format == 3 && bits == 32) {
                for (std::size_t i = 0; i + 3 < size; i += 4) {
                    float f;
                    std::memcpy(&f, buf.data() + body + i, 4);
                    samples.push_back(f);
                }
            } else {
                throw config_error(path + ": unsupported WAV encoding");
            }
        }
        pos = body + size + (size & 1);
    }
    if (samples.empty() || fs <= 0.0) throw config_error(path + ": no audio data found");
    return {samples, fs};
}

ObservationSet load_observations_wav_dir(const std::string& dir) {
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".wav")
            files.push_back(entry.path().string());
    if (files.empty()) throw config_error("no .wav files in " + dir);
    std::sort(files.begin(), files.end());

    ObservationSet set;
    double fs = 0.0;
    for (const std::string& f : files) {
        auto [samples, file_fs] = load_wav(f);
        if (fs == 0.0) {
            fs = file_fs;
            set.grid = FrequencyGrid::linspaced(fs, 1024);
        } else if (fs != file_fs) {
            throw config_error("sample-rate mismatch in " + f);
        }
        Observation o;
        const std::string stem = fs::path(f).stem().string();
        for (const char* label : {"normal", "loose", "tight"})
            if (stem.rfind(label, 0) == 0) o.label = label;
        o.impulse = std::move(samples);
        o.response = sigproc::evaluate_coeffs(o.impulse, set.grid.bins);
        set.observations.push_back(std::move(o));
    }
    set.validate();
    return set;
}

}  // namespace

ObservationSet load_observations(const std::string& path, const std::string& format) {
    const std::string fmt = format_from_path(path, format);
    if (fmt == "json") return load_observations_json(path);
    if (fmt == "csv") return load_observations_csv(path);
    if (fmt == "wav-dir") return load_observations_wav_dir(path);
    throw config_error("unknown observations format '" + fmt + "'");
}

void save_observations(const ObservationSet& set, const std::string& path,
                       const std::string& format) {
    set.validate();
    const std::string fmt = format_from_path(path, format);
    if (fmt == "json") return save_observations_json(set, path);
    if (fmt == "csv") return save_observations_csv(set, path);
    throw config_error("unknown observations format '" + fmt + "' (save supports json/csv)");
}

// ------------------------------------------------------------- controllers

void export_controller(const ControllerFile& c, const std::string& path,
                       const std::string& format) {
    for (double v : c.q)
        if (!std::isfinite(v)) throw config_error("controller has non-finite coefficients");
    const std::string fmt = format_from_path(path, format);
    if (fmt == "json") {
        json j;
        j["version"] = kControllerSchemaVersion;
        j["sample_rate"] = c.sample_rate;
        j["num_taps"] = c.q.size();
        j["q"] = c.q;
        j["internal_model"] = c.internal_model;
        j["model_kind"] = c.model_kind;
        j["provenance"] = json{{"seed", c.seed},
                               {"iterations", c.iterations},
                               {"final_loss", c.final_loss},
                               {"status", c.status}};
        j["design"] = json{{"num_bins", c.num_bins},
                           {"weight_order", c.weight_order},
                           {"weight_peak_db", c.weight_peak_db},
                           {"weight_f_lo", c.weight_f_lo},
                           {"weight_f_hi", c.weight_f_hi}};
        std::ofstream out(path);
        if (!out) throw config_error("cannot write " + path);
        out << j.dump(2) << "\n";
        return;
    }
    if (fmt == "csv") {
        std::ofstream out(path);
        if (!out) throw config_error("cannot write " + path);
        out << "# anckit-controller v" << kControllerSchemaVersion
            << " sample_rate=" << fmt17(c.sample_rate) << " model_kind=" << c.model_kind
            << " status=" << c.status << " seed=" << c.seed << " iterations=" << c.iterations
            << " final_loss=" << fmt17(c.final_loss) << " num_bins=" << c.num_bins
            << " weight_order=" << c.weight_order << " weight_peak_db=" << fmt17(c.weight_peak_db)
            << " weight_f_lo=" << fmt17(c.weight_f_lo) << " weight_f_hi=" << fmt17(c.weight_f_hi)
            << "\n";
        out << "n,q,internal_model\n";
        const std::size_t rows = std::max(c.q.size(), c.internal_model.size());
        for (std::size_t n = 0; n < rows; ++n) {
            out << n << ",";
            if (n < c.q.size()) out << fmt17(c.q[n]);
            out << ",";
            if (n < c.internal_model.size()) out << fmt17(c.internal_model[n]);
            out << "\n";
        }
        return;
    }
    throw config_error("unknown controller format '" + fmt + "'");
}

ControllerFile import_controller(const std::string& path, const std::string& format) {
    const std::string fmt = format_from_path(path, format);
    ControllerFile c;
    if (fmt == "json") {
        std::ifstream in(path);
        if (!in) throw config_error("cannot read " + path);
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw config_error("invalid controller JSON in " + path + ": " + e.what());
        }
        if (j.at("version").get<std::string>() != kControllerSchemaVersion)
            throw config_error("controller schema version mismatch in " + path);
        c.sample_rate = j.at("sample_rate").get<double>();
        c.q = j.at("q").get<std::vector<double>>();
        c.internal_model = j.at("internal_model").get<std::vector<double>>();
        c.model_kind = j.at("model_kind").get<std::string>();
        const json& prov = j.at("provenance");
        c.seed = prov.at("seed").get<unsigned long long>();
        c.iterations = prov.at("iterations").get<std::size_t>();
        c.final_loss = prov.at("final_loss").get<double>();
        c.status = prov.at("status").get<std::string>();
        const json& d = j.at("design");
        c.num_bins = d.at("num_bins").get<std::size_t>();
        c.weight_order = d.at("weight_order").get<int>();
        c.weight_peak_db = d.at("weight_peak_db").get<double>();
        c.weight_f_lo = d.at("weight_f_lo").get<double>();
        c.weight_f_hi = d.at("weight_f_hi").get<double>();
        return c;
    }
    if (fmt == "csv") {
        std::ifstream in(path);
        if (!in) throw config_error("cannot read " + path);
        std::string header;
        if (!std::getline(in, header) || header.rfind("# anckit-controller", 0) != 0)
            throw config_error("missing anckit-controller header in " + path);
        std::istringstream hs(header);
        std::string tok;
        while (hs >> tok) {
            auto val = [&](const char* key) {
                const std::string k = std::string(key) + "=";
                return tok.rfind(k, 0) == 0 ? tok.substr(k.size()) : std::string();
            };
            if (auto v = val("sample_rate"); !v.empty()) c.sample_rate = std::stod(v);
            if (auto v = val("model_kind"); !v.empty()) c.model_kind = v;
            if (auto v = val("status"); !v.empty()) c.status = v;
            if (auto v = val("seed"); !v.empty()) c.seed = std::stoull(v);
            if (auto v = val("iterations"); !v.empty()) c.iterations = std::stoul(v);
            if (auto v = val("final_loss"); !v.empty()) c.final_loss = std::stod(v);
            if (auto v = val("num_bins"); !v.empty()) c.num_bins = std::stoul(v);
            if (auto v = val("weight_order"); !v.empty()) c.weight_order = std::stoi(v);
            if (auto v = val("weight_peak_db"); !v.empty()) c.weight_peak_db = std::stod(v);
            if (auto v = val("weight_f_lo"); !v.empty()) c.weight_f_lo = std::stod(v);
            if (auto v = val("weight_f_hi"); !v.empty()) c.weight_f_hi = std::stod(v);
        }
        std::string line;
        std::getline(in, line);  // column header
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::istringstream ls(line);
            std::string f0, f1, f2;
            std::getline(ls, f0, ',');
            std::getline(ls, f1, ',');
            std::getline(ls, f2, ',');
            if (!f1.empty()) c.q.push_back(std::stod(f1));
            if (!f2.empty()) c.internal_model.push_back(std::stod(f2));
        }
        return c;
    }
    throw config_error("unknown controller format '" + fmt + "'");
}

}  // namespace anckit::dataio
