// pybind11 bindings: file-oriented pipeline entry points mirroring the CLI
// plus a handful of in-memory numeric helpers.

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "anckit/analysis.hpp"
#include "anckit/constraints.hpp"
#include "anckit/dataio.hpp"
#include "anckit/geometry.hpp"
#include "anckit/optimizer.hpp"
#include "anckit/sigproc.hpp"
#include "anckit/uncertainty.hpp"

namespace py = pybind11;
using namespace anckit;

namespace {

py::dict design_to_file(const std::string& observations, const std::string& model_path,
                        const std::string& out, std::size_t taps, double tol,
                        std::size_t max_outer) {
    const dataio::ObservationSet set = dataio::load_observations(observations);
    const uncertainty::UncertaintyModel model = uncertainty::load_model(model_path);

    optimizer::DesignSpec spec;
    spec.grid = model.grid;
    spec.model = model;
    spec.internal_model = dataio::mean_impulse(set);
    spec.num_taps = taps;
    spec.weight = sigproc::butterworth_bandpass_weight(spec.grid, 8, 31.0, 40.0, 1000.0);
    spec.solver.tol_rel = tol;
    spec.solver.max_outer = max_outer;

    optimizer::OptimizationResult result;
    if (model.kind == uncertainty::ModelKind::norm_bounded) {
        result = optimizer::solve(spec);
    } else {
        const uncertainty::UncertaintyModel disks = uncertainty::fit_models(
            set.grid, set.response_matrix(), uncertainty::ModelKind::norm_bounded);
        result = optimizer::warm_start_ladder(spec, disks);
    }

    dataio::ControllerFile file;
    file.q = result.design.w;
    file.internal_model = spec.internal_model;
    file.sample_rate = spec.grid.sample_rate;
    file.model_kind = uncertainty::to_string(model.kind);
    file.status = optimizer::to_string(result.status);
    file.iterations = result.iterations;
    file.final_loss = result.design.loss;
    file.num_bins = spec.grid.size();
    dataio::export_controller(file, out);

    py::dict d;
    d["status"] = file.status;
    d["loss"] = file.final_loss;
    d["iterations"] = file.iterations;
    d["q"] = file.q;
    return d;
}

py::dict verify_files(const std::string& controller, const std::string& observations,
                      const std::string& model_path, const std::string& out_dir) {
    const dataio::ControllerFile ctl = dataio::import_controller(controller);
    const dataio::ObservationSet set = dataio::load_observations(observations);
    const uncertainty::UncertaintyModel model = uncertainty::load_model(model_path);
    const analysis::VerificationReport rep =
        analysis::verify_design(ctl.q, ctl.internal_model, set, model);
    if (!out_dir.empty()) analysis::emit_report(rep, out_dir);
    std::size_t stable = 0;
    for (char s : rep.stable) stable += s ? 1 : 0;
    py::dict d;
    d["stable"] = stable;
    d["total"] = rep.stable.size();
    d["transition_stable"] = rep.transition_stable;
    d["waterbed"] = rep.waterbed;
    d["mean_db"] = rep.mean_db;
    d["margins"] = rep.margins;
    return d;
}

}  // namespace

PYBIND11_MODULE(_anckit, m) {
    m.doc() = "robust feedback ANC design toolkit";

    m.def(
        "generate",
        [](const std::string& out, double fs, std::size_t bins, unsigned long long seed,
           std::size_t impulse_length) {
            dataio::SyntheticFitConfig cfg;
            cfg.rng_seed = seed;
            cfg.impulse_length = impulse_length;
            const auto set =
                dataio::generate_synthetic(cfg, FrequencyGrid::linspaced(fs, bins));
            dataio::save_observations(set, out);
            return set.num_observations();
        },
        py::arg("out"), py::arg("fs") = 48000.0, py::arg("bins") = 1024, py::arg("seed") = 7,
        py::arg("impulse_length") = 4096);

    m.def(
        "fit",
        [](const std::string& observations, const std::string& out, const std::string& kind) {
            const auto set = dataio::load_observations(observations);
            const auto model = uncertainty::fit_models(
                set.grid, set.response_matrix(), uncertainty::model_kind_from_string(kind));
            uncertainty::save_model(model, out);
            return model.bins.size();
        },
        py::arg("observations"), py::arg("out"), py::arg("kind") = "convex_hull");

    m.def("design", &design_to_file, py::arg("observations"), py::arg("model"), py::arg("out"),
          py::arg("taps") = 256, py::arg("tol") = 1e-6, py::arg("max_outer") = 40);

    m.def("verify", &verify_files, py::arg("controller"), py::arg("observations"),
          py::arg("model"), py::arg("out_dir") = "");

    m.def(
        "evaluate_fir",
        [](const std::vector<double>& coeffs, const std::vector<double>& omegas) {
            return sigproc::evaluate_coeffs(coeffs, omegas);
        },
        py::arg("coeffs"), py::arg("omegas"), "frequency response sum_n c_n e^{-j n omega}");

    m.def(
        "grid_omegas",
        [](double fs, std::size_t bins) { return FrequencyGrid::linspaced(fs, bins).bins; },
        py::arg("fs") = 48000.0, py::arg("bins") = 1024);

    m.def(
        "smallest_circle",
        [](const std::vector<cplx>& pts) {
            const auto d = geometry::smallest_circle(pts);
            return py::make_tuple(d.center, d.radius);
        },
        py::arg("points"));

    m.def(
        "min_area_ellipse",
        [](const std::vector<cplx>& pts) {
            const auto e = geometry::min_area_ellipse(pts);
            py::dict d;
            d["center"] = e.center;
            d["semi_major"] = e.semi_major;
            d["semi_minor"] = e.semi_minor;
            d["angle"] = e.angle;
            return d;
        },
        py::arg("points"));

    m.def(
        "disk_constraint",
        [](cplx q, cplx center, double radius, cplx ghat) {
            return constraints::constraint_disk(q, geometry::Disk{center, radius}, ghat);
        },
        py::arg("q"), py::arg("center"), py::arg("radius"), py::arg("ghat"),
        "negative iff the critical point is excluded from the disk image");

    m.def(
        "waterbed",
        [](const std::vector<double>& q, const std::vector<double>& ghat, std::size_t bins) {
            return sigproc::waterbed_of_design(q, ghat, bins);
        },
        py::arg("q"), py::arg("ghat"), py::arg("bins") = 2048);
}
