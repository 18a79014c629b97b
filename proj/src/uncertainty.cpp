#include "anckit/uncertainty.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

namespace anckit::uncertainty {

using geometry::ConvexHull2D;
using geometry::Disk;
using geometry::Ellipse;
using geometry::HalfSpace;
using geometry::MultiDisk;
using nlohmann::json;

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::norm_bounded: return "norm_bounded";
        case ModelKind::multi_disk: return "multi_disk";
        case ModelKind::elliptic: return "elliptic";
        case ModelKind::convex_hull: return "convex_hull";
    }
    throw config_error("unknown model kind");
}

ModelKind model_kind_from_string(const std::string& name) {
    if (name == "norm_bounded") return ModelKind::norm_bounded;
    if (name == "multi_disk") return ModelKind::multi_disk;
    if (name == "elliptic") return ModelKind::elliptic;
    if (name == "convex_hull") return ModelKind::convex_hull;
    throw config_error("unknown model kind '" + name + "'");
}

namespace {

std::size_t min_observations(ModelKind kind) {
    switch (kind) {
        case ModelKind::norm_bounded: return 1;
        case ModelKind::multi_disk: return 1;
        case ModelKind::elliptic: return 2;
        case ModelKind::convex_hull: return 3;
    }
    return 1;
}

double wrap_angle_pi(double theta) {
    theta = std::fmod(theta, M_PI);
    if (theta < 0.0) theta += M_PI;
    return theta;
}

double wrap_angle_2pi(double theta) {
    theta = std::remainder(theta, 2.0 * M_PI);
    return theta;
}

}  // namespace

UncertaintyModel fit_models(const FrequencyGrid& grid,
                            const std::vector<std::vector<cplx>>& responses,
                            ModelKind kind, const FitOptions& options) {
    grid.validate();
    const std::size_t M = responses.size();
    if (M < min_observations(kind))
        throw config_error("not enough observations for model kind " + to_string(kind));
    for (const auto& row : responses)
        if (row.size() != grid.size())
            throw config_error("observation/grid length mismatch");

    UncertaintyModel model;
    model.kind = kind;
    model.grid = grid;
    model.provenance = options;
    model.bins.reserve(grid.size());

    std::vector<cplx> pts(M);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        for (std::size_t i = 0; i < M; ++i) pts[i] = responses[i][k];
        try {
            switch (kind) {
                case ModelKind::norm_bounded:
                    model.bins.emplace_back(geometry::smallest_circle(pts));
                    break;
                case ModelKind::multi_disk:
                    model.bins.emplace_back(geometry::fit_multi_disk(pts, options.num_disks));
                    break;
                case ModelKind::elliptic:
                    model.bins.emplace_back(geometry::min_area_ellipse(pts, options.mvee_tol));
                    break;
                case ModelKind::convex_hull:
                    model.bins.emplace_back(geometry::convex_hull(pts));
                    break;
            }
        } catch (const std::exception& e) {
            throw config_error("fit failed at bin " + std::to_string(k) + ": " + e.what());
        }
    }
    check_enclosure(model, responses);
    return model;
}

void check_enclosure(const UncertaintyModel& model,
                     const std::vector<std::vector<cplx>>& responses) {
    std::vector<cplx> pts(responses.size());
    for (std::size_t k = 0; k < model.bins.size(); ++k) {
        for (std::size_t i = 0; i < responses.size(); ++i) pts[i] = responses[i][k];
        const double tol = 1e-9 * (geometry::spread(pts) + std::abs(pts[0])) + 1e-12;
        for (std::size_t i = 0; i < pts.size(); ++i)
            if (!contains(model.bins[k], pts[i], tol))
                throw config_error("enclosure violated at bin " + std::to_string(k) +
                                   ", observation " + std::to_string(i));
    }
}

BinGeometry transform_model(const BinGeometry& bin_model, cplx C) {
    if (!std::isfinite(C.real()) || !std::isfinite(C.imag()))
        throw config_error("transform_model: non-finite C");
    const double mag = std::abs(C);
    const double ang = std::arg(C);
    return std::visit(
        [&](const auto& g) -> BinGeometry {
            using T = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<T, Disk>) {
                return Disk{C * g.center, mag * g.radius};
            } else if constexpr (std::is_same_v<T, MultiDisk>) {
                MultiDisk out;
                out.anchor = C * g.anchor;
                out.disks.reserve(g.disks.size());
                for (const Disk& d : g.disks)
                    out.disks.push_back(Disk{C * d.center, mag * d.radius});
                return out;
            } else if constexpr (std::is_same_v<T, Ellipse>) {
                return Ellipse{C * g.center, mag * g.semi_major, mag * g.semi_minor,
                               wrap_angle_pi(g.angle + ang)};
            } else {
                ConvexHull2D out;
                out.vertices.reserve(g.vertices.size());
                for (cplx v : g.vertices) out.vertices.push_back(C * v);
                out.halfspaces.reserve(g.halfspaces.size());
                for (const HalfSpace& h : g.halfspaces)
                    out.halfspaces.push_back(
                        HalfSpace{wrap_angle_2pi(h.angle + ang), mag * h.offset});
                return out;
            }
        },
        bin_model);
}

bool contains(const BinGeometry& model, cplx p, double tol) {
    return std::visit([&](const auto& g) { return geometry::contains(g, p, tol); }, model);
}

double area_of(const BinGeometry& model) {
    return std::visit([](const auto& g) { return geometry::area(g); }, model);
}

namespace {

json grid_to_json(const FrequencyGrid& g) {
    return json{{"sample_rate", g.sample_rate}, {"num_bins", g.bins.size()}, {"bins", g.bins}};
}

FrequencyGrid grid_from_json(const json& j) {
    FrequencyGrid g;
    g.sample_rate = j.at("sample_rate").get<double>();
    g.bins = j.at("bins").get<std::vector<double>>();
    if (g.bins.size() != j.at("num_bins").get<std::size_t>())
        throw config_error("grid num_bins/bins mismatch");
    g.validate();
    return g;
}

json cplx_to_json(cplx c) { return json::array({c.real(), c.imag()}); }

cplx cplx_from_json(const json& j) { return cplx(j.at(0).get<double>(), j.at(1).get<double>()); }

json bin_to_json(const BinGeometry& bin) {
    return std::visit(
        [](const auto& g) -> json {
            using T = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<T, Disk>) {
                return json{{"center", cplx_to_json(g.center)}, {"radius", g.radius}};
            } else if constexpr (std::is_same_v<T, MultiDisk>) {
                json disks = json::array();
                for (const Disk& d : g.disks)
                    disks.push_back(json{{"center", cplx_to_json(d.center)}, {"radius", d.radius}});
                return json{{"anchor", cplx_to_json(g.anchor)}, {"disks", disks}};
            } else if constexpr (std::is_same_v<T, Ellipse>) {
                return json{{"center", cplx_to_json(g.center)},
                            {"semi_major", g.semi_major},
                            {"semi_minor", g.semi_minor},
                            {"angle", g.angle}};
            } else {
                json verts = json::array();
                for (cplx v : g.vertices) verts.push_back(cplx_to_json(v));
                json hs = json::array();
                for (const HalfSpace& h : g.halfspaces)
                    hs.push_back(json{{"angle", h.angle}, {"offset", h.offset}});
                return json{{"vertices", verts}, {"halfspaces", hs}};
            }
        },
        bin);
}

BinGeometry bin_from_json(const json& j, ModelKind kind) {
    switch (kind) {
        case ModelKind::norm_bounded:
            return Disk{cplx_from_json(j.at("center")), j.at("radius").get<double>()};
        case ModelKind::multi_disk: {
            MultiDisk md;
            md.anchor = cplx_from_json(j.at("anchor"));
            for (const json& d : j.at("disks"))
                md.disks.push_back(
                    Disk{cplx_from_json(d.at("center")), d.at("radius").get<double>()});
            return md;
        }
        case ModelKind::elliptic:
            return Ellipse{cplx_from_json(j.at("center")), j.at("semi_major").get<double>(),
                           j.at("semi_minor").get<double>(), j.at("angle").get<double>()};
        case ModelKind::convex_hull: {
            ConvexHull2D h;
            for (const json& v : j.at("vertices")) h.vertices.push_back(cplx_from_json(v));
            for (const json& s : j.at("halfspaces"))
                h.halfspaces.push_back(
                    HalfSpace{s.at("angle").get<double>(), s.at("offset").get<double>()});
            return h;
        }
    }
    throw config_error("unknown model kind");
}

constexpr const char* kModelSchemaVersion = "1";

}  // namespace

void save_model(const UncertaintyModel& model, const std::string& path) {
    json j;
    j["version"] = kModelSchemaVersion;
    j["kind"] = to_string(model.kind);
    j["grid"] = grid_to_json(model.grid);
    j["provenance"] = json{{"num_disks", model.provenance.num_disks},
                           {"mvee_tol", model.provenance.mvee_tol},
                           {"seed", model.provenance.seed}};
    json bins = json::array();
    for (const BinGeometry& b : model.bins) bins.push_back(bin_to_json(b));
    j["bins"] = bins;

    std::ofstream out(path);
    if (!out) throw config_error("cannot write model file: " + path);
    out << j.dump(2) << "\n";
}

UncertaintyModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot read model file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw config_error("invalid model JSON in " + path + ": " + e.what());
    }
    const std::string version = j.at("version").get<std::string>();
    if (version != kModelSchemaVersion)
        throw config_error("model schema version mismatch: expected " +
                           std::string(kModelSchemaVersion) + ", found " + version);
    UncertaintyModel model;
    model.kind = model_kind_from_string(j.at("kind").get<std::string>());
    model.grid = grid_from_json(j.at("grid"));
    const json& prov = j.at("provenance");
    model.provenance.num_disks = prov.at("num_disks").get<std::size_t>();
    model.provenance.mvee_tol = prov.at("mvee_tol").get<double>();
    model.provenance.seed = prov.at("seed").get<unsigned long long>();
    const json& bins = j.at("bins");
    if (bins.size() != model.grid.size())
        throw config_error("model file has " + std::to_string(bins.size()) + " bins, grid needs " +
                           std::to_string(model.grid.size()) +
                           (bins.size() < model.grid.size()
                                ? " (first missing bin " + std::to_string(bins.size()) + ")"
                                : ""));
    for (const json& b : bins) model.bins.push_back(bin_from_json(b, model.kind));
    return model;
}

}  // namespace anckit::uncertainty
