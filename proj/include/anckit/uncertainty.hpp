#ifndef ANCKIT_UNCERTAINTY_HPP
#define ANCKIT_UNCERTAINTY_HPP

#include <string>
#include <variant>
#include <vector>

#include "anckit/geometry.hpp"
#include "anckit/types.hpp"

namespace anckit::uncertainty {

enum class ModelKind { norm_bounded, multi_disk, elliptic, convex_hull };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

using BinGeometry = std::variant<geometry::Disk, geometry::MultiDisk, geometry::Ellipse,
                                 geometry::ConvexHull2D>;

struct FitOptions {
    std::size_t num_disks = 6;  // multi-disk D
    double mvee_tol = 1e-7;
    unsigned long long seed = 0;
};

/// One geometry record per grid bin; every observation point at bin k is
/// contained in the bin-k set (checked at fit time).
struct UncertaintyModel {
    ModelKind kind = ModelKind::norm_bounded;
    FrequencyGrid grid;
    std::vector<BinGeometry> bins;
    FitOptions provenance;
};

/// Fit the chosen geometry independently at each bin of an MxK observation
/// matrix (observation i, bin k).
UncertaintyModel fit_models(const FrequencyGrid& grid,
                            const std::vector<std::vector<cplx>>& responses,
                            ModelKind kind, const FitOptions& options = {});

/// Open-loop transformation of one bin set by a complex controller value:
/// disk c -> C c, r -> |C| r; ellipse axes scale by |C|, angle += arg C,
/// center -> C c; hull angles += arg C, offsets scale by |C|, vertices -> C p.
/// C = 0 collapses the set to a point (allowed, degenerate).
BinGeometry transform_model(const BinGeometry& bin_model, cplx C);

bool contains(const BinGeometry& model, cplx p, double tol = 0.0);
double area_of(const BinGeometry& model);

void save_model(const UncertaintyModel& model, const std::string& path);
UncertaintyModel load_model(const std::string& path);

/// Enclosure check used at fit time and re-checkable on load.
void check_enclosure(const UncertaintyModel& model,
                     const std::vector<std::vector<cplx>>& responses);

}  // namespace anckit::uncertainty

#endif
