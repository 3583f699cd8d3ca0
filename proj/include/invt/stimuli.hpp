#pragma once

#include "invt/image.hpp"
#include "invt/transforms.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace invt {

struct SourceImage {
    std::string path;  // as given by the user; recorded in manifests
    ImageBuffer image;
};

struct ManifestRow {
    std::string source;
    Family family = Family::rotation;
    double theta = 0.0;
    std::string direction;
    std::string output;
    double pixels_per_degree = 0.0;
};

/// Renders every grid element of every family for every source and writes the
/// PNGs under `out_dir/<family>/`, plus `out_dir/manifest.csv` with columns
/// source,family,theta,direction,output,pixels_per_degree.
std::vector<ManifestRow> write_stimuli(std::span<const SourceImage> sources, std::span<const Family> families,
                                       const GridConfig& grid, const ViewingGeometry& geom,
                                       const std::filesystem::path& out_dir);

void write_manifest(std::span<const ManifestRow> rows, const std::filesystem::path& path);
std::vector<ManifestRow> read_manifest(const std::filesystem::path& path);

}  // namespace invt
