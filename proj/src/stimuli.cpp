#include "invt/stimuli.hpp"

#include "invt/csv.hpp"
#include "invt/error.hpp"
#include "invt/png_io.hpp"

#include <fstream>

namespace invt {

namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kManifestHeader{"source", "family", "theta", "direction", "output",
                                               "pixels_per_degree"};

}  // namespace

std::vector<ManifestRow> write_stimuli(std::span<const SourceImage> sources, std::span<const Family> families,
                                       const GridConfig& grid, const ViewingGeometry& geom,
                                       const fs::path& out_dir) {
    std::vector<ManifestRow> rows;
    for (Family family : families) {
        const fs::path dir = out_dir / std::string(to_string(family));
        fs::create_directories(dir);
        for (std::size_t s = 0; s < sources.size(); ++s) {
            const ImageBuffer base = family == Family::illuminant ? desaturate(to_rgb(sources[s].image))
                                                                   : sources[s].image;
            const auto specs = theta_grid(family, grid, base.width(), base.height());
            for (std::size_t k = 0; k < specs.size(); ++k) {
                const fs::path out = dir / ("img" + std::to_string(s) + "_" + std::to_string(k) + ".png");
                save_image(apply_transform(base, specs[k], geom), out);
                rows.push_back({sources[s].path, family, specs[k].theta, direction_label(specs[k]),
                                out.string(), geom.pixels_per_degree});
            }
        }
    }
    write_manifest(rows, out_dir / "manifest.csv");
    return rows;
}

void write_manifest(std::span<const ManifestRow> rows, const fs::path& path) {
    std::ofstream os(path);
    if (!os) throw Error("cannot write manifest " + path.string());
    csv::write_row(os, kManifestHeader);
    for (const auto& r : rows)
        csv::write_row(os, {r.source, std::string(to_string(r.family)), csv::format_double(r.theta),
                            r.direction, r.output, csv::format_double(r.pixels_per_degree)});
}

std::vector<ManifestRow> read_manifest(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot read manifest " + path.string());
    std::vector<std::string> f;
    if (!csv::read_row(is, f) || f != kManifestHeader) throw Error("bad manifest header in " + path.string());
    std::vector<ManifestRow> rows;
    while (csv::read_row(is, f)) {
        if (f.size() == 1 && f[0].empty()) continue;
        if (f.size() != kManifestHeader.size()) throw Error("malformed manifest row in " + path.string());
        rows.push_back({f[0], parse_family(f[1]), csv::parse_double(f[2]), f[3], f[4], csv::parse_double(f[5])});
    }
    return rows;
}

}  // namespace invt
