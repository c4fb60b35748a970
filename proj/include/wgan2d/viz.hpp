#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "wgan2d/data.hpp"
#include "wgan2d/log.hpp"
#include "wgan2d/nets.hpp"
#include "wgan2d/tensor.hpp"

namespace wgan2d {

struct BBox {
    double x_min = -2.0, x_max = 2.0;
    double y_min = -2.0, y_max = 2.0;

    void validate() const
    {
        if (!(x_max > x_min) || !(y_max > y_min))
            throw Error("BBox: degenerate bounding box");
    }
};

/// Critic values sampled on a regular grid over a bounding box, corners
/// inclusive. value_at(ix, iy) is the critic at
/// (x_min + ix*dx, y_min + iy*dy); storage is row-major with x fastest.
struct LevelSetGrid {
    BBox bbox;
    std::size_t nx = 0, ny = 0;
    std::vector<double> values; // ny rows of nx values

    double x_coord(std::size_t ix) const
    {
        return bbox.x_min + (bbox.x_max - bbox.x_min) * static_cast<double>(ix)
                                / static_cast<double>(nx - 1);
    }

    double y_coord(std::size_t iy) const
    {
        return bbox.y_min + (bbox.y_max - bbox.y_min) * static_cast<double>(iy)
                                / static_cast<double>(ny - 1);
    }

    double value_at(std::size_t ix, std::size_t iy) const { return values[iy * nx + ix]; }
};

inline LevelSetGrid level_set_grid(const MlpParams& critic, BBox bbox, std::size_t nx,
                                   std::size_t ny)
{
    bbox.validate();
    if (nx < 2 || ny < 2)
        throw Error("level_set_grid: resolution must be at least 2 per axis");
    critic.validate();

    LevelSetGrid grid;
    grid.bbox = bbox;
    grid.nx = nx;
    grid.ny = ny;
    grid.values.resize(nx * ny);

    // One forward pass per grid row keeps the batches small and cache-warm.
    for (std::size_t iy = 0; iy < ny; ++iy) {
        Tensor row({nx, 2});
        for (std::size_t ix = 0; ix < nx; ++ix) {
            row.at(ix, 0) = grid.x_coord(ix);
            row.at(ix, 1) = grid.y_coord(iy);
        }
        const Tensor out = forward_values(critic, row);
        for (std::size_t ix = 0; ix < nx; ++ix)
            grid.values[iy * nx + ix] = out.at(ix, 0);
    }
    return grid;
}

/// Points drawn over the level-set background: training samples in yellow,
/// generated samples in green, penalty points in red.
struct FigureOverlay {
    std::vector<std::array<double, 2>> training;
    std::vector<std::array<double, 2>> generated;
    std::vector<std::array<double, 2>> penalty;

    static std::vector<std::array<double, 2>> from_batch(const Batch2D& b)
    {
        std::vector<std::array<double, 2>> pts(b.size());
        for (std::size_t i = 0; i < b.size(); ++i)
            pts[i] = {b.x(i), b.y(i)};
        return pts;
    }
};

/// Renders the grid as a grayscale P6 pixmap (bright = high critic value)
/// with overlay points splatted as 3x3 squares. A flat grid normalizes to
/// mid-gray. Pixel row 0 is the top of the image, i.e. the y_max edge.
inline std::vector<std::uint8_t> render_figure(const LevelSetGrid& grid,
                                               const FigureOverlay& overlay)
{
    const std::size_t w = grid.nx, h = grid.ny;
    if (w == 0 || h == 0 || grid.values.size() != w * h)
        throw Error("render_figure: grid values do not match its resolution");

    double lo = grid.values[0], hi = grid.values[0];
    for (double v : grid.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }

    std::string header = "P6\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
    std::vector<std::uint8_t> img(header.size() + 3 * w * h);
    std::copy(header.begin(), header.end(), img.begin());
    std::uint8_t* px = img.data() + header.size();

    for (std::size_t row = 0; row < h; ++row) {
        const std::size_t iy = h - 1 - row; // image rows run top-down, grid rows bottom-up
        for (std::size_t ix = 0; ix < w; ++ix) {
            const double v = grid.value_at(ix, iy);
            const double norm = hi > lo ? (v - lo) / (hi - lo) : 0.5;
            const auto gray = static_cast<std::uint8_t>(std::lround(norm * 255.0));
            std::uint8_t* p = px + 3 * (row * w + ix);
            p[0] = p[1] = p[2] = gray;
        }
    }

    const auto splat = [&](const std::vector<std::array<double, 2>>& pts, std::uint8_t r,
                           std::uint8_t g, std::uint8_t b) {
        const double sx = (grid.bbox.x_max - grid.bbox.x_min);
        const double sy = (grid.bbox.y_max - grid.bbox.y_min);
        for (const auto& pt : pts) {
            if (!std::isfinite(pt[0]) || !std::isfinite(pt[1]))
                throw NumericError("render_figure: overlay point is not finite");
            const long cx = std::lround((pt[0] - grid.bbox.x_min) / sx * static_cast<double>(w - 1));
            const long cy = std::lround((pt[1] - grid.bbox.y_min) / sy * static_cast<double>(h - 1));
            for (long dy = -1; dy <= 1; ++dy) {
                for (long dx = -1; dx <= 1; ++dx) {
                    const long ix = cx + dx;
                    const long iy = cy + dy;
                    if (ix < 0 || iy < 0 || ix >= static_cast<long>(w) || iy >= static_cast<long>(h))
                        continue; // points outside the box are clipped silently
                    const std::size_t row = h - 1 - static_cast<std::size_t>(iy);
                    std::uint8_t* p = px + 3 * (row * w + static_cast<std::size_t>(ix));
                    p[0] = r;
                    p[1] = g;
                    p[2] = b;
                }
            }
        }
    };
    splat(overlay.training, 255, 255, 0);
    splat(overlay.generated, 0, 255, 0);
    splat(overlay.penalty, 255, 0, 0);
    return img;
}

struct RunFigure {
    std::size_t iteration = 0;
    std::vector<std::uint8_t> ppm;
};

struct ManifestEntry {
    std::string filename;
    std::size_t bytes = 0;
};

namespace detail {
    inline void write_file(const std::filesystem::path& path, const void* data, std::size_t size)
    {
        std::ofstream os(path, std::ios::binary | std::ios::trunc);
        if (!os)
            throw IoError("cannot open for writing: " + path.string());
        os.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
        if (!os)
            throw IoError("failed writing: " + path.string());
    }
}

/// Writes log.csv, one levelset_{iter}.ppm per figure and a manifest.txt of
/// `filename<TAB>bytes` lines into out_dir. Re-running with identical inputs
/// overwrites with identical bytes.
inline std::vector<ManifestEntry> write_run_artifacts(const std::vector<TrainRecord>& log,
                                                      const std::vector<RunFigure>& figures,
                                                      const std::filesystem::path& out_dir)
{
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec)
        throw IoError("cannot create output directory " + out_dir.string() + ": " + ec.message());

    std::vector<ManifestEntry> manifest;
    const std::string csv = records_to_csv(log);
    detail::write_file(out_dir / "log.csv", csv.data(), csv.size());
    manifest.push_back({"log.csv", csv.size()});

    for (const auto& fig : figures) {
        const std::string name = "levelset_" + std::to_string(fig.iteration) + ".ppm";
        detail::write_file(out_dir / name, fig.ppm.data(), fig.ppm.size());
        manifest.push_back({name, fig.ppm.size()});
    }

    std::string text;
    for (const auto& entry : manifest)
        text += entry.filename + "\t" + std::to_string(entry.bytes) + "\n";
    detail::write_file(out_dir / "manifest.txt", text.data(), text.size());
    return manifest;
}

} // namespace wgan2d
