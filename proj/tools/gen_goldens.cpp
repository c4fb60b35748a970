// Regenerates the golden regression files under tests/golden/. Run from the
// repository root after any deliberate change to the samplers or the
// renderer, then review the diff before committing.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "wgan2d/data.hpp"
#include "wgan2d/log.hpp"
#include "wgan2d/nets.hpp"
#include "wgan2d/viz.hpp"

using namespace wgan2d;

namespace {

void write_batch_csv(const std::filesystem::path& path, const Batch2D& batch)
{
    std::ofstream os(path, std::ios::binary);
    os << "x,y\n";
    for (std::size_t i = 0; i < batch.size(); ++i)
        os << detail::format_double(batch.x(i)) << "," << detail::format_double(batch.y(i))
           << "\n";
}

/// The fixed linear critic used by the pixmap golden: f(x) = x1, built as a
/// width-1 network whose hidden units stay strictly positive on the box.
MlpParams golden_critic()
{
    MlpParams p;
    p.role = Role::kCritic;
    p.activation = Activation::kRelu;
    p.layers.push_back({Tensor({2, 1}, {1.0, 0.0}), Tensor({1, 1}, {1000.0})});
    p.layers.push_back({Tensor({1, 1}, {1.0}), Tensor({1, 1}, {0.0})});
    p.layers.push_back({Tensor({1, 1}, {1.0}), Tensor({1, 1}, {0.0})});
    p.layers.push_back({Tensor({1, 1}, {1.0}), Tensor({1, 1}, {-1000.0})});
    return p;
}

} // namespace

int main(int argc, char** argv)
{
    const std::filesystem::path out = argc > 1 ? argv[1] : "tests/golden";
    std::filesystem::create_directories(out);

    {
        Rng rng(0);
        write_batch_csv(out / "gaussians8_seed0.csv", sample_8gaussians(rng, 8));
    }
    {
        Rng rng(0);
        write_batch_csv(out / "gaussians25_seed0.csv", sample_25gaussians(rng, 8));
    }
    {
        Rng rng(0);
        write_batch_csv(out / "swissroll_seed0.csv", sample_swiss_roll(rng, 8));
    }

    const LevelSetGrid grid = level_set_grid(golden_critic(), {-1.0, 1.0, -1.0, 1.0}, 32, 32);
    FigureOverlay overlay;
    overlay.training = {{0.5, 0.5}};
    overlay.generated = {{-0.5, -0.5}};
    overlay.penalty = {{0.0, 0.0}};
    const auto ppm = render_figure(grid, overlay);
    std::ofstream os(out / "levelset_golden.ppm", std::ios::binary);
    os.write(reinterpret_cast<const char*>(ppm.data()), static_cast<std::streamsize>(ppm.size()));

    std::printf("wrote golden files to %s\n", out.string().c_str());
    return 0;
}
