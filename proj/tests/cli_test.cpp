#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "wgan2d/cli.hpp"
#include "wgan2d/presets.hpp"

using namespace wgan2d;

TEST_CASE("the preset roster covers fig1 through fig9 with unique members")
{
    const auto& groups = preset_groups();
    REQUIRE(groups.size() == 9);
    for (int i = 1; i <= 9; ++i)
        CHECK(groups[static_cast<std::size_t>(i - 1)].name == "fig" + std::to_string(i));

    std::set<std::string> names;
    for (const auto& p : all_presets()) {
        CHECK(names.insert(p.name).second); // unique
        CHECK_NOTHROW(p.config.validate()); // fully specified
        CHECK_FALSE(p.description.empty());
    }
    for (const auto& g : groups)
        for (const auto& m : g.members)
            CHECK(find_preset(m).has_value());
}

TEST_CASE("preset fig1-top carries the level-set run settings")
{
    const auto p = find_preset("fig1-top");
    REQUIRE(p.has_value());
    CHECK(p->config.dataset == Dataset::kSwissRoll);
    CHECK(p->config.penalty.kind == PenaltyKind::kGp);
    CHECK(p->config.penalty.lambda == 10.0);
    CHECK(p->config.iterations == 10000);
    CHECK(p->config.snapshot_iters == std::vector<std::size_t>{500, 2500, 5000, 10000});

    const auto middle = find_preset("fig1-middle");
    REQUIRE(middle.has_value());
    CHECK(middle->config.penalty.lambda == 1.0);
    const auto bottom = find_preset("fig1-bottom");
    REQUIRE(bottom.has_value());
    CHECK(bottom->config.penalty.kind == PenaltyKind::kLp);
}

TEST_CASE("group presets expand to their members")
{
    const auto fig3 = resolve_preset("fig3");
    REQUIRE(fig3.size() == 2);
    CHECK(fig3[0].name == "fig3-gp");
    CHECK(fig3[1].name == "fig3-lp");
    for (const auto& run : fig3) {
        CHECK(run.config.iterations == 2000);
        CHECK(run.config.emd_every == 20);
        CHECK(run.config.penalty.lambda == 5.0);
    }

    const auto fig8 = resolve_preset("fig8");
    REQUIRE(fig8.size() == 3);
    CHECK(fig8[0].config.penalty.sampling == SamplingKind::kPerturbReal);
    CHECK(fig8[1].config.penalty.sampling == SamplingKind::kPerturbBoth);
    CHECK(fig8[2].config.penalty.kind == PenaltyKind::kLp);

    CHECK(resolve_preset("fig6").size() == 1);
    CHECK(resolve_preset("nonsense").empty());
}

TEST_CASE("flags map onto the train config")
{
    ConfigOverrides flags;
    flags.dataset = Dataset::kSwissRoll;
    flags.penalty = PenaltyKind::kLp;
    flags.lambda = 5.0;
    flags.iterations = 2000;
    flags.emd_every = 20;
    const auto runs = resolve_runs(std::nullopt, std::nullopt, flags);
    REQUIRE(runs.size() == 1);
    CHECK(runs[0].name == "custom");
    CHECK(runs[0].config.dataset == Dataset::kSwissRoll);
    CHECK(runs[0].config.penalty.kind == PenaltyKind::kLp);
    CHECK(runs[0].config.penalty.lambda == 5.0);
    CHECK(runs[0].config.iterations == 2000);
    CHECK(runs[0].config.emd_every == 20);
    // untouched settings keep their defaults
    CHECK(runs[0].config.batch_size == 256);
    CHECK(runs[0].config.n_critic == 5);
    CHECK(runs[0].config.learning_rate == 5e-5);
    CHECK(runs[0].config.hidden_width == 512);
    CHECK(runs[0].config.seed == 0);
}

TEST_CASE("flags override config file entries, which override preset values")
{
    const auto dir = std::filesystem::temp_directory_path() / "wgan2d_cli_cfg";
    std::filesystem::create_directories(dir);
    const auto cfg_path = (dir / "run.cfg").string();
    {
        std::ofstream os(cfg_path);
        os << "# overrides for a quick run\n";
        os << "iterations = 50\n";
        os << "lambda=2.5\n";
    }

    ConfigOverrides no_flags;
    auto runs = resolve_runs(std::string("fig3-lp"), cfg_path, no_flags);
    REQUIRE(runs.size() == 1);
    CHECK(runs[0].config.iterations == 50);
    CHECK(runs[0].config.penalty.lambda == 2.5);

    ConfigOverrides flags;
    flags.iterations = 10;
    runs = resolve_runs(std::string("fig3-lp"), cfg_path, flags);
    CHECK(runs[0].config.iterations == 10);
    CHECK(runs[0].config.penalty.lambda == 2.5);

    std::filesystem::remove_all(dir);
}

TEST_CASE("config file parse errors")
{
    const auto dir = std::filesystem::temp_directory_path() / "wgan2d_cli_badcfg";
    std::filesystem::create_directories(dir);
    const auto write_cfg = [&](const std::string& text) {
        const auto p = (dir / "bad.cfg").string();
        std::ofstream os(p);
        os << text;
        return p;
    };
    CHECK_THROWS_AS(parse_config_file(write_cfg("no_equals_here\n")), UsageError);
    CHECK_THROWS_AS(parse_config_file(write_cfg("unknown-key = 5\n")), UsageError);
    CHECK_THROWS_AS(parse_config_file(write_cfg("iterations = lots\n")), UsageError);
    CHECK_THROWS_AS(parse_config_file("/nonexistent/file.cfg"), UsageError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("invalid and conflicting invocations are usage errors")
{
    ConfigOverrides flags;
    flags.dataset = Dataset::kSwissRoll;
    flags.lambda = -3.0;
    CHECK_THROWS_AS(resolve_runs(std::nullopt, std::nullopt, flags), UsageError);

    ConfigOverrides clip_conflict;
    clip_conflict.dataset = Dataset::kSwissRoll;
    clip_conflict.penalty = PenaltyKind::kGp;
    clip_conflict.clip_c = 0.05;
    CHECK_THROWS_AS(resolve_runs(std::nullopt, std::nullopt, clip_conflict), UsageError);

    ConfigOverrides sampling_conflict;
    sampling_conflict.dataset = Dataset::kSwissRoll;
    sampling_conflict.penalty = PenaltyKind::kClip;
    sampling_conflict.sampling = SamplingKind::kPerturbReal;
    CHECK_THROWS_AS(resolve_runs(std::nullopt, std::nullopt, sampling_conflict), UsageError);

    ConfigOverrides lambda_on_clip;
    lambda_on_clip.dataset = Dataset::kSwissRoll;
    lambda_on_clip.penalty = PenaltyKind::kNone;
    lambda_on_clip.lambda = 5.0;
    CHECK_THROWS_AS(resolve_runs(std::nullopt, std::nullopt, lambda_on_clip), UsageError);

    // unknown presets list the available ones
    ConfigOverrides none;
    try {
        resolve_runs(std::string("fig99"), std::nullopt, none);
        FAIL("expected UsageError");
    } catch (const UsageError& e) {
        CHECK(std::string(e.what()).find("fig1") != std::string::npos);
    }

    // neither preset nor dataset
    CHECK_THROWS_AS(resolve_runs(std::nullopt, std::nullopt, none), UsageError);
}

TEST_CASE("cli_main end to end: usage errors and a tiny run")
{
    const auto run_cli = [](std::vector<const char*> argv) {
        argv.insert(argv.begin(), "wgan2d");
        return cli_main(static_cast<int>(argv.size()), argv.data());
    };

    CHECK(run_cli({"list-presets"}) == 0);
    CHECK(run_cli({"run", "--dataset", "swissroll", "--lambda", "-3"}) != 0);
    CHECK(run_cli({"run", "--dataset", "marshmallows"}) != 0);
    CHECK(run_cli({"run", "--preset", "fig99"}) != 0);
    CHECK(run_cli({"run"}) != 0);
    CHECK(run_cli({"bogus-subcommand"}) != 0);

    const auto dir = std::filesystem::temp_directory_path() / "wgan2d_cli_run";
    std::filesystem::remove_all(dir);
    const std::string out = dir.string();
    CHECK(run_cli({"run", "--dataset", "8gaussians", "--penalty", "none", "--iterations", "2",
                   "--batch-size", "8", "--hidden-width", "8", "--emd-every", "0", "--snapshots",
                   "none", "--seed", "3", "--out", out.c_str()})
          == 0);
    CHECK(std::filesystem::exists(dir / "custom" / "3" / "log.csv"));
    CHECK(std::filesystem::exists(dir / "custom" / "3" / "manifest.txt"));

    // a diverging run exits nonzero but still leaves its partial artifacts
    CHECK(run_cli({"run", "--dataset", "swissroll", "--penalty", "none", "--iterations", "30",
                   "--batch-size", "8", "--hidden-width", "8", "--lr", "1e280", "--emd-every",
                   "0", "--snapshots", "none", "--out", out.c_str()})
          == 1);
    CHECK(std::filesystem::exists(dir / "custom" / "0" / "log.csv"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("cli_main honors a config file and opt-in timing")
{
    const auto dir = std::filesystem::temp_directory_path() / "wgan2d_cli_cfgrun";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    const auto cfg_path = (dir / "exp.cfg").string();
    {
        std::ofstream os(cfg_path);
        os << "dataset = 8gaussians\npenalty = gp\nlambda = 1\niterations = 3\n"
           << "batch-size = 8\nhidden-width = 8\nemd-every = 0\nsnapshots =\n";
    }
    const std::string out = (dir / "out").string();
    const char* argv[] = {"wgan2d", "run",           "--config",      cfg_path.c_str(),
                          "--out",  out.c_str(),     "--measure-time"};
    REQUIRE(cli_main(7, argv) == 0);

    std::ifstream is(dir / "out" / "custom" / "0" / "log.csv");
    REQUIRE(is.good());
    std::string line;
    std::getline(is, line); // header
    long long prev = -1;
    std::size_t rows = 0;
    while (std::getline(is, line)) {
        const auto last_comma = line.rfind(',');
        const long long wall = std::stoll(line.substr(last_comma + 1));
        CHECK(wall >= prev); // measured time is monotone
        prev = wall;
        ++rows;
    }
    CHECK(rows == 3);
    std::filesystem::remove_all(dir);
}
