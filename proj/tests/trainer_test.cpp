#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "test_util.hpp"
#include "wgan2d/trainer.hpp"

using namespace wgan2d;

namespace {

TrainConfig tiny_config()
{
    TrainConfig cfg;
    cfg.dataset = Dataset::kSwissRoll;
    cfg.penalty.kind = PenaltyKind::kGp;
    cfg.penalty.lambda = 10.0;
    cfg.batch_size = 16;
    cfg.n_critic = 2;
    cfg.iterations = 5;
    cfg.hidden_width = 8;
    cfg.learning_rate = 1e-4;
    cfg.emd_every = 2;
    cfg.emd_batch = 8;
    cfg.snapshot_iters = {};
    cfg.figure_resolution = 16;
    return cfg;
}

std::string read_file(const std::filesystem::path& p)
{
    std::ifstream is(p, std::ios::binary);
    REQUIRE_MESSAGE(is.good(), "missing file ", p.string());
    return std::string(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
}

} // namespace

TEST_CASE("surrogate loss closed forms")
{
    Rng rng(1);
    const Batch2D real = sample_swiss_roll(rng, 8);
    const Batch2D fake = sample_8gaussians(rng, 8);

    // zero critic scores everything 0
    MlpParams zero;
    zero.role = Role::kCritic;
    zero.activation = Activation::kRelu;
    zero.layers = {{Tensor::zeros({2, 4}), Tensor::zeros({1, 4})},
                   {Tensor::zeros({4, 4}), Tensor::zeros({1, 4})},
                   {Tensor::zeros({4, 4}), Tensor::zeros({1, 4})},
                   {Tensor::zeros({4, 1}), Tensor::zeros({1, 1})}};
    Tape t0;
    CHECK(t0.value(surrogate_loss(t0, zero, real, fake))[0] == 0.0);

    // f(x) = x1 with real at (1,0) and fake at (0,0) scores exactly 1
    const MlpParams x1 = testutil::linear_critic(1.0, 0.0);
    Tensor ones({4, 2});
    for (std::size_t i = 0; i < 4; ++i)
        ones.at(i, 0) = 1.0;
    Tape t1;
    CHECK(t1.value(surrogate_loss(t1, x1, Batch2D(std::move(ones)), Batch2D(Tensor::zeros({4, 2}))))[0]
          == 1.0);

    // identical batches cancel exactly for any critic
    Rng rng2(2);
    const MlpParams random_critic = init_mlp(rng2, Role::kCritic, 8, Activation::kRelu);
    Tape t2;
    CHECK(t2.value(surrogate_loss(t2, random_critic, real, real))[0] == 0.0);
}

TEST_CASE("train performs n_critic critic updates per generator update")
{
    TrainConfig cfg = tiny_config();
    cfg.iterations = 1;
    cfg.n_critic = 5;
    cfg.emd_every = 0;
    std::size_t critic_calls = 0, iterations_seen = 0;
    TrainCallbacks cb;
    cb.after_critic_step = [&](const GanState&, std::size_t, std::size_t) { ++critic_calls; };
    cb.after_iteration = [&](const GanState&, const TrainRecord&) { ++iterations_seen; };
    const TrainResult result = train(cfg, {}, cb);
    CHECK(result.status == RunStatus::kCompleted);
    CHECK(critic_calls == 5);
    CHECK(iterations_seen == 1);
    CHECK(result.log.size() == 1);
}

TEST_CASE("training is deterministic per (config, seed)")
{
    const TrainConfig cfg = tiny_config();
    const TrainResult a = train(cfg);
    const TrainResult b = train(cfg);
    CHECK(records_to_csv(a.log) == records_to_csv(b.log));
    CHECK(testutil::params_equal(a.generator, b.generator));
    CHECK(testutil::params_equal(a.critic, b.critic));

    TrainConfig other = cfg;
    other.seed = 1;
    const TrainResult c = train(other);
    CHECK(records_to_csv(a.log) != records_to_csv(c.log));
}

TEST_CASE("critic step touches only the critic; generator step only the generator")
{
    const TrainConfig cfg = tiny_config();
    GanState state = init_state(cfg);
    const MlpParams gen_before = state.generator;
    critic_step(state, cfg);
    CHECK(testutil::params_equal(state.generator, gen_before));
    CHECK_FALSE(testutil::params_equal(state.critic, init_state(cfg).critic));

    const MlpParams critic_after = state.critic;
    generator_step(state, cfg);
    CHECK(testutil::params_equal(state.critic, critic_after));
    CHECK_FALSE(testutil::params_equal(state.generator, gen_before));
}

TEST_CASE("clip mode keeps every critic parameter inside the bound")
{
    TrainConfig cfg = tiny_config();
    cfg.penalty.kind = PenaltyKind::kClip;
    cfg.penalty.clip_c = 0.01;
    cfg.iterations = 20;
    cfg.emd_every = 0;
    bool all_clipped = true;
    TrainCallbacks cb;
    cb.after_critic_step = [&](const GanState& s, std::size_t, std::size_t) {
        all_clipped = all_clipped && max_abs_param(s.critic) <= 0.01;
    };
    const TrainResult result = train(cfg, {}, cb);
    CHECK(result.status == RunStatus::kCompleted);
    CHECK(all_clipped);
    CHECK(max_abs_param(result.critic) <= 0.01);
    // clip mode logs a zero penalty column
    for (const auto& rec : result.log)
        CHECK(rec.penalty_value == 0.0);
}

TEST_CASE("an inactive lp hinge reproduces the unpenalized critic step")
{
    TrainConfig lp_cfg = tiny_config();
    lp_cfg.penalty.kind = PenaltyKind::kLp;
    lp_cfg.penalty.lambda = 10.0;
    TrainConfig none_cfg = lp_cfg;
    none_cfg.penalty.kind = PenaltyKind::kNone;

    GanState lp_state = init_state(lp_cfg);
    GanState none_state = init_state(none_cfg);
    // shrink the critic so every input gradient norm sits far below 1
    for (auto* state : {&lp_state, &none_state})
        for (auto& layer : state->critic.layers)
            for (double& w : layer.weight.data())
                w *= 1e-3;

    const StepStats lp_stats = critic_step(lp_state, lp_cfg);
    const StepStats none_stats = critic_step(none_state, none_cfg);
    CHECK(lp_stats.penalty == 0.0);
    CHECK(lp_stats.surrogate == none_stats.surrogate);
    CHECK(testutil::params_equal(lp_state.critic, none_state.critic));
}

TEST_CASE("generator ascends the critic score")
{
    TrainConfig cfg = tiny_config();
    cfg.learning_rate = 1e-3;
    GanState state = init_state(cfg);
    state.critic = testutil::linear_critic(1.0, 0.0); // f(x) = x1

    Rng preview = state.data_rng; // same stream the step will consume
    const Tensor latent = sample_latent(preview, cfg.batch_size, cfg.latent_dim);

    const auto mean_x1 = [&](const MlpParams& gen) {
        const Tensor pts = forward_values(gen, latent);
        double m = 0.0;
        for (std::size_t i = 0; i < pts.rows(); ++i)
            m += pts.at(i, 0);
        return m / static_cast<double>(pts.rows());
    };
    const double x1_before = mean_x1(state.generator);
    generator_step(state, cfg);
    const double x1_after = mean_x1(state.generator);
    CHECK(x1_after > x1_before);
}

TEST_CASE("diverging runs abort with a diagnostic and flush partial logs")
{
    TrainConfig cfg = tiny_config();
    cfg.learning_rate = 1e280; // guarantees an overflow within a few steps
    cfg.iterations = 50;
    cfg.emd_every = 0;
    const auto dir = std::filesystem::temp_directory_path() / "wgan2d_abort_test";
    std::filesystem::remove_all(dir);
    const TrainResult result = train(cfg, dir);
    CHECK(result.status == RunStatus::kDiverged);
    CHECK_FALSE(result.diagnostic.empty());
    CHECK(result.completed_iterations < cfg.iterations);

    const std::string csv = read_file(dir / "log.csv");
    CHECK(csv.rfind("iteration,critic_surrogate,penalty_value,neg_critic_loss,emd,wall_ms\n", 0)
          == 0);
    CHECK(read_file(dir / "manifest.txt").find("log.csv") != std::string::npos);
    std::filesystem::remove_all(dir);
}

TEST_CASE("run artifacts: log, snapshots, checkpoints and manifest")
{
    TrainConfig cfg = tiny_config();
    cfg.iterations = 4;
    cfg.emd_every = 2;
    cfg.snapshot_iters = {2, 4};
    const auto dir = std::filesystem::temp_directory_path() / "wgan2d_artifacts_test";
    std::filesystem::remove_all(dir);
    const TrainResult result = train(cfg, dir);
    REQUIRE(result.status == RunStatus::kCompleted);
    CHECK(result.figures.size() == 2);

    CHECK(std::filesystem::exists(dir / "log.csv"));
    CHECK(std::filesystem::exists(dir / "levelset_2.ppm"));
    CHECK(std::filesystem::exists(dir / "levelset_4.ppm"));
    CHECK(std::filesystem::exists(dir / "ckpt_2"));
    CHECK(std::filesystem::exists(dir / "ckpt_4"));

    // checkpoints reload to the state the run ended in (snapshot at the end)
    const auto [gen, critic] = load_checkpoint((dir / "ckpt_4").string());
    CHECK(testutil::params_equal(gen, result.generator));
    CHECK(testutil::params_equal(critic, result.critic));

    const std::string manifest = read_file(dir / "manifest.txt");
    CHECK(manifest.find("log.csv\t") != std::string::npos);
    CHECK(manifest.find("levelset_2.ppm\t") != std::string::npos);
    CHECK(manifest.find("levelset_4.ppm\t") != std::string::npos);

    // emd column present exactly on the scheduled iterations
    const std::string csv = read_file(dir / "log.csv");
    std::size_t emd_rows = 0;
    for (const auto& rec : result.log)
        if (rec.emd.has_value())
            ++emd_rows;
    CHECK(emd_rows == 2);
    CHECK(csv.find("\n1,") != std::string::npos);
    std::filesystem::remove_all(dir);
}

TEST_CASE("neg_critic_loss is the exact negation of the surrogate")
{
    const TrainResult result = train(tiny_config());
    for (const auto& rec : result.log)
        CHECK(rec.neg_critic_loss == -rec.critic_surrogate);
}

TEST_CASE("config validation rejects bad settings")
{
    TrainConfig cfg = tiny_config();
    cfg.iterations = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = tiny_config();
    cfg.batch_size = 1;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = tiny_config();
    cfg.n_critic = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = tiny_config();
    cfg.penalty.lambda = -1.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
}
