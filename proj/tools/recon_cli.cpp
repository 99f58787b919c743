#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "recon/errors.hpp"
#include "recon/field.hpp"
#include "recon/marching_cubes.hpp"
#include "recon/metrics.hpp"
#include "recon/scene.hpp"
#include "recon/sdf_oracle.hpp"
#include "recon/tnsr.hpp"
#include "recon/train.hpp"

namespace {

using namespace recon;

Config load_config_opt(const std::string& path) {
    return path.empty() ? Config() : Config::load(path);
}

int cmd_genscene(const std::string& out, const std::string& config_path, uint64_t seed) {
    Config cfg = load_config_opt(config_path);
    SceneGenParams params;
    params.resolution = static_cast<int>(cfg.get_int("resolution", params.resolution));
    params.views = static_cast<int>(cfg.get_int("views", params.views));
    params.mesh_grid = static_cast<int>(cfg.get_int("mesh_grid", params.mesh_grid));
    params.scale_to_cm = cfg.get_double("scale_to_cm", params.scale_to_cm);
    params.seed = seed;
    auto files = generate_scene(out, params);
    for (const auto& f : files) std::cout << f << "\n";
    return 0;
}

int cmd_sample(const std::string& scene_path, const std::string& out,
               const std::string& config_path, uint64_t seed) {
    Config cfg = load_config_opt(config_path);
    ModelConfig mc = ModelConfig::from_config(cfg);
    SceneDescriptor desc = SceneDescriptor::load(scene_path);
    TriMesh mesh = load_obj(desc.resolve(desc.mesh_path));
    SemanticMask mask = load_mask(desc.resolve(desc.mask_path));

    size_t x_b = static_cast<size_t>(cfg.get_int("x_b", 48000));
    size_t n_pc = static_cast<size_t>(cfg.get_int("n_pc", 15000));

    Rng rng(seed);
    LabeledPointSet body =
        sample_baseline(mesh, x_b, mc.sigma_lr_norm, mc.uniform_frac, rng.next_u64());
    body = semantic_augment(body, mask, desc.cam, mesh, mc.sigma_hr_norm, mc.n_k,
                            rng.next_u64());

    ScalarImage depth = load_scalar_image(desc.resolve(desc.depth_path));
    PointCloud cloud = depth_to_points(depth, desc.cam);
    LabeledPointSet surface = select_depth_points(cloud, n_pc, rng.next_u64());

    std::filesystem::create_directories(out);
    save_point_set(out + "/body.pts", body);
    save_point_set(out + "/surface.pts", surface);
    std::cout << "body=" << body.size() << " surface=" << surface.size() << "\n";
    return 0;
}

int cmd_train(const std::string& scene_path, const std::string& samples,
              const std::string& out, const std::string& config_path, uint64_t seed,
              bool seed_given) {
    Config cfg = load_config_opt(config_path);
    if (seed_given) cfg.set("seed", static_cast<long>(seed));

    ModelConfig mc = ModelConfig::from_config(cfg);
    TrainConfig tc = TrainConfig::from_config(cfg);

    SceneDescriptor desc = SceneDescriptor::load(scene_path);
    SceneSample scene;
    scene.inputs = load_scene_inputs(desc);
    scene.body = load_point_set(samples + "/body.pts");
    scene.surface = load_point_set(samples + "/surface.pts");

    ReconModel model(mc);
    init_model(model, tc.seed);
    Trainer trainer(model, tc);

    std::filesystem::create_directories(out);
    std::ofstream log(out + "/train_log.txt");
    if (!log) throw DataError("cannot write training log in " + out);

    auto t0 = std::chrono::steady_clock::now();
    for (long it = 0; it < tc.iterations; ++it) {
        StepStats s = trainer.step(scene);
        char line[160];
        std::snprintf(line, sizeof(line), "step=%ld loss_sdf=%.9g loss_depth=%.9g total=%.9g",
                      s.step, s.loss_sdf, s.loss_depth, s.total);
        log << line << "\n";
        if (tc.checkpoint_every > 0 && s.step % tc.checkpoint_every == 0)
            save_checkpoint(out + "/checkpoint_" + std::to_string(s.step) + ".rchk", model);
    }
    save_checkpoint(out + "/checkpoint.rchk", model);
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
    // Wall time goes to stderr so output files stay byte-reproducible.
    std::cerr << "trained " << tc.iterations << " steps in " << ms << " ms\n";
    return 0;
}

int cmd_reconstruct(const std::string& checkpoint, const std::string& scene_path,
                    const std::string& out, int m_resolution, uint64_t seed,
                    const std::string& field_out) {
    ReconModel model = load_checkpoint(checkpoint);
    SceneDescriptor desc = SceneDescriptor::load(scene_path);
    SceneInputs inputs = load_scene_inputs(desc);

    FieldOptions opts;
    opts.m_resolution = m_resolution;
    opts.seed = seed;
    ScalarField field = evaluate_field(model, inputs, opts);
    if (!field_out.empty()) {
        Tnsr t = tnsr_f64({static_cast<uint32_t>(field.spec.dims[2]),
                           static_cast<uint32_t>(field.spec.dims[1]),
                           static_cast<uint32_t>(field.spec.dims[0])},
                          field.values);
        save_tnsr(field_out, t);
    }
    TriMesh mesh = marching_cubes(field, 0.0);
    save_obj(mesh, out);
    std::cout << "vertices=" << mesh.vertices.size()
              << " triangles=" << mesh.triangles.size()
              << " spacing=" << field.spec.spacing << "\n";
    return 0;
}

int cmd_evaluate(const std::string& recon_path, const std::string& scene_path,
                 const std::string& out, size_t n_samples, int resolution,
                 uint64_t seed) {
    SceneDescriptor desc = SceneDescriptor::load(scene_path);
    TriMesh recon_mesh = load_obj(recon_path);
    TriMesh gt = load_obj(desc.resolve(desc.mesh_path));

    double cd = chamfer(recon_mesh, gt, n_samples, seed) * desc.scale_to_cm;
    double p2s_val = p2s(recon_mesh, gt, n_samples, seed) * desc.scale_to_cm;
    double nerr = normal_reprojection(recon_mesh, gt, desc.cam, resolution);

    char line[256];
    std::snprintf(line, sizeof(line), "scene=%s cd_cm=%.9g p2s_cm=%.9g normal_err=%.9g",
                  scene_path.c_str(), cd, p2s_val, nerr);
    if (out.empty()) {
        std::cout << line << "\n";
    } else {
        std::ofstream f(out);
        if (!f) throw DataError("cannot write report: " + out);
        f << line << "\n";
        std::cout << line << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"single-view RGB-D implicit surface reconstruction toolkit"};
    app.require_subcommand(1);

    std::string scene, out, config_path, checkpoint, samples, recon_path, field_out;
    uint64_t seed = 0;
    int m_resolution = 128;
    int resolution = 512;
    size_t n_samples = 10000;

    auto* gen = app.add_subcommand("genscene", "generate a procedural body scene");
    gen->add_option("--out", out, "output directory")->required();
    gen->add_option("--config", config_path, "config file");
    gen->add_option("--seed", seed, "random seed");

    auto* smp = app.add_subcommand("sample", "sample labeled training points");
    smp->add_option("--scene", scene, "scene descriptor")->required();
    smp->add_option("--out", out, "output directory")->required();
    smp->add_option("--config", config_path, "config file");
    smp->add_option("--seed", seed, "random seed");

    auto* trn = app.add_subcommand("train", "train a model on one scene");
    trn->add_option("--scene", scene, "scene descriptor")->required();
    trn->add_option("--samples", samples, "sampled point directory")->required();
    trn->add_option("--out", out, "output directory")->required();
    trn->add_option("--config", config_path, "config file");
    auto* seed_opt = trn->add_option("--seed", seed, "random seed");

    auto* rec = app.add_subcommand("reconstruct", "extract a mesh from a checkpoint");
    rec->add_option("--checkpoint", checkpoint, "model checkpoint")->required();
    rec->add_option("--scene", scene, "scene descriptor")->required();
    rec->add_option("--out", out, "output OBJ path")->required();
    rec->add_option("--m-resolution", m_resolution, "target grid resolution M");
    rec->add_option("--seed", seed, "random seed");
    rec->add_option("--field-out", field_out, "optional field TNSR dump");

    auto* evl = app.add_subcommand("evaluate", "compare a reconstruction to ground truth");
    evl->add_option("--recon", recon_path, "reconstructed OBJ")->required();
    evl->add_option("--scene", scene, "scene descriptor (ground truth + camera)")
        ->required();
    evl->add_option("--out", out, "report file (default stdout)");
    evl->add_option("--n-samples", n_samples, "samples per mesh");
    evl->add_option("--resolution", resolution, "normal render resolution");
    evl->add_option("--seed", seed, "random seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 2;
    }

    try {
        if (gen->parsed()) return cmd_genscene(out, config_path, seed);
        if (smp->parsed()) return cmd_sample(scene, out, config_path, seed);
        if (trn->parsed())
            return cmd_train(scene, samples, out, config_path, seed,
                             seed_opt->count() > 0);
        if (rec->parsed())
            return cmd_reconstruct(checkpoint, scene, out, m_resolution, seed, field_out);
        if (evl->parsed())
            return cmd_evaluate(recon_path, scene, out, n_samples, resolution, seed);
    } catch (const recon::ArgumentError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const recon::DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const recon::NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
