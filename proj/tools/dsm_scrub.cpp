// SPDX-License-Identifier: Apache-2.0
//
// dsm-scrub: removes selected occluder classes from textured DSM meshes by
// rendering BEV rasters, inpainting color and height inside detector masks,
// and writing corrected geometry and texture back to a glTF-subset file.
//
// Exit codes: 0 success, 2 configuration error, 3 stage error.

#include <CLI11.hpp>

#include <iostream>

#include "dsmscrub/dsmscrub.hpp"

namespace {

using namespace dsmscrub;

struct CliOverrides {
    std::string config_path;
    std::string mesh;
    std::string out;
    std::string masks_dir;
    std::string classes_csv;
    std::string backend;
    std::string backend_command;
    std::string texture_mode;
    double gsd = 0.06;
    double overlap = 0.5;
    double merge_distance = 0.4;
    double tolerance = 1e-4;
    double timeout_s = 300.0;
    double z_min = 0.0, z_max = 0.0;
    int patch_px = 2048;
    int kernel = 5;
    int workers = 1;
    int max_iterations = 10000;
    int exemplar_patch = 9;
    int search_iterations = 2000;
    int feather = 0;
    int max_texture_side = 8192;
    int external_concurrency = 1;
    std::uint64_t seed = 0;
    bool replace_all = false;
    bool diagnostics = false;
};

void add_run_options(CLI::App* cmd, CliOverrides& o) {
    cmd->add_option("--config", o.config_path, "JSON config file (flags override it)");
    cmd->add_option("--mesh", o.mesh, "input mesh (.gltf)");
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--masks-dir", o.masks_dir, "directory with patch_{row}_{col}_mask.png");
    cmd->add_option("--gsd", o.gsd, "ground sampling distance, m/px");
    cmd->add_option("--patch-px", o.patch_px, "patch size in pixels");
    cmd->add_option("--overlap", o.overlap, "patch overlap fraction [0,1)");
    cmd->add_option("--classes", o.classes_csv, "comma-separated occluder classes");
    cmd->add_option("--kernel", o.kernel, "mask dilation kernel (odd)");
    cmd->add_option("--backend", o.backend, "inpaint backend: harmonic|exemplar|external");
    cmd->add_option("--backend-command", o.backend_command,
                    "external command template with {image} {mask} {out}");
    cmd->add_option("--timeout", o.timeout_s, "external backend timeout, seconds");
    cmd->add_option("--external-concurrency", o.external_concurrency,
                    "simultaneous external backend processes");
    cmd->add_option("--tolerance", o.tolerance, "harmonic tolerance in quantization steps");
    cmd->add_option("--max-iterations", o.max_iterations, "harmonic iteration cap");
    cmd->add_option("--exemplar-patch", o.exemplar_patch, "exemplar patch size (odd)");
    cmd->add_option("--search-iterations", o.search_iterations, "exemplar search budget");
    cmd->add_option("--seed", o.seed, "seed for seeded backends");
    cmd->add_option("--merge-distance", o.merge_distance, "vertex weld distance, m");
    cmd->add_option("--texture-mode", o.texture_mode, "blend|resample");
    cmd->add_option("--workers", o.workers, "worker threads");
    cmd->add_option("--z-min", o.z_min, "height codec z_min override, m");
    cmd->add_option("--z-max", o.z_max, "height codec z_max override, m");
    cmd->add_option("--feather", o.feather, "blend mask feather radius, px (0 = hard)");
    cmd->add_option("--max-texture-side", o.max_texture_side, "inpaint texture size cap");
    cmd->add_flag("--replace-all", o.replace_all, "replace all elevations, not just masked");
    cmd->add_flag("--diagnostics", o.diagnostics, "write wireframe before/after snapshots");
}

RunConfig build_config(const CLI::App* cmd, const CliOverrides& o) {
    RunConfig cfg;
    if (cmd->count("--config")) cfg = load_config_file(o.config_path);
    auto set = [&](const char* flag) { return cmd->count(flag) > 0; };
    if (set("--mesh")) cfg.input_mesh = o.mesh;
    if (set("--out")) cfg.out_dir = o.out;
    if (set("--masks-dir")) cfg.masks_dir = o.masks_dir;
    if (set("--gsd")) cfg.gsd = o.gsd;
    if (set("--patch-px")) cfg.patch_px = o.patch_px;
    if (set("--overlap")) cfg.overlap = o.overlap;
    if (set("--classes")) {
        cfg.classes.selected.clear();
        std::stringstream ss(o.classes_csv);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!item.empty()) cfg.classes.selected.insert(item);
    }
    if (set("--kernel")) cfg.dilation_kernel = o.kernel;
    if (set("--backend")) cfg.backend.kind = backend_kind_from(o.backend);
    if (set("--backend-command")) cfg.backend.command = o.backend_command;
    if (set("--timeout")) cfg.backend.timeout_s = o.timeout_s;
    if (set("--external-concurrency")) cfg.external_concurrency = o.external_concurrency;
    if (set("--tolerance")) cfg.backend.tolerance = o.tolerance;
    if (set("--max-iterations")) cfg.backend.max_iterations = o.max_iterations;
    if (set("--exemplar-patch")) cfg.backend.patch_px = o.exemplar_patch;
    if (set("--search-iterations")) cfg.backend.search_iterations = o.search_iterations;
    if (set("--seed")) cfg.backend.seed = o.seed;
    if (set("--merge-distance")) cfg.merge_distance = o.merge_distance;
    if (set("--texture-mode")) cfg.texture_mode = o.texture_mode;
    if (set("--workers")) cfg.workers = o.workers;
    if (set("--z-min")) cfg.codec_z_min = o.z_min;
    if (set("--z-max")) cfg.codec_z_max = o.z_max;
    if (set("--feather")) cfg.feather_px = o.feather;
    if (set("--max-texture-side")) cfg.max_texture_side = o.max_texture_side;
    if (set("--replace-all")) cfg.replace_only_masked = !o.replace_all;
    if (set("--diagnostics")) cfg.diagnostics = o.diagnostics;
    return cfg;
}

SceneSpec scene_from_json(const nlohmann::json& j) {
    SceneSpec spec;
    try {
        if (j.contains("extent")) {
            spec.extent_x = j.at("extent").at(0).get<double>();
            spec.extent_y = j.at("extent").at(1).get<double>();
        }
        if (j.contains("ground")) {
            const auto& g = j.at("ground");
            std::string kind = g.value("kind", "flat");
            if (kind == "flat")
                spec.ground.kind = GroundKind::flat;
            else if (kind == "ramp")
                spec.ground.kind = GroundKind::ramp;
            else if (kind == "sine")
                spec.ground.kind = GroundKind::sine;
            else
                throw ConfigError(cat("unknown ground kind '", kind, "'"));
            spec.ground.z0 = g.value("z0", spec.ground.z0);
            spec.ground.slope = g.value("slope", spec.ground.slope);
            spec.ground.amplitude = g.value("amplitude", spec.ground.amplitude);
            spec.ground.wavelength = g.value("wavelength", spec.ground.wavelength);
        }
        if (j.contains("texture")) {
            const auto& t = j.at("texture");
            std::string kind = t.value("kind", "checker");
            if (kind == "checker")
                spec.texture = TextureKind::checker;
            else if (kind == "stripes")
                spec.texture = TextureKind::stripes;
            else if (kind == "noise")
                spec.texture = TextureKind::noise;
            else
                throw ConfigError(cat("unknown texture kind '", kind, "'"));
            spec.texture_period = t.value("period", spec.texture_period);
        }
        spec.seed = j.value("seed", spec.seed);
        for (const auto& o : j.value("occluders", nlohmann::json::array())) {
            OccluderSpec occ;
            occ.class_name = o.at("class").get<std::string>();
            occ.min_x = o.at("rect").at(0).get<double>();
            occ.min_y = o.at("rect").at(1).get<double>();
            occ.max_x = o.at("rect").at(2).get<double>();
            occ.max_y = o.at("rect").at(3).get<double>();
            occ.height = o.at("height").get<double>();
            spec.occluders.push_back(occ);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(cat("bad scene description: ", e.what()));
    }
    return spec;
}

SceneSpec default_scene() {
    SceneSpec spec;
    spec.extent_x = 20;
    spec.extent_y = 20;
    spec.occluders = {{"vehicle", 3.0, 4.0, 7.0, 6.0, 2.5},
                      {"vessel", 10.0, 10.0, 15.0, 13.0, 4.0},
                      {"vehicle", 4.0, 14.0, 6.5, 16.0, 2.0}};
    return spec;
}

int do_synth(const std::string& out_dir, const std::string& scene_path, double gsd,
             int patch_px, double overlap) {
    namespace fs = std::filesystem;
    SceneSpec spec = default_scene();
    if (!scene_path.empty()) {
        std::ifstream f(scene_path);
        if (!f) throw ConfigError(cat("cannot open scene file: ", scene_path));
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(f);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError(cat("scene parse error at byte ", e.byte, ": ", e.what()));
        }
        spec = scene_from_json(j);
    }
    SynthScene scene = generate_scene(spec, gsd, patch_px, overlap);
    fs::create_directories(fs::path(out_dir) / "masks");
    save_mesh(scene.occluded, (fs::path(out_dir) / "occluded.gltf").string());
    save_mesh(scene.clean, (fs::path(out_dir) / "clean.gltf").string());
    for (std::size_t i = 0; i < scene.grid.patches.size(); ++i) {
        const PatchRect& r = scene.grid.patches[i];
        save_png8((fs::path(out_dir) / "masks" / patch_filename(r.row, r.col, "mask", "png"))
                      .string(),
                  scene.truth_masks[i]);
    }
    std::cout << "synth: wrote occluded.gltf, clean.gltf and " << scene.grid.patches.size()
              << " truth masks to " << out_dir << "\n";
    std::cout << "synth: mosaic " << scene.camera.mosaic_width << "x"
              << scene.camera.mosaic_height << " px, grid " << scene.grid.rows << "x"
              << scene.grid.cols << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dsm-scrub: occluder removal for textured DSM meshes"};
    app.require_subcommand(1);

    CliOverrides o;
    std::string which_stage;
    int exit_code = 0;

    CLI::App* run = app.add_subcommand("run", "run the full pipeline");
    add_run_options(run, o);
    for (const char* name : {"render", "masks", "inpaint", "remesh", "retexture", "metrics"}) {
        CLI::App* cmd = app.add_subcommand(name, cat("run only the ", name, " stage"));
        add_run_options(cmd, o);
        cmd->callback([&which_stage, name] { which_stage = name; });
    }

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic ground-truth scene");
    std::string synth_out, synth_scene;
    double synth_gsd = 0.05, synth_overlap = 0.5;
    int synth_patch = 512;
    synth->add_option("--out", synth_out, "output directory")->required();
    synth->add_option("--scene", synth_scene, "scene description JSON");
    synth->add_option("--gsd", synth_gsd, "ground sampling distance, m/px");
    synth->add_option("--patch-px", synth_patch, "patch size in pixels");
    synth->add_option("--overlap", synth_overlap, "patch overlap fraction");

    CLI::App* validate = app.add_subcommand("validate", "validate a mesh file");
    std::string validate_mesh_path;
    validate->add_option("--mesh", validate_mesh_path, "mesh to validate")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) {
            RunConfig cfg = build_config(run, o);
            PipelineResult result = run_pipeline(cfg);
            if (result.stages_executed.empty()) {
                std::cout << "all stages up to date; nothing to do\n";
            } else {
                for (const std::string& s : result.stages_executed)
                    std::cout << "stage " << s << ": done\n";
            }
            std::cout << "output mesh: "
                      << (std::filesystem::path(cfg.out_dir) / "mesh_out.gltf").string() << "\n";
        } else if (!which_stage.empty()) {
            const CLI::App* cmd = app.get_subcommand(which_stage);
            RunConfig cfg = build_config(cmd, o);
            Pipeline p(cfg);
            bool executed = false;
            if (which_stage == "render") executed = p.stage_render();
            else if (which_stage == "masks") executed = p.stage_masks();
            else if (which_stage == "inpaint") executed = p.stage_inpaint();
            else if (which_stage == "remesh") executed = p.stage_remesh();
            else if (which_stage == "retexture") executed = p.stage_retexture();
            else if (which_stage == "metrics") executed = p.stage_metrics();
            std::cout << "stage " << which_stage << (executed ? ": done" : ": up to date")
                      << "\n";
        } else if (synth->parsed()) {
            exit_code = do_synth(synth_out, synth_scene, synth_gsd, synth_patch, synth_overlap);
        } else if (validate->parsed()) {
            try {
                TexturedMesh mesh = load_mesh(validate_mesh_path);
                std::cout << mesh_validation_report(mesh);
            } catch (const Error& e) {
                std::cout << "status: invalid\nerror: " << e.what() << "\n";
                return 3;
            }
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return exit_code;
}
