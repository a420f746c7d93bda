// SPDX-License-Identifier: Apache-2.0
#pragma once

// Run configuration (defaults, file form, validation) and the run manifest.
// The manifest records the camera, grid, stage completion and a hashed file
// inventory; stages are skipped on rerun when their input signature and all
// recorded outputs still match.

#include <filesystem>
#include <fstream>
#include <optional>

#include <nlohmann/json.hpp>

#include "dsmscrub/camera.hpp"
#include "dsmscrub/inpaint.hpp"
#include "dsmscrub/mask.hpp"

namespace dsmscrub {

struct RunConfig {
    std::string input_mesh;
    std::string out_dir;
    std::string masks_dir;  // optional: per-patch class-id PNGs from a detector

    double gsd = 0.06;
    int patch_px = 2048;
    double overlap = 0.5;
    ClassTable classes = default_class_table();
    int dilation_kernel = 5;
    BackendSpec backend;  // harmonic by default
    double merge_distance = 0.4;
    bool replace_only_masked = true;
    double degenerate_area_epsilon = 1e-8;
    std::string texture_mode = "blend";  // blend | resample
    int workers = 1;
    std::optional<double> codec_z_min;  // override the padded mesh z range
    std::optional<double> codec_z_max;
    int feather_px = 0;
    int max_texture_side = 8192;
    bool diagnostics = false;     // wireframe snapshots
    int external_concurrency = 1;  // simultaneous external backend processes

    void validate() const {
        if (input_mesh.empty()) throw ConfigError("input mesh path is required");
        if (out_dir.empty()) throw ConfigError("output directory is required");
        if (!(gsd > 0)) throw ConfigError("gsd must be positive");
        if (patch_px < 8) throw ConfigError("patch size must be at least 8 px");
        if (!(overlap >= 0 && overlap < 1)) throw ConfigError("overlap must be in [0,1)");
        if (dilation_kernel < 1 || dilation_kernel % 2 == 0)
            throw ConfigError("dilation kernel must be odd");
        if (merge_distance < 0) throw ConfigError("merge_distance must be >= 0");
        if (texture_mode != "blend" && texture_mode != "resample")
            throw ConfigError(cat("unknown texture mode '", texture_mode, "'"));
        if (workers < 1) throw ConfigError("workers must be >= 1");
        if (external_concurrency < 1) throw ConfigError("external_concurrency must be >= 1");
        if (codec_z_min.has_value() != codec_z_max.has_value())
            throw ConfigError("codec z override needs both z_min and z_max");
        if (codec_z_min && !(*codec_z_max > *codec_z_min))
            throw ConfigError("codec z_max must exceed z_min");
        classes.validate();
        backend.validate();
    }
};

inline const char* backend_kind_name(BackendKind k) {
    switch (k) {
        case BackendKind::harmonic: return "harmonic";
        case BackendKind::exemplar: return "exemplar";
        case BackendKind::external: return "external";
    }
    return "harmonic";
}

inline BackendKind backend_kind_from(const std::string& s) {
    if (s == "harmonic") return BackendKind::harmonic;
    if (s == "exemplar") return BackendKind::exemplar;
    if (s == "external") return BackendKind::external;
    throw ConfigError(cat("unknown backend '", s, "'"));
}

inline nlohmann::json config_to_json(const RunConfig& cfg) {
    nlohmann::json classes_table = nlohmann::json::object();
    for (const auto& [id, name] : cfg.classes.names) classes_table[cat(int(id))] = name;
    nlohmann::json j = {
        {"input_mesh", cfg.input_mesh},
        {"out_dir", cfg.out_dir},
        {"masks_dir", cfg.masks_dir},
        {"gsd", cfg.gsd},
        {"patch_px", cfg.patch_px},
        {"overlap", cfg.overlap},
        {"class_table", classes_table},
        {"classes", std::vector<std::string>(cfg.classes.selected.begin(),
                                             cfg.classes.selected.end())},
        {"dilation_kernel", cfg.dilation_kernel},
        {"backend",
         {{"kind", backend_kind_name(cfg.backend.kind)},
          {"tolerance", cfg.backend.tolerance},
          {"max_iterations", cfg.backend.max_iterations},
          {"patch_px", cfg.backend.patch_px},
          {"search_iterations", cfg.backend.search_iterations},
          {"seed", cfg.backend.seed},
          {"command", cfg.backend.command},
          {"timeout_s", cfg.backend.timeout_s}}},
        {"merge_distance", cfg.merge_distance},
        {"replace_only_masked", cfg.replace_only_masked},
        {"degenerate_area_epsilon", cfg.degenerate_area_epsilon},
        {"texture_mode", cfg.texture_mode},
        {"workers", cfg.workers},
        {"feather_px", cfg.feather_px},
        {"max_texture_side", cfg.max_texture_side},
        {"diagnostics", cfg.diagnostics},
        {"external_concurrency", cfg.external_concurrency},
    };
    if (cfg.codec_z_min) j["codec_z_min"] = *cfg.codec_z_min;
    if (cfg.codec_z_max) j["codec_z_max"] = *cfg.codec_z_max;
    return j;
}

inline RunConfig config_from_json(const nlohmann::json& j) {
    RunConfig cfg;
    try {
        cfg.input_mesh = j.value("input_mesh", cfg.input_mesh);
        cfg.out_dir = j.value("out_dir", cfg.out_dir);
        cfg.masks_dir = j.value("masks_dir", cfg.masks_dir);
        cfg.gsd = j.value("gsd", cfg.gsd);
        cfg.patch_px = j.value("patch_px", cfg.patch_px);
        cfg.overlap = j.value("overlap", cfg.overlap);
        if (j.contains("class_table")) {
            cfg.classes.names.clear();
            for (const auto& [key, value] : j.at("class_table").items())
                cfg.classes.names[static_cast<std::uint8_t>(std::stoi(key))] =
                    value.get<std::string>();
        }
        if (j.contains("classes")) {
            cfg.classes.selected.clear();
            for (const auto& name : j.at("classes"))
                cfg.classes.selected.insert(name.get<std::string>());
        }
        cfg.dilation_kernel = j.value("dilation_kernel", cfg.dilation_kernel);
        if (j.contains("backend")) {
            const nlohmann::json& b = j.at("backend");
            cfg.backend.kind = backend_kind_from(b.value("kind", "harmonic"));
            cfg.backend.tolerance = b.value("tolerance", cfg.backend.tolerance);
            cfg.backend.max_iterations = b.value("max_iterations", cfg.backend.max_iterations);
            cfg.backend.patch_px = b.value("patch_px", cfg.backend.patch_px);
            cfg.backend.search_iterations =
                b.value("search_iterations", cfg.backend.search_iterations);
            cfg.backend.seed = b.value("seed", cfg.backend.seed);
            cfg.backend.command = b.value("command", cfg.backend.command);
            cfg.backend.timeout_s = b.value("timeout_s", cfg.backend.timeout_s);
        }
        cfg.merge_distance = j.value("merge_distance", cfg.merge_distance);
        cfg.replace_only_masked = j.value("replace_only_masked", cfg.replace_only_masked);
        cfg.degenerate_area_epsilon =
            j.value("degenerate_area_epsilon", cfg.degenerate_area_epsilon);
        cfg.texture_mode = j.value("texture_mode", cfg.texture_mode);
        cfg.workers = j.value("workers", cfg.workers);
        if (j.contains("codec_z_min")) cfg.codec_z_min = j.at("codec_z_min").get<double>();
        if (j.contains("codec_z_max")) cfg.codec_z_max = j.at("codec_z_max").get<double>();
        cfg.feather_px = j.value("feather_px", cfg.feather_px);
        cfg.max_texture_side = j.value("max_texture_side", cfg.max_texture_side);
        cfg.diagnostics = j.value("diagnostics", cfg.diagnostics);
        cfg.external_concurrency = j.value("external_concurrency", cfg.external_concurrency);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(cat("bad config: ", e.what()));
    }
    return cfg;
}

inline RunConfig load_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError(cat("cannot open config file: ", path));
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(cat("config parse error at byte ", e.byte, ": ", e.what()));
    }
    return config_from_json(j);
}

class RunManifest {
public:
    nlohmann::json doc;

    static RunManifest fresh(const RunConfig& cfg) {
        RunManifest m;
        m.doc = {{"config", config_to_json(cfg)},
                 {"stages", nlohmann::json::object()},
                 {"files", nlohmann::json::object()},
                 {"stats", nlohmann::json::object()},
                 {"warnings", nlohmann::json::array()}};
        return m;
    }

    static RunManifest load(const std::string& path) {
        std::ifstream f(path);
        if (!f) throw IoError(cat("cannot open manifest: ", path));
        RunManifest m;
        try {
            m.doc = nlohmann::json::parse(f);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(cat("manifest parse error at byte ", e.byte, ": ", e.what()));
        }
        return m;
    }

    void save(const std::string& path) const {
        std::ofstream f(path);
        if (!f) throw IoError(cat("cannot write manifest: ", path));
        f << doc.dump(1, '\t') << "\n";
    }

    void set_camera(const OrthoCamera& cam) {
        doc["camera"] = {{"origin_x", cam.origin_x},   {"origin_y", cam.origin_y},
                         {"gsd", cam.gsd},             {"mosaic_width", cam.mosaic_width},
                         {"mosaic_height", cam.mosaic_height},
                         {"codec", {{"z_min", cam.codec.z_min}, {"z_max", cam.codec.z_max}}}};
    }
    OrthoCamera camera() const {
        const nlohmann::json& c = doc.at("camera");
        OrthoCamera cam;
        cam.origin_x = c.at("origin_x").get<double>();
        cam.origin_y = c.at("origin_y").get<double>();
        cam.gsd = c.at("gsd").get<double>();
        cam.mosaic_width = c.at("mosaic_width").get<int>();
        cam.mosaic_height = c.at("mosaic_height").get<int>();
        cam.codec.z_min = c.at("codec").at("z_min").get<double>();
        cam.codec.z_max = c.at("codec").at("z_max").get<double>();
        return cam;
    }

    void set_grid(const PatchGrid& grid) {
        nlohmann::json patches = nlohmann::json::array();
        for (const PatchRect& r : grid.patches)
            patches.push_back({r.row, r.col, r.x0, r.y0, r.width, r.height});
        doc["grid"] = {{"patch_width", grid.patch_width},
                       {"patch_height", grid.patch_height},
                       {"overlap", grid.overlap},
                       {"rows", grid.rows},
                       {"cols", grid.cols},
                       {"patches", patches}};
    }
    PatchGrid grid() const {
        const nlohmann::json& g = doc.at("grid");
        PatchGrid grid;
        grid.patch_width = g.at("patch_width").get<int>();
        grid.patch_height = g.at("patch_height").get<int>();
        grid.overlap = g.at("overlap").get<double>();
        grid.rows = g.at("rows").get<int>();
        grid.cols = g.at("cols").get<int>();
        for (const auto& p : g.at("patches"))
            grid.patches.push_back({p.at(0).get<int>(), p.at(1).get<int>(), p.at(2).get<int>(),
                                    p.at(3).get<int>(), p.at(4).get<int>(), p.at(5).get<int>()});
        return grid;
    }

    void record_file(const std::string& relpath, const std::string& hash) {
        doc["files"][relpath] = hash;
    }
    void warn(const std::string& message) { doc["warnings"].push_back(message); }

    bool stage_complete(const std::string& name) const {
        return doc.at("stages").contains(name) &&
               doc.at("stages").at(name).value("complete", false);
    }
    std::string stage_signature(const std::string& name) const {
        if (!doc.at("stages").contains(name)) return "";
        return doc.at("stages").at(name).value("signature", "");
    }
    std::vector<std::string> stage_outputs(const std::string& name) const {
        std::vector<std::string> out;
        if (!doc.at("stages").contains(name)) return out;
        for (const auto& f : doc.at("stages").at(name).value("outputs", nlohmann::json::array()))
            out.push_back(f.get<std::string>());
        return out;
    }
    void complete_stage(const std::string& name, const std::string& signature,
                        const std::vector<std::string>& outputs) {
        doc["stages"][name] = {{"complete", true},
                               {"signature", signature},
                               {"outputs", outputs}};
    }
    void invalidate_stage(const std::string& name) { doc["stages"].erase(name); }
};

}  // namespace dsmscrub
