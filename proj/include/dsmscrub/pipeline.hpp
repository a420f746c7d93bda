// SPDX-License-Identifier: Apache-2.0
#pragma once

// Stage orchestration: render -> masks -> inpaint -> remesh -> retexture ->
// metrics, each independently invokable and resumable. A stage is skipped
// when its input signature (previous stage's signature + relevant config +
// input file hashes) matches the manifest and all of its recorded outputs
// still hash clean. Patch work runs on a worker pool; every output is
// byte-deterministic, so worker count only changes timing.

#include <algorithm>
#include <condition_variable>
#include <mutex>

#include "dsmscrub/gltf_io.hpp"
#include "dsmscrub/manifest.hpp"
#include "dsmscrub/metrics.hpp"
#include "dsmscrub/mosaic.hpp"
#include "dsmscrub/parallel.hpp"
#include "dsmscrub/rasterize.hpp"
#include "dsmscrub/remesh.hpp"
#include "dsmscrub/retexture.hpp"
#include "dsmscrub/synth.hpp"

namespace dsmscrub {

namespace pipeline_detail {

namespace fs = std::filesystem;

inline std::vector<std::string> mesh_file_set(const std::string& gltf_path) {
    fs::path p(gltf_path);
    std::vector<std::string> files{gltf_path};
    fs::path bin = p.parent_path() / (p.stem().string() + ".bin");
    if (fs::exists(bin)) files.push_back(bin.string());
    std::string prefix = p.stem().string() + "_";
    if (fs::exists(p.parent_path().empty() ? fs::path(".") : p.parent_path())) {
        for (const auto& e :
             fs::directory_iterator(p.parent_path().empty() ? fs::path(".") : p.parent_path())) {
            std::string name = e.path().filename().string();
            if (name.rfind(prefix, 0) == 0 && name.size() > 4 &&
                name.substr(name.size() - 4) == ".png")
                files.push_back(e.path().string());
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

inline std::vector<std::string> saved_mesh_outputs(const TexturedMesh& mesh,
                                                   const std::string& stem) {
    std::vector<std::string> out{stem + ".gltf", stem + ".bin"};
    for (const auto& [name, img] : mesh.textures) out.push_back(cat(stem, "_", name, ".png"));
    return out;
}

inline void draw_line(RasterU8& img, int x0, int y0, int x1, int y1) {
    int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
    int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    for (;;) {
        if (x0 >= 0 && x0 < img.width() && y0 >= 0 && y0 < img.height()) {
            img.at(x0, y0, 0) = 255;
            img.at(x0, y0, 1) = 255;
            img.at(x0, y0, 2) = 255;
        }
        if (x0 == x1 && y0 == y1) break;
        int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x0 += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y0 += sy;
        }
    }
}

inline RasterU8 wireframe_snapshot(const TexturedMesh& mesh, const OrthoCamera& cam,
                                   int max_side = 2048) {
    double scale = std::min(1.0, static_cast<double>(max_side) /
                                     std::max(cam.mosaic_width, cam.mosaic_height));
    int w = std::max(1, static_cast<int>(cam.mosaic_width * scale));
    int h = std::max(1, static_cast<int>(cam.mosaic_height * scale));
    RasterU8 img(w, h, 3, 0);
    for (const Tri& t : mesh.triangles) {
        double u[3], v[3];
        for (int k = 0; k < 3; ++k) {
            project_vertex(cam, mesh.vertices[t[k]], u[k], v[k]);
            u[k] *= scale;
            v[k] *= scale;
        }
        for (int k = 0; k < 3; ++k)
            draw_line(img, static_cast<int>(u[k]), static_cast<int>(v[k]),
                      static_cast<int>(u[(k + 1) % 3]), static_cast<int>(v[(k + 1) % 3]));
    }
    return img;
}

}  // namespace pipeline_detail

struct PipelineResult {
    std::vector<std::string> stages_executed;  // stages that actually did work
    RunManifest manifest;
};

class Pipeline {
public:
    explicit Pipeline(RunConfig cfg) : cfg_(std::move(cfg)) {
        cfg_.validate();
        out_ = cfg_.out_dir;
        std::filesystem::create_directories(out_);
        std::string manifest_path = (out_ / "manifest.json").string();
        if (std::filesystem::exists(manifest_path)) {
            manifest_ = RunManifest::load(manifest_path);
            manifest_.doc["config"] = config_to_json(cfg_);  // refresh snapshot
        } else {
            manifest_ = RunManifest::fresh(cfg_);
        }
    }

    RunManifest& manifest() { return manifest_; }
    const RunConfig& config() const { return cfg_; }

    void save_manifest() { manifest_.save((out_ / "manifest.json").string()); }

    bool stage_render() { return run_stage("render", [this](Outputs& o) { do_render(o); }); }
    bool stage_masks() {
        require("render", "masks");
        return run_stage("masks", [this](Outputs& o) { do_masks(o); });
    }
    bool stage_inpaint() {
        require("masks", "inpaint");
        return run_stage("inpaint", [this](Outputs& o) { do_inpaint(o); });
    }
    bool stage_remesh() {
        require("inpaint", "remesh");
        return run_stage("remesh", [this](Outputs& o) { do_remesh(o); });
    }
    bool stage_retexture() {
        require("remesh", "retexture");
        return run_stage("retexture", [this](Outputs& o) { do_retexture(o); });
    }
    bool stage_metrics() {
        require("inpaint", "metrics");
        return run_stage("metrics", [this](Outputs& o) { do_metrics(o); });
    }

    PipelineResult run() {
        PipelineResult result;
        struct StageEntry {
            const char* name;
            bool (Pipeline::*fn)();
        };
        const StageEntry stages[] = {
            {"render", &Pipeline::stage_render},       {"masks", &Pipeline::stage_masks},
            {"inpaint", &Pipeline::stage_inpaint},     {"remesh", &Pipeline::stage_remesh},
            {"retexture", &Pipeline::stage_retexture}, {"metrics", &Pipeline::stage_metrics}};
        for (const StageEntry& s : stages)
            if ((this->*s.fn)()) result.stages_executed.push_back(s.name);
        result.manifest = manifest_;
        return result;
    }

private:
    using Outputs = std::vector<std::string>;  // relative paths written by a stage

    RunConfig cfg_;
    std::filesystem::path out_;
    RunManifest manifest_;

    std::string rel(const std::string& name) const { return name; }
    std::string abs(const std::string& name) const { return (out_ / name).string(); }

    void require(const std::string& dep, const std::string& stage) const {
        if (!manifest_.stage_complete(dep))
            throw StageError(cat("stage '", stage, "' requires completed stage '", dep,
                                 "'; run it first"));
    }

    // --- signatures -------------------------------------------------------

    std::string signature(const std::string& stage) const {
        nlohmann::json subset;
        std::string prev;
        std::vector<std::string> extra_files;
        if (stage == "render") {
            subset = {{"gsd", cfg_.gsd}, {"patch_px", cfg_.patch_px}, {"overlap", cfg_.overlap}};
            if (cfg_.codec_z_min) subset["codec_z_min"] = *cfg_.codec_z_min;
            if (cfg_.codec_z_max) subset["codec_z_max"] = *cfg_.codec_z_max;
            extra_files = pipeline_detail::mesh_file_set(cfg_.input_mesh);
        } else if (stage == "masks") {
            prev = manifest_.stage_signature("render");
            subset = {{"classes", config_to_json(cfg_)["classes"]},
                      {"class_table", config_to_json(cfg_)["class_table"]},
                      {"dilation_kernel", cfg_.dilation_kernel},
                      {"masks_dir", cfg_.masks_dir}};
            if (!cfg_.masks_dir.empty() && std::filesystem::exists(cfg_.masks_dir))
                for (const auto& e : std::filesystem::directory_iterator(cfg_.masks_dir))
                    if (e.path().extension() == ".png") extra_files.push_back(e.path().string());
            std::sort(extra_files.begin(), extra_files.end());
        } else if (stage == "inpaint") {
            prev = manifest_.stage_signature("masks");
            subset = config_to_json(cfg_)["backend"];
        } else if (stage == "remesh") {
            prev = manifest_.stage_signature("inpaint");
            subset = {{"merge_distance", cfg_.merge_distance},
                      {"replace_only_masked", cfg_.replace_only_masked},
                      {"degenerate_area_epsilon", cfg_.degenerate_area_epsilon},
                      {"diagnostics", cfg_.diagnostics}};
        } else if (stage == "retexture") {
            prev = manifest_.stage_signature("remesh");
            subset = {{"texture_mode", cfg_.texture_mode},
                      {"feather_px", cfg_.feather_px},
                      {"max_texture_side", cfg_.max_texture_side}};
        } else if (stage == "metrics") {
            prev = manifest_.stage_signature("inpaint");
            subset = nlohmann::json::object();
        }
        std::string blob = cat(prev, "|", subset.dump());
        for (const std::string& f : extra_files) blob += cat("|", f, "=", hash_file(f));
        return hash_bytes(blob);
    }

    bool outputs_intact(const std::string& stage) const {
        for (const std::string& relpath : manifest_.stage_outputs(stage)) {
            std::string path = abs(relpath);
            if (!std::filesystem::exists(path)) return false;
            if (!manifest_.doc.at("files").contains(relpath)) return false;
            if (manifest_.doc.at("files").at(relpath).get<std::string>() != hash_file(path))
                return false;
        }
        return true;
    }

    template <typename Fn>
    bool run_stage(const std::string& name, Fn&& body) {
        std::string sig = signature(name);
        if (manifest_.stage_complete(name) && manifest_.stage_signature(name) == sig &&
            outputs_intact(name))
            return false;
        manifest_.invalidate_stage(name);
        Outputs outputs;
        try {
            body(outputs);
        } catch (const StageError&) {
            save_manifest();  // record partial progress
            throw;
        } catch (const std::exception& e) {
            save_manifest();
            throw StageError(cat("stage '", name, "': ", e.what()));
        }
        for (const std::string& relpath : outputs)
            manifest_.record_file(relpath, hash_file(abs(relpath)));
        manifest_.complete_stage(name, sig, outputs);
        save_manifest();
        return true;
    }

    // --- shared loaders ---------------------------------------------------

    OrthoCamera camera_with_override(const WorldBounds& bounds) const {
        OrthoCamera cam = make_camera(bounds, cfg_.gsd);
        if (cfg_.codec_z_min) cam.codec = {*cfg_.codec_z_min, *cfg_.codec_z_max};
        return cam;
    }

    MaskMosaic rebuild_mask_mosaic(const PatchGrid& grid, const OrthoCamera& cam) const {
        MaskMosaic mosaic(cam.mosaic_width, cam.mosaic_height);
        for (const PatchRect& r : grid.patches) {
            BinaryMask m = load_mask_binary(abs(patch_filename(r.row, r.col, "maskbin", "png")));
            merge_into_mosaic(mosaic, m, r);
        }
        return mosaic;
    }

    BinaryMask coverage_from_triid(const RasterU32& triid) const {
        BinaryMask cov(triid.width(), triid.height(), 1, 0);
        for (std::size_t i = 0; i < triid.data().size(); ++i)
            cov.data()[i] = triid.data()[i] != kNoTriangle;
        return cov;
    }

    // --- stage bodies -----------------------------------------------------

    void do_render(Outputs& outputs) {
        TexturedMesh mesh = load_mesh(cfg_.input_mesh);
        OrthoCamera cam = camera_with_override(compute_bounds(mesh));
        PatchGrid grid = make_patch_grid(cam, cfg_.patch_px, cfg_.overlap);
        manifest_.set_camera(cam);
        manifest_.set_grid(grid);

        parallel_for(grid.patches.size(), cfg_.workers, [&](std::size_t i) {
            const PatchRect& r = grid.patches[i];
            try {
                BevPatch bev = rasterize_patch(mesh, cam, r);
                save_png8(abs(patch_filename(r.row, r.col, "color", "png")), bev.color);
                save_png16(abs(patch_filename(r.row, r.col, "height", "png")), bev.height);
                save_tri_id(abs(patch_filename(r.row, r.col, "triid", "bin")), bev.tri_id);
            } catch (const std::exception& e) {
                throw StageError(cat("stage 'render' failed at patch (", r.row, ",", r.col,
                                     "): ", e.what()));
            }
        });
        for (const PatchRect& r : grid.patches) {
            outputs.push_back(patch_filename(r.row, r.col, "color", "png"));
            outputs.push_back(patch_filename(r.row, r.col, "height", "png"));
            outputs.push_back(patch_filename(r.row, r.col, "triid", "bin"));
        }
    }

    void do_masks(Outputs& outputs) {
        OrthoCamera cam = manifest_.camera();
        PatchGrid grid = manifest_.grid();

        std::vector<BinaryMask> dilated(grid.patches.size());
        std::atomic<int> missing{0};
        parallel_for(grid.patches.size(), cfg_.workers, [&](std::size_t i) {
            const PatchRect& r = grid.patches[i];
            try {
                BinaryMask m(r.width, r.height, 1, 0);
                if (!cfg_.masks_dir.empty()) {
                    std::string path = (std::filesystem::path(cfg_.masks_dir) /
                                        patch_filename(r.row, r.col, "mask", "png"))
                                           .string();
                    if (std::filesystem::exists(path))
                        m = ingest_patch_mask(path, cfg_.classes, r.width, r.height);
                    else
                        missing.fetch_add(1);
                }
                dilated[i] = dilate(m, cfg_.dilation_kernel);
            } catch (const std::exception& e) {
                throw StageError(cat("stage 'masks' failed at patch (", r.row, ",", r.col,
                                     "): ", e.what()));
            }
        });
        if (cfg_.masks_dir.empty())
            manifest_.warn("no masks_dir configured; all masks empty");
        else if (missing.load() > 0)
            manifest_.warn(cat(missing.load(), " patches had no mask file; treated as empty"));

        MaskMosaic mosaic(cam.mosaic_width, cam.mosaic_height);
        for (std::size_t i = 0; i < grid.patches.size(); ++i)
            merge_into_mosaic(mosaic, dilated[i], grid.patches[i]);

        parallel_for(grid.patches.size(), cfg_.workers, [&](std::size_t i) {
            const PatchRect& r = grid.patches[i];
            save_mask_binary(abs(patch_filename(r.row, r.col, "maskbin", "png")),
                             extract_patch_mask(mosaic, r));
        });
        for (const PatchRect& r : grid.patches)
            outputs.push_back(patch_filename(r.row, r.col, "maskbin", "png"));
    }

    // Counting gate capping concurrent external backend processes.
    class ProcessGate {
    public:
        explicit ProcessGate(int slots) : slots_(slots) {}
        void acquire() {
            std::unique_lock<std::mutex> lock(m_);
            cv_.wait(lock, [this] { return slots_ > 0; });
            --slots_;
        }
        void release() {
            {
                std::lock_guard<std::mutex> lock(m_);
                ++slots_;
            }
            cv_.notify_one();
        }

    private:
        std::mutex m_;
        std::condition_variable cv_;
        int slots_;
    };

    struct GateHold {
        ProcessGate* gate = nullptr;
        ~GateHold() {
            if (gate) gate->release();
        }
    };

    void do_inpaint(Outputs& outputs) {
        PatchGrid grid = manifest_.grid();
        OrthoCamera cam = manifest_.camera();
        ProcessGate external_gate(cfg_.external_concurrency);

        parallel_for(grid.patches.size(), cfg_.workers, [&](std::size_t i) {
            const PatchRect& r = grid.patches[i];
            try {
                RasterU8 color = load_png8(abs(patch_filename(r.row, r.col, "color", "png")));
                RasterU16 height = load_png16(abs(patch_filename(r.row, r.col, "height", "png")));
                BinaryMask mask =
                    load_mask_binary(abs(patch_filename(r.row, r.col, "maskbin", "png")));
                BinaryMask coverage = coverage_from_triid(
                    load_tri_id(abs(patch_filename(r.row, r.col, "triid", "bin"))));

                GateHold hold;
                if (cfg_.backend.kind == BackendKind::external) {
                    external_gate.acquire();
                    hold.gate = &external_gate;
                }

                InpaintRequest creq;
                creq.pass = InpaintPass::color;
                creq.image = color;
                creq.mask = mask;
                creq.backend = cfg_.backend;
                creq.workdir = abs("tmp");
                RasterU8 color_out = std::get<RasterU8>(inpaint(creq));

                InpaintRequest hreq;
                hreq.pass = InpaintPass::height;
                hreq.image = height;
                hreq.mask = mask;
                hreq.valid = coverage;
                hreq.codec = cam.codec;
                hreq.backend = cfg_.backend;
                hreq.workdir = abs("tmp");
                RasterU16 height_out = std::get<RasterU16>(inpaint(hreq));

                save_png8(abs(patch_filename(r.row, r.col, "color_inpainted", "png")), color_out);
                save_png16(abs(patch_filename(r.row, r.col, "height_inpainted", "png")),
                           height_out);
            } catch (const std::exception& e) {
                throw StageError(cat("stage 'inpaint' failed at patch (", r.row, ",", r.col,
                                     "): ", e.what()));
            }
        });
        for (const PatchRect& r : grid.patches) {
            outputs.push_back(patch_filename(r.row, r.col, "color_inpainted", "png"));
            outputs.push_back(patch_filename(r.row, r.col, "height_inpainted", "png"));
        }
    }

    void do_remesh(Outputs& outputs) {
        OrthoCamera cam = manifest_.camera();
        PatchGrid grid = manifest_.grid();
        TexturedMesh mesh = load_mesh(cfg_.input_mesh);
        MaskMosaic mask = rebuild_mask_mosaic(grid, cam);

        RemeshConfig rcfg;
        rcfg.merge_distance = cfg_.merge_distance;
        rcfg.replace_only_masked = cfg_.replace_only_masked;
        rcfg.degenerate_area_epsilon = cfg_.degenerate_area_epsilon;

        TexturedMesh result;
        ReplaceStats rstats;
        MergeStats mstats;
        if (!mask.any()) {
            manifest_.warn("mask mosaic is empty; remesh passes geometry through unchanged");
            result = mesh;
        } else {
            std::vector<RasterU16> heights(grid.patches.size());
            std::vector<BinaryMask> coverages(grid.patches.size());
            parallel_for(grid.patches.size(), cfg_.workers, [&](std::size_t i) {
                const PatchRect& r = grid.patches[i];
                heights[i] =
                    load_png16(abs(patch_filename(r.row, r.col, "height_inpainted", "png")));
                coverages[i] = coverage_from_triid(
                    load_tri_id(abs(patch_filename(r.row, r.col, "triid", "bin"))));
            });
            HeightMosaic hm = assemble_height_mosaic(heights, coverages, grid, cam.codec,
                                                     cam.mosaic_width, cam.mosaic_height);
            TexturedMesh replaced = replace_elevations(mesh, hm, mask, cam, rcfg, &rstats);

            // Weld only the vertices the mask touched; static geometry must
            // survive byte-for-byte.
            std::vector<std::uint8_t> eligible(replaced.vertices.size(), 0);
            for (std::size_t v = 0; v < replaced.vertices.size(); ++v) {
                double u, vv;
                project_vertex(cam, replaced.vertices[v], u, vv);
                int px = std::clamp(static_cast<int>(std::floor(u)), 0, cam.mosaic_width - 1);
                int py = std::clamp(static_cast<int>(std::floor(vv)), 0, cam.mosaic_height - 1);
                eligible[v] = mask.get(px, py) ? 1 : 0;
            }
            result = merge_vertices(replaced, rcfg, &mstats,
                                    cfg_.replace_only_masked ? &eligible : nullptr);
        }

        if (cfg_.diagnostics) {
            save_png8(abs("wire_before.png"), pipeline_detail::wireframe_snapshot(mesh, cam));
            save_png8(abs("wire_after.png"), pipeline_detail::wireframe_snapshot(result, cam));
            outputs.push_back("wire_before.png");
            outputs.push_back("wire_after.png");
        }

        save_mesh(result, abs("mesh_remeshed.gltf"));
        for (const std::string& f : pipeline_detail::saved_mesh_outputs(result, "mesh_remeshed"))
            outputs.push_back(f);
        manifest_.doc["stats"]["changed_vertices"] = rstats.changed_vertices;
        manifest_.doc["stats"]["merged_vertices"] = mstats.merged_vertices;
        manifest_.doc["stats"]["dropped_triangles"] = mstats.dropped_triangles;
    }

    void do_retexture(Outputs& outputs) {
        OrthoCamera cam = manifest_.camera();
        PatchGrid grid = manifest_.grid();
        TexturedMesh mesh = load_mesh(abs("mesh_remeshed.gltf"));
        MaskMosaic mask = rebuild_mask_mosaic(grid, cam);

        TexturedMesh result;
        RetextureStats stats;
        if (!mask.any()) {
            manifest_.warn("mask mosaic is empty; retexture passes the mesh through unchanged");
            result = mesh;
        } else {
            std::vector<RasterU8> colors(grid.patches.size());
            parallel_for(grid.patches.size(), cfg_.workers, [&](std::size_t i) {
                const PatchRect& r = grid.patches[i];
                colors[i] =
                    load_png8(abs(patch_filename(r.row, r.col, "color_inpainted", "png")));
            });
            RasterU8 mosaic =
                assemble_color_mosaic(colors, grid, cam.mosaic_width, cam.mosaic_height);
            if (cfg_.texture_mode == "blend") {
                RetextureOptions opts;
                opts.max_texture_side = cfg_.max_texture_side;
                opts.feather_px = cfg_.feather_px;
                result = build_blend_layer(mesh, cam, mosaic, mask, opts, &stats);
                manifest_.doc["blend_contract"] =
                    "final = mix(base_tex(uv0), inpaint_tex(uv1), blend(uv1)/255); "
                    "non-normative convention, blend texture referenced in material extras";
            } else {
                result = resample_texture(mesh, cam, mosaic, mask, &stats);
            }
        }

        save_mesh(result, abs("mesh_out.gltf"));
        for (const std::string& f : pipeline_detail::saved_mesh_outputs(result, "mesh_out"))
            outputs.push_back(f);
        manifest_.doc["stats"]["uv1_clamped"] = stats.uv1_clamped;
        manifest_.doc["stats"]["skipped_uv_triangles"] = stats.skipped_triangles;
        manifest_.doc["stats"]["rewritten_texels"] = stats.rewritten_texels;
    }

    void do_metrics(Outputs& outputs) {
        PatchGrid grid = manifest_.grid();
        std::vector<PatchMetrics> records(grid.patches.size() * 2);
        std::vector<RasterU8> heatmaps(grid.patches.size());
        std::vector<std::size_t> mask_px(grid.patches.size(), 0);

        parallel_for(grid.patches.size(), cfg_.workers, [&](std::size_t i) {
            const PatchRect& r = grid.patches[i];
            try {
                RasterU8 color = load_png8(abs(patch_filename(r.row, r.col, "color", "png")));
                RasterU8 color_inp =
                    load_png8(abs(patch_filename(r.row, r.col, "color_inpainted", "png")));
                RasterU16 height = load_png16(abs(patch_filename(r.row, r.col, "height", "png")));
                RasterU16 height_inp =
                    load_png16(abs(patch_filename(r.row, r.col, "height_inpainted", "png")));
                BinaryMask mask =
                    load_mask_binary(abs(patch_filename(r.row, r.col, "maskbin", "png")));
                mask_px[i] = mask_count(mask);

                PatchMetrics pc;
                pc.row = r.row;
                pc.col = r.col;
                pc.pass = InpaintPass::color;
                pc.h_source = shannon_entropy(color);
                pc.h_inpainted = shannon_entropy(color_inp);
                pc.emd = emd_1d(histogram_color(color), histogram_color(color_inp));
                pc.mask_pixels = mask_px[i];
                records[i * 2] = pc;

                PatchMetrics ph = pc;
                ph.pass = InpaintPass::height;
                ph.h_source = shannon_entropy(height);
                ph.h_inpainted = shannon_entropy(height_inp);
                ph.emd = emd_1d(histogram_height(height), histogram_height(height_inp));
                records[i * 2 + 1] = ph;

                if (mask_px[i] > 0)
                    heatmaps[i] = elevation_diff_heatmap(height, height_inp, mask, color);
            } catch (const std::exception& e) {
                throw StageError(cat("stage 'metrics' failed at patch (", r.row, ",", r.col,
                                     "): ", e.what()));
            }
        });

        for (std::size_t i = 0; i < grid.patches.size(); ++i) {
            if (heatmaps[i].empty()) continue;
            const PatchRect& r = grid.patches[i];
            save_png8(abs(patch_filename(r.row, r.col, "diff", "png")), heatmaps[i]);
            outputs.push_back(patch_filename(r.row, r.col, "diff", "png"));
        }

        MetricsReport rep = aggregate(records);
        nlohmann::json per_patch = nlohmann::json::array();
        for (const PatchMetrics& rec : rep.records)
            per_patch.push_back({{"row", rec.row},
                                 {"col", rec.col},
                                 {"pass", rec.pass == InpaintPass::color ? "color" : "height"},
                                 {"h_source", rec.h_source},
                                 {"h_inpainted", rec.h_inpainted},
                                 {"emd", rec.emd},
                                 {"mask_pixels", rec.mask_pixels}});
        auto agg_json = [](const PassAggregate& a) {
            return nlohmann::json{{"count", a.count},
                                  {"mean_h_source", a.mean_h_source},
                                  {"mean_h_inpainted", a.mean_h_inpainted},
                                  {"mean_emd", a.mean_emd}};
        };
        nlohmann::json mj = {{"per_patch", per_patch},
                             {"aggregate",
                              {{"color", agg_json(rep.color)}, {"height", agg_json(rep.height)}}}};
        {
            std::ofstream f(abs("metrics.json"));
            f << mj.dump(1, '\t') << "\n";
        }
        {
            std::ofstream f(abs("metrics.txt"));
            f << metrics_table(rep);
        }
        outputs.push_back("metrics.json");
        outputs.push_back("metrics.txt");
    }
};

inline PipelineResult run_pipeline(const RunConfig& cfg) {
    Pipeline p(cfg);
    return p.run();
}

}  // namespace dsmscrub
