// SPDX-License-Identifier: Apache-2.0
#pragma once

// glTF 2.0 subset reader/writer: one scene, one mesh node, triangle
// primitives, float32 positions and UVs, u16/u32 indices, up to two UV sets,
// PNG textures (sidecar files or embedded data URIs). Numeric payloads are
// written as raw little-endian words so geometry round-trips bit-exactly.
//
// Texture roles beyond the base color map are carried in material extras:
//   extras: { "inpaint_texture": <texture index>, "blend_mask_texture": <...> }
// which keeps the files loadable by standard viewers.

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dsmscrub/image_io.hpp"
#include "dsmscrub/mesh.hpp"

namespace dsmscrub {

namespace gltf_detail {

using nlohmann::json;

inline void append_f32le(std::string& out, float f) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    detail::put_u32le(out, bits);
}

inline float take_f32le(const unsigned char* p) {
    std::uint32_t bits = detail::get_u32le(p);
    float f;
    std::memcpy(&f, &bits, 4);
    return f;
}

inline std::string read_file_bytes(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError(cat("cannot open: ", path.string()));
    return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

inline bool is_data_uri(const std::string& uri) { return uri.rfind("data:", 0) == 0; }

inline std::string decode_data_uri(const std::string& uri) {
    auto comma = uri.find(',');
    if (comma == std::string::npos || uri.find(";base64") == std::string::npos)
        throw ParseError("unsupported data URI (expected base64)");
    return base64_decode(uri.substr(comma + 1));
}

struct AccessorView {
    const unsigned char* data = nullptr;
    std::size_t count = 0;
    int component_type = 0;
    std::string type;
};

inline AccessorView resolve_accessor(const json& doc, int accessor_index,
                                     const std::vector<std::string>& buffers) {
    const json& acc = doc.at("accessors").at(accessor_index);
    const json& view = doc.at("bufferViews").at(acc.at("bufferView").get<int>());
    const std::string& buf = buffers.at(view.at("buffer").get<int>());
    std::size_t offset = view.value("byteOffset", 0u) + acc.value("byteOffset", 0u);
    AccessorView out;
    out.count = acc.at("count").get<std::size_t>();
    out.component_type = acc.at("componentType").get<int>();
    out.type = acc.at("type").get<std::string>();
    int comp_size = (out.component_type == 5123) ? 2 : 4;
    int comps = out.type == "VEC3" ? 3 : out.type == "VEC2" ? 2 : 1;
    if (view.contains("byteStride") &&
        view.at("byteStride").get<int>() != comp_size * comps)
        throw ParseError("interleaved bufferViews are outside the supported subset");
    if (offset + out.count * comp_size * comps > buf.size())
        throw ParseError("accessor exceeds buffer length");
    out.data = reinterpret_cast<const unsigned char*>(buf.data()) + offset;
    return out;
}

inline std::vector<float> read_float_accessor(const AccessorView& v, int comps) {
    if (v.component_type != 5126) throw ParseError("expected float accessor");
    std::vector<float> out(v.count * comps);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = take_f32le(v.data + i * 4);
    return out;
}

}  // namespace gltf_detail

/// Loads a glTF-subset file and validates the mesh invariants.
inline TexturedMesh load_mesh(const std::string& path_str) {
    namespace fs = std::filesystem;
    using nlohmann::json;
    fs::path path(path_str);
    if (!fs::exists(path)) throw IoError(cat("no such file: ", path_str));

    json doc;
    try {
        std::ifstream f(path);
        doc = json::parse(f);
    } catch (const json::parse_error& e) {
        throw ParseError(cat("glTF parse error at byte ", e.byte, " in ", path_str, ": ",
                             e.what()));
    }

    try {
        // Resolve buffers (sidecar or embedded).
        std::vector<std::string> buffers;
        for (const json& b : doc.value("buffers", json::array())) {
            std::string uri = b.at("uri").get<std::string>();
            buffers.push_back(gltf_detail::is_data_uri(uri)
                                  ? gltf_detail::decode_data_uri(uri)
                                  : gltf_detail::read_file_bytes(path.parent_path() / uri));
        }

        const json& meshes = doc.at("meshes");
        if (meshes.size() != 1) throw ParseError("expected exactly one mesh");
        const json& prims = meshes.at(0).at("primitives");
        if (prims.size() != 1) throw ParseError("expected exactly one primitive");
        const json& prim = prims.at(0);
        if (prim.value("mode", 4) != 4) throw ParseError("only triangle primitives supported");

        TexturedMesh mesh;
        const json& attrs = prim.at("attributes");
        {
            auto pos = gltf_detail::resolve_accessor(doc, attrs.at("POSITION").get<int>(),
                                                     buffers);
            if (pos.type != "VEC3") throw ParseError("POSITION must be VEC3");
            auto vals = gltf_detail::read_float_accessor(pos, 3);
            mesh.vertices.resize(pos.count);
            for (std::size_t i = 0; i < pos.count; ++i)
                mesh.vertices[i] = {vals[i * 3], vals[i * 3 + 1], vals[i * 3 + 2]};
        }
        auto read_uv = [&](const char* name, std::vector<Vec2f>& out) {
            if (!attrs.contains(name)) return;
            auto acc = gltf_detail::resolve_accessor(doc, attrs.at(name).get<int>(), buffers);
            if (acc.type != "VEC2") throw ParseError(cat(name, " must be VEC2"));
            auto vals = gltf_detail::read_float_accessor(acc, 2);
            out.resize(acc.count);
            for (std::size_t i = 0; i < acc.count; ++i) out[i] = {vals[i * 2], vals[i * 2 + 1]};
        };
        read_uv("TEXCOORD_0", mesh.uv0);
        read_uv("TEXCOORD_1", mesh.uv1);

        {
            if (!prim.contains("indices")) throw ParseError("unindexed meshes unsupported");
            auto idx = gltf_detail::resolve_accessor(doc, prim.at("indices").get<int>(),
                                                     buffers);
            if (idx.count % 3 != 0) throw ParseError("index count not divisible by 3");
            mesh.triangles.resize(idx.count / 3);
            for (std::size_t i = 0; i < idx.count; ++i) {
                std::uint32_t v;
                if (idx.component_type == 5125)
                    v = detail::get_u32le(idx.data + i * 4);
                else if (idx.component_type == 5123)
                    v = idx.data[i * 2] | (idx.data[i * 2 + 1] << 8);
                else
                    throw ParseError("index componentType must be u16 or u32");
                mesh.triangles[i / 3][i % 3] = v;
            }
        }

        // Images / textures.
        std::vector<std::string> image_names;
        for (const json& img : doc.value("images", json::array())) {
            std::string uri = img.value("uri", "");
            std::string name = img.value("name", "");
            RasterU8 pixels;
            if (gltf_detail::is_data_uri(uri)) {
                if (name.empty()) name = cat("texture", image_names.size());
                pixels = load_png8_from_memory(gltf_detail::decode_data_uri(uri), path_str);
            } else {
                if (name.empty()) name = fs::path(uri).stem().string();
                pixels = load_png8((path.parent_path() / uri).string());
            }
            image_names.push_back(name);
            mesh.textures.emplace(name, std::move(pixels));
        }
        auto texture_name = [&](int tex_index) -> std::string {
            const json& tex = doc.at("textures").at(tex_index);
            return image_names.at(tex.at("source").get<int>());
        };
        if (prim.contains("material")) {
            const json& mat = doc.at("materials").at(prim.at("material").get<int>());
            if (mat.contains("pbrMetallicRoughness") &&
                mat.at("pbrMetallicRoughness").contains("baseColorTexture"))
                mesh.material.base_texture = texture_name(
                    mat.at("pbrMetallicRoughness").at("baseColorTexture").at("index").get<int>());
            if (mat.contains("extras")) {
                const json& ex = mat.at("extras");
                if (ex.contains("inpaint_texture"))
                    mesh.material.inpaint_texture = texture_name(ex.at("inpaint_texture").get<int>());
                if (ex.contains("blend_mask_texture"))
                    mesh.material.blend_mask_texture =
                        texture_name(ex.at("blend_mask_texture").get<int>());
            }
        }

        validate_mesh(mesh);
        return mesh;
    } catch (const json::exception& e) {
        throw ParseError(cat("glTF structure error in ", path_str, ": ", e.what()));
    }
}

/// Writes mesh as <path>.gltf + sibling .bin + one PNG per texture.
inline void save_mesh(const TexturedMesh& mesh, const std::string& path_str) {
    namespace fs = std::filesystem;
    using nlohmann::json;
    validate_mesh(mesh);

    fs::path path(path_str);
    std::string stem = path.stem().string();
    fs::path dir = path.parent_path();

    std::string bin;
    bin.reserve(mesh.vertices.size() * 20 + mesh.triangles.size() * 12);
    json accessors = json::array();
    json views = json::array();

    auto add_view = [&](std::size_t offset, std::size_t length) {
        views.push_back({{"buffer", 0}, {"byteOffset", offset}, {"byteLength", length}});
        return static_cast<int>(views.size() - 1);
    };

    // POSITION
    Vec3f lo{}, hi{};
    if (!mesh.vertices.empty()) lo = hi = mesh.vertices[0];
    std::size_t pos_off = bin.size();
    for (const Vec3f& v : mesh.vertices) {
        gltf_detail::append_f32le(bin, v.x);
        gltf_detail::append_f32le(bin, v.y);
        gltf_detail::append_f32le(bin, v.z);
        lo = {std::min(lo.x, v.x), std::min(lo.y, v.y), std::min(lo.z, v.z)};
        hi = {std::max(hi.x, v.x), std::max(hi.y, v.y), std::max(hi.z, v.z)};
    }
    accessors.push_back({{"bufferView", add_view(pos_off, bin.size() - pos_off)},
                         {"componentType", 5126},
                         {"count", mesh.vertices.size()},
                         {"type", "VEC3"},
                         {"min", {lo.x, lo.y, lo.z}},
                         {"max", {hi.x, hi.y, hi.z}}});
    int pos_acc = 0;

    auto add_uv = [&](const std::vector<Vec2f>& uv) {
        std::size_t off = bin.size();
        for (const Vec2f& t : uv) {
            gltf_detail::append_f32le(bin, t.u);
            gltf_detail::append_f32le(bin, t.v);
        }
        accessors.push_back({{"bufferView", add_view(off, bin.size() - off)},
                             {"componentType", 5126},
                             {"count", uv.size()},
                             {"type", "VEC2"}});
        return static_cast<int>(accessors.size() - 1);
    };
    int uv0_acc = add_uv(mesh.uv0);
    int uv1_acc = mesh.has_uv1() ? add_uv(mesh.uv1) : -1;

    std::size_t idx_off = bin.size();
    for (const Tri& t : mesh.triangles)
        for (std::uint32_t v : t) detail::put_u32le(bin, v);
    accessors.push_back({{"bufferView", add_view(idx_off, bin.size() - idx_off)},
                         {"componentType", 5125},
                         {"count", mesh.triangles.size() * 3},
                         {"type", "SCALAR"}});
    int idx_acc = static_cast<int>(accessors.size() - 1);

    // Textures: sidecar PNGs named <stem>_<texname>.png.
    json images = json::array();
    json textures = json::array();
    std::map<std::string, int> tex_index;
    for (const auto& [name, pixels] : mesh.textures) {
        std::string file = cat(stem, "_", name, ".png");
        save_png8((dir / file).string(), pixels);
        images.push_back({{"uri", file}, {"name", name}});
        textures.push_back({{"source", static_cast<int>(images.size() - 1)}, {"name", name}});
        tex_index[name] = static_cast<int>(textures.size() - 1);
    }

    json attributes = {{"POSITION", pos_acc}, {"TEXCOORD_0", uv0_acc}};
    if (uv1_acc >= 0) attributes["TEXCOORD_1"] = uv1_acc;
    json prim = {{"attributes", attributes}, {"indices", idx_acc}, {"mode", 4}};

    json doc = {{"asset", {{"version", "2.0"}, {"generator", "dsmscrub"}}},
                {"scene", 0},
                {"scenes", json::array({{{"nodes", {0}}}})},
                {"nodes", json::array({{{"mesh", 0}}})},
                {"buffers",
                 json::array({{{"uri", cat(stem, ".bin")}, {"byteLength", bin.size()}}})},
                {"bufferViews", views},
                {"accessors", accessors}};
    if (!images.empty()) {
        doc["images"] = images;
        doc["textures"] = textures;
    }
    if (!mesh.material.base_texture.empty() || !mesh.material.inpaint_texture.empty() ||
        !mesh.material.blend_mask_texture.empty()) {
        json mat = json::object();
        if (!mesh.material.base_texture.empty())
            mat["pbrMetallicRoughness"] = {
                {"baseColorTexture", {{"index", tex_index.at(mesh.material.base_texture)}}}};
        json extras = json::object();
        if (!mesh.material.inpaint_texture.empty())
            extras["inpaint_texture"] = tex_index.at(mesh.material.inpaint_texture);
        if (!mesh.material.blend_mask_texture.empty())
            extras["blend_mask_texture"] = tex_index.at(mesh.material.blend_mask_texture);
        if (!extras.empty()) mat["extras"] = extras;
        doc["materials"] = json::array({mat});
        prim["material"] = 0;
    }
    doc["meshes"] = json::array({{{"primitives", json::array({prim})}}});

    {
        std::ofstream f(dir / cat(stem, ".bin"), std::ios::binary);
        if (!f) throw IoError(cat("cannot write: ", (dir / cat(stem, ".bin")).string()));
        f.write(bin.data(), static_cast<std::streamsize>(bin.size()));
        if (!f) throw IoError("short write on .bin");
    }
    std::ofstream f(path);
    if (!f) throw IoError(cat("cannot write: ", path_str));
    f << doc.dump(1, '\t') << "\n";
    if (!f) throw IoError(cat("short write: ", path_str));
}

}  // namespace dsmscrub
