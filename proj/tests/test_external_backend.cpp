// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <random>

#include "dsmscrub/inpaint.hpp"
#include "test_support.hpp"

using namespace dsmscrub;

namespace {

std::string fake_backend() {
    const char* path = std::getenv("FAKE_BACKEND");
    REQUIRE(path != nullptr);
    return path;
}

std::string command_for(const std::string& mode) {
    return cat(fake_backend(), " ", mode, " {image} {mask} {out}");
}

InpaintRequest color_request(const std::string& mode, const testsup::TempDir& dir) {
    std::mt19937 rng(3);
    RasterU8 img(12, 10, 3);
    for (auto& v : img.data()) v = static_cast<std::uint8_t>(rng());
    BinaryMask mask(12, 10, 1, 0);
    for (int y = 3; y < 7; ++y)
        for (int x = 4; x < 9; ++x) mask.at(x, y) = 1;
    InpaintRequest req;
    req.pass = InpaintPass::color;
    req.image = img;
    req.mask = mask;
    req.backend.kind = BackendKind::external;
    req.backend.command = command_for(mode);
    req.backend.timeout_s = 30;
    req.workdir = dir.str("tmp");
    return req;
}

}  // namespace

TEST_CASE("copy-utility backend returns the input unchanged") {
    testsup::TempDir dir;
    InpaintRequest req = color_request("copy", dir);
    RasterU8 out = std::get<RasterU8>(inpaint(req));
    REQUIRE(out == std::get<RasterU8>(req.image));
}

TEST_CASE("external backend output is composited: unmasked pixels bit-exact") {
    testsup::TempDir dir;
    InpaintRequest req = color_request("gray", dir);
    RasterU8 out = std::get<RasterU8>(inpaint(req));
    const RasterU8& in = std::get<RasterU8>(req.image);
    for (int y = 0; y < 10; ++y)
        for (int x = 0; x < 12; ++x)
            for (int c = 0; c < 3; ++c) {
                if (req.mask.at(x, y))
                    REQUIRE(out.at(x, y, c) == 128);
                else
                    REQUIRE(out.at(x, y, c) == in.at(x, y, c));
            }
}

TEST_CASE("external backend works for the 16-bit height pass") {
    testsup::TempDir dir;
    RasterU16 img(9, 9, 1, 4000);
    BinaryMask mask(9, 9, 1, 0);
    mask.at(4, 4) = 1;
    InpaintRequest req;
    req.pass = InpaintPass::height;
    req.image = img;
    req.mask = mask;
    req.codec = {0.0, 10.0};
    req.backend.kind = BackendKind::external;
    req.backend.command = command_for("gray");
    req.workdir = dir.str("tmp");
    RasterU16 out = std::get<RasterU16>(inpaint(req));
    CHECK(out.at(4, 4) == 32768);
    CHECK(out.at(0, 0) == 4000);
}

TEST_CASE("wrong-size output is a backend error naming dimensions") {
    testsup::TempDir dir;
    InpaintRequest req = color_request("wrongsize", dir);
    try {
        inpaint(req);
        FAIL("expected BackendError");
    } catch (const BackendError& e) {
        CHECK(std::string(e.what()).find("expected 12x10") != std::string::npos);
    }
}

TEST_CASE("nonzero exit is a backend error with captured stderr") {
    testsup::TempDir dir;
    InpaintRequest req = color_request("fail", dir);
    try {
        inpaint(req);
        FAIL("expected BackendError");
    } catch (const BackendError& e) {
        std::string msg = e.what();
        CHECK(msg.find("exited with code 1") != std::string::npos);
        CHECK(msg.find("simulated failure") != std::string::npos);
    }
}

TEST_CASE("timeout kills the backend and reports it") {
    testsup::TempDir dir;
    InpaintRequest req = color_request("hang", dir);
    req.backend.timeout_s = 0.3;
    try {
        inpaint(req);
        FAIL("expected BackendError");
    } catch (const BackendError& e) {
        CHECK(std::string(e.what()).find("timed out") != std::string::npos);
    }
}

TEST_CASE("empty mask never launches the external process") {
    testsup::TempDir dir;
    InpaintRequest req = color_request("fail", dir);  // would fail if launched
    req.mask = BinaryMask(12, 10, 1, 0);
    RasterU8 out = std::get<RasterU8>(inpaint(req));
    REQUIRE(out == std::get<RasterU8>(req.image));
}

TEST_CASE("command template placeholder expansion") {
    std::string cmd = expand_command_template("run {image} -m {mask} -o {out} # {image}",
                                              "/a/img.png", "/a/mask.png", "/a/out.png");
    CHECK(cmd == "run /a/img.png -m /a/mask.png -o /a/out.png # /a/img.png");
    REQUIRE_THROWS_AS(run_external_backend("prog {image} {out}", 1.0, "i", "m", "o"),
                      ConfigError);
}

TEST_CASE("missing output file is a backend error") {
    testsup::TempDir dir;
    InpaintRequest req = color_request("copy", dir);
    req.backend.command = "true {image} {mask} {out}";  // exits 0, writes nothing
    try {
        inpaint(req);
        FAIL("expected BackendError");
    } catch (const BackendError& e) {
        CHECK(std::string(e.what()).find("no output") != std::string::npos);
    }
}
