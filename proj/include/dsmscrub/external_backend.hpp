// SPDX-License-Identifier: Apache-2.0
#pragma once

// Subprocess protocol for external inpainting backends (deep models run out
// of process). Files only: input PNG, mask PNG (255 = fill), output PNG with
// identical dimensions and bit depth; exit code 0 means success. The command
// template is expanded with absolute paths for {image}, {mask} and {out}.

#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <string>
#include <variant>

#include "dsmscrub/image_io.hpp"

namespace dsmscrub {

struct CommandResult {
    int exit_code = -1;
    bool timed_out = false;
    std::string stderr_output;
};

/// Runs `cmd` through /bin/sh with a wall-clock timeout, capturing stderr.
/// On timeout the whole process group is killed.
inline CommandResult run_command(const std::string& cmd, double timeout_s) {
    int err_pipe[2];
    if (::pipe(err_pipe) != 0) throw BackendError("pipe() failed");

    pid_t pid = ::fork();
    if (pid < 0) {
        ::close(err_pipe[0]);
        ::close(err_pipe[1]);
        throw BackendError("fork() failed");
    }
    if (pid == 0) {
        ::setpgid(0, 0);
        ::dup2(err_pipe[1], 2);
        ::close(err_pipe[0]);
        ::close(err_pipe[1]);
        ::execl("/bin/sh", "sh", "-c", cmd.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }

    ::close(err_pipe[1]);
    CommandResult res;
    const auto deadline =
        std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_s);
    constexpr std::size_t kMaxCapture = 64 * 1024;
    bool exited = false;
    int status = 0;

    auto drain = [&](int timeout_ms) {
        pollfd pfd{err_pipe[0], POLLIN, 0};
        if (::poll(&pfd, 1, timeout_ms) > 0 && (pfd.revents & (POLLIN | POLLHUP))) {
            char buf[4096];
            ssize_t n = ::read(err_pipe[0], buf, sizeof buf);
            if (n > 0 && res.stderr_output.size() < kMaxCapture)
                res.stderr_output.append(buf, static_cast<std::size_t>(
                                                  std::min<ssize_t>(n, kMaxCapture -
                                                                           res.stderr_output.size())));
            return n;
        }
        return static_cast<ssize_t>(-1);
    };

    while (!exited) {
        pid_t r = ::waitpid(pid, &status, WNOHANG);
        if (r == pid) {
            exited = true;
            break;
        }
        if (std::chrono::steady_clock::now() >= deadline) {
            ::kill(-pid, SIGKILL);
            ::kill(pid, SIGKILL);
            ::waitpid(pid, &status, 0);
            res.timed_out = true;
            exited = true;
            break;
        }
        drain(20);
    }
    // Flush whatever stderr remains.
    while (drain(0) > 0) {
    }
    ::close(err_pipe[0]);

    if (WIFEXITED(status))
        res.exit_code = WEXITSTATUS(status);
    else if (WIFSIGNALED(status))
        res.exit_code = 128 + WTERMSIG(status);
    return res;
}

using ExternalImage = std::variant<RasterU8, RasterU16>;

inline std::string expand_command_template(std::string tmpl, const std::string& image,
                                           const std::string& mask, const std::string& out) {
    auto replace_all = [&](const std::string& key, const std::string& value) {
        std::size_t pos = 0;
        while ((pos = tmpl.find(key, pos)) != std::string::npos) {
            tmpl.replace(pos, key.size(), value);
            pos += value.size();
        }
    };
    namespace fs = std::filesystem;
    replace_all("{image}", fs::absolute(image).string());
    replace_all("{mask}", fs::absolute(mask).string());
    replace_all("{out}", fs::absolute(out).string());
    return tmpl;
}

/// Invokes the backend command and loads + validates its output against the
/// input file's dimensions and bit depth. Compositing over the original is
/// the caller's job (see inpaint()).
inline ExternalImage run_external_backend(const std::string& command_template,
                                          double timeout_s, const std::string& image_path,
                                          const std::string& mask_path,
                                          const std::string& out_path) {
    for (const char* ph : {"{image}", "{mask}", "{out}"})
        if (command_template.find(ph) == std::string::npos)
            throw ConfigError(cat("external command template missing ", ph));

    std::error_code ec;
    std::filesystem::remove(out_path, ec);  // never accept a stale output

    std::string cmd = expand_command_template(command_template, image_path, mask_path, out_path);
    CommandResult res = run_command(cmd, timeout_s);
    if (res.timed_out)
        throw BackendError(cat("external backend timed out after ", timeout_s, " s: ", cmd));
    if (res.exit_code != 0)
        throw BackendError(cat("external backend exited with code ", res.exit_code, ": ", cmd,
                               "\nstderr: ", res.stderr_output));
    if (!std::filesystem::exists(out_path))
        throw BackendError(cat("external backend wrote no output: ", out_path,
                               "\nstderr: ", res.stderr_output));

    PngHeader in_hdr = probe_png(image_path);
    PngHeader out_hdr = probe_png(out_path);
    if (in_hdr.width != out_hdr.width || in_hdr.height != out_hdr.height)
        throw BackendError(cat("external backend output is ", out_hdr.width, "x",
                               out_hdr.height, ", expected ", in_hdr.width, "x",
                               in_hdr.height));
    if (in_hdr.bit_depth != out_hdr.bit_depth)
        throw BackendError(cat("external backend output bit depth ", out_hdr.bit_depth,
                               ", expected ", in_hdr.bit_depth));

    if (out_hdr.bit_depth == 16) return load_png16(out_path);
    return load_png8(out_path);
}

}  // namespace dsmscrub
