#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace vortspec::cli {

inline constexpr const char* kToolVersion = "1.0.0";

// manifest.json is written when the run starts and rewritten when it ends, so a crash
// leaves a manifest with status "running".
class RunManifest {
public:
    RunManifest(std::filesystem::path out_dir, std::string subcommand, std::string config_path,
                nlohmann::json parameters, std::optional<std::uint64_t> seed);

    const std::filesystem::path& dir() const { return dir_; }
    // Path of an output file under the run directory, recorded in the manifest.
    std::filesystem::path output(const std::string& relative);
    void finish(const std::string& status, int exit_code);
    nlohmann::json json() const;

private:
    void write() const;

    std::filesystem::path dir_;
    std::string subcommand_, config_path_, status_ = "running";
    nlohmann::json parameters_;
    std::optional<std::uint64_t> seed_;
    std::vector<std::string> outputs_;
    std::chrono::steady_clock::time_point start_;
    double wall_seconds_ = 0.0;
    int exit_code_ = -1;
};

}  // namespace vortspec::cli
