#include "vortspec_cli/manifest.hpp"

#include <fstream>
#include <stdexcept>

#include "vortspec/parallel.hpp"

namespace vortspec::cli {

RunManifest::RunManifest(std::filesystem::path out_dir, std::string subcommand, std::string config_path,
                         nlohmann::json parameters, std::optional<std::uint64_t> seed)
    : dir_(std::move(out_dir)),
      subcommand_(std::move(subcommand)),
      config_path_(std::move(config_path)),
      parameters_(std::move(parameters)),
      seed_(seed),
      start_(std::chrono::steady_clock::now())
{
    std::filesystem::create_directories(dir_);
    write();
}

std::filesystem::path RunManifest::output(const std::string& relative)
{
    const std::filesystem::path p = dir_ / relative;
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    outputs_.push_back(relative);
    write();
    return p;
}

void RunManifest::finish(const std::string& status, int exit_code)
{
    status_ = status;
    exit_code_ = exit_code;
    wall_seconds_ = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    write();
}

nlohmann::json RunManifest::json() const
{
    nlohmann::json j;
    j["subcommand"] = subcommand_;
    j["config_path"] = config_path_;
    j["parameters"] = parameters_;
    j["output_dir"] = dir_.string();
    j["seed"] = seed_ ? nlohmann::json(*seed_) : nlohmann::json(nullptr);
    j["tool_version"] = kToolVersion;
    j["threads"] = thread_count();
    j["status"] = status_;
    j["exit_code"] = exit_code_;
    j["wall_clock_seconds"] = wall_seconds_;
    j["outputs"] = outputs_;
    return j;
}

void RunManifest::write() const
{
    const std::filesystem::path tmp = dir_ / "manifest.json.tmp";
    {
        std::ofstream os(tmp);
        if (!os) throw std::runtime_error("cannot write " + tmp.string());
        os << json().dump(2) << '\n';
    }
    std::filesystem::rename(tmp, dir_ / "manifest.json");
}

}  // namespace vortspec::cli
