#pragma once

#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "vortspec/annulus.hpp"
#include "vortspec/ns_solver.hpp"
#include "vortspec/pressure.hpp"

namespace vortspec::cli {

// Every problem found in a config, reported together.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const { return problems_; }

private:
    std::vector<std::string> problems_;
};

struct CliConfig {
    RunConfig run;
    AnnulusGeometry annulus;
    GalerkinOptions galerkin;
    CirculationOptions circulation;
    PressureOptions pressure;
    std::string output_dir = "vortspec-out";
    int snapshot_every = 0;  // recorded samples between snapshots, 0: none
};

// Flat INI text with sections [domain], [solver], [init], [output].
// Unknown sections or keys, malformed values and range violations are all collected.
CliConfig parse_config(std::istream& in, const std::string& source = "<config>");
CliConfig load_config(const std::string& path);

// Range checks across sections, including the CFL bound of the initial data.
std::vector<std::string> validate(const CliConfig& cfg, bool check_cfl);

nlohmann::json to_json(const CliConfig& cfg);

// "0 1 c 1.0; 1 1 s 0.5": k j parity amplitude, separated by semicolons.
std::vector<std::pair<ModeIndex, double>> parse_modes(const std::string& text);
std::string modes_to_string(const std::vector<std::pair<ModeIndex, double>>& modes);

}  // namespace vortspec::cli
