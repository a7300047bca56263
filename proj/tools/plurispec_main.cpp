// plurispec: numerical experiments with Toeplitz operators on truncated
// holomorphic, anti-holomorphic and pluriharmonic Bergman/Fock spaces.
//
//   plurispec <command> --config <path> [--set key=value]... [--jobs N]

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "plurispec/cli.hpp"
#include "plurispec/version.hpp"

namespace {

const std::vector<std::string> kCommands = {
    "assemble",        "blocks",       "berezin",     "quantize-norm",
    "quantize-semicomm", "quantize-third", "berezin-converge", "spectrum",
    "compactness",     "phh-check",    "phh-fredholm", "selftest"};

nlohmann::json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw plurispec::config_error("cannot read config file " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw plurispec::config_error("config parse failure in " + path + ": " + e.what());
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string(plurispec::kVersion) +
                 " - Toeplitz operators on truncated pluriharmonic function spaces"};
    app.set_version_flag("--version", plurispec::kVersion);
    app.require_subcommand(1);

    int jobs = 1;
    app.add_option("--jobs", jobs, "worker threads for independent work items")
        ->capture_default_str();

    struct Sub {
        CLI::App* cmd;
        std::string config_path;
        std::vector<std::string> overrides;
    };
    std::vector<Sub> subs;
    subs.reserve(kCommands.size()); // option bindings hold addresses into this vector
    for (const auto& name : kCommands) {
        subs.emplace_back();
        Sub& s = subs.back();
        s.cmd = app.add_subcommand(name);
        s.cmd->fallthrough(); // global flags like --jobs may follow the command
        auto* opt = s.cmd->add_option("--config", s.config_path, "JSON config path");
        if (name != "selftest") opt->required();
        s.cmd->add_option("--set", s.overrides, "dotted-path overrides, key=value");
    }

    CLI11_PARSE(app, argc, argv);

    for (std::size_t i = 0; i < subs.size(); ++i) {
        if (!subs[i].cmd->parsed()) continue;
        nlohmann::json config = nlohmann::json::object();
        try {
            if (!subs[i].config_path.empty()) config = load_config(subs[i].config_path);
            for (const auto& ov : subs[i].overrides) plurispec::cli::apply_override(config, ov);
        } catch (const plurispec::config_error& e) {
            std::cerr << "configuration error: " << e.what() << "\n";
            return 2;
        }
        return plurispec::cli::run_command(kCommands[i], config, jobs, std::cout, std::cerr);
    }
    std::cerr << "no command given\n";
    return 2;
}
