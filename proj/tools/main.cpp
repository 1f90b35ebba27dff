#include <cstdlib>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "config.hpp"
#include "run.hpp"

int main(int argc, char** argv)
{
    using namespace nonloc::cli;
    CLI::App app{"Nonlocal operator experiments"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    std::string config_path, out_dir;
    for (const std::string& kind : experiment_kinds()) {
        CLI::App* sub = app.add_subcommand(kind, "run the " + kind + " experiment");
        sub->add_option("-c,--config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
        sub->add_option("-o,--out", out_dir, "output directory (overrides the config and NONLOC_OUTPUT_DIR)");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : ExitCode::config_error;
    }
    const std::string kind = app.get_subcommands().front()->get_name();

    RunConfig cfg;
    try {
        nlohmann::json doc;
        {
            std::ifstream in(config_path);
            try {
                doc = nlohmann::json::parse(in);
            } catch (const nlohmann::json::parse_error& e) {
                throw ConfigError({config_path + ": " + e.what()});
            }
        }
        // The subcommand names the experiment; a config may repeat it but not contradict it.
        if (doc.is_object() && !doc.contains("experiment"))
            doc["experiment"] = kind;
        cfg = parse_config(doc);
        if (cfg.experiment != kind)
            throw ConfigError({"experiment: config is for '" + cfg.experiment + "', not '" + kind + "'"});
    } catch (const ConfigError& e) {
        for (const auto& msg : e.errors)
            std::cerr << "config error: " << msg << '\n';
        return ExitCode::config_error;
    }
    if (out_dir.empty()) {
        const char* env = std::getenv("NONLOC_OUTPUT_DIR");
        out_dir = env && *env ? env : cfg.output_dir;
    }
    return run_experiment(cfg, out_dir);
}
