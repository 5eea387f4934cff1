#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fieldlab/errors.hpp"
#include "fieldlab/runner.hpp"
#include "json.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"fieldlab: radial bound states and their Kirchhoff transfers"};
    std::string task, config_path, out_dir;
    std::vector<std::string> sets;
    app.add_option("task", task, "check | solve | envelope | transfer | sweep | verify")
        ->required()
        ->check(CLI::IsMember({"check", "solve", "envelope", "transfer", "sweep", "verify"}));
    app.add_option("--config", config_path, "JSON run configuration");
    app.add_option("--set", sets, "override a dotted config path, key=value (repeatable)");
    app.add_option("--out", out_dir, "output directory");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : fieldlab::kExitConfig;
    }

    try {
        nlohmann::json doc = nlohmann::json::object();
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in)
                throw fieldlab::ConfigError("cannot open " + config_path);
            try {
                doc = nlohmann::json::parse(in);
            } catch (const nlohmann::json::exception& e) {
                throw fieldlab::ConfigError(config_path + ": " + e.what());
            }
        }
        for (const auto& s : sets)
            fieldlab::apply_override(doc, s);
        fieldlab::RunConfig cfg = fieldlab::parse_config(doc, fieldlab::parse_task(task));
        if (!out_dir.empty())
            cfg.out_dir = out_dir;
        return fieldlab::run(cfg, std::cout);
    } catch (const fieldlab::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return fieldlab::kExitConfig;
    }
}
