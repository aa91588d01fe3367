// command-line driver: run a scenario config or a built-in recipe
#include <canard/canard.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

std::string slurp(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw canard::ConfigError("config: cannot read '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"canard: pinching and exponential-microscope experiments for slow-fast systems"};
    std::string config_path, recipe, out_dir = "out";
    std::vector<std::string> overrides;
    unsigned threads = 1;
    bool list = false;
    app.add_option("--config", config_path, "scenario config (JSON or key=value)");
    app.add_option("--recipe", recipe, "built-in recipe name");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--override", overrides, "key=value, dotted keys allowed (repeatable)");
    app.add_option("--threads", threads, "worker threads for sweeps")->check(CLI::PositiveNumber);
    app.add_flag("--list-recipes", list, "print recipe names and exit");
    auto* lr = app.add_subcommand("list-recipes", "print recipe names and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (list || lr->parsed()) {
        for (const auto& [name, desc] : canard::list_recipes())
            std::cout << name << "\t" << desc << "\n";
        return 0;
    }

    std::string scenario = "<none>";
    try {
        if (config_path.empty() == recipe.empty())
            throw canard::ConfigError("give exactly one of --config or --recipe");
        nlohmann::ordered_json j;
        if (!recipe.empty()) {
            scenario = recipe;
            j = canard::parse_config_text(canard::find_recipe(recipe).config);
        } else {
            scenario = config_path;
            j = canard::parse_config_text(slurp(config_path));
        }
        for (const auto& o : overrides)
            canard::apply_override(j, o);
        canard::ScenarioConfig cfg = canard::parse_scenario(j);
        auto res = canard::run_scenario(cfg, out_dir, threads);
        for (const auto& f : res.files)
            std::cout << f << "\n";
        return 0;
    } catch (const canard::ConfigError& e) {
        std::cerr << "config error [" << scenario << "]: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numeric failure [" << scenario << "]: " << e.what() << "\n";
        return 3;
    }
}
