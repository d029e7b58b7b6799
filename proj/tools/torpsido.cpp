// torpsido — config-driven experiments for truncated periodic and discrete
// vector-valued pseudo-differential operators. Every command writes a JSON
// report (with the resolved config inline) plus CSV/binary artifacts, and
// cross-checks its results against the dense-matrix oracle. Exit codes:
// 0 success, 2 validation error, 3 numerical-contract failure.

#include "torpsido/errors.hpp"
#include "torpsido/experiment.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw torpsido::ValidationError("cannot read config: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

int resolve_threads(int flag_value) {
    if (flag_value > 0) return flag_value;
    if (const char* env = std::getenv("TORPSIDO_THREADS")) {
        const int parsed = std::atoi(env);
        if (parsed > 0) return parsed;
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"torpsido: truncated toroidal pseudo-differential operator experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    bool seed_given = false;
    int threads = 0;

    std::string validate_target;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "experiment config (JSON)")->required();
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--seed", seed, "override the config seed")
            ->each([&](const std::string&) { seed_given = true; });
        cmd->add_option("--threads", threads, "worker threads (TORPSIDO_THREADS as fallback)");
    };

    for (const auto& name : torpsido::experiment_commands()) {
        add_common(app.add_subcommand(name));
    }
    CLI::App* validate = app.add_subcommand("validate", "audit a config without computing");
    add_common(validate);
    validate->add_option("--command", validate_target,
                         "audit preconditions of this command (omit for generic checks)");

    CLI11_PARSE(app, argc, argv);
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        const std::string config_text = read_file(config_path);
        if (command == "validate") {
            const auto diagnostics = torpsido::validate_experiment(validate_target, config_text);
            for (const auto& d : diagnostics) std::cerr << d << "\n";
            return diagnostics.empty() ? 0 : 2;
        }
        const auto result = torpsido::run_experiment(
            command, config_text, out_dir,
            seed_given ? std::optional<std::uint64_t>(seed) : std::nullopt,
            resolve_threads(threads));
        for (const auto& file : result.files) std::cout << file.string() << "\n";
        return 0;
    } catch (const torpsido::ContractError& err) {
        std::cerr << "numerical contract failure: " << err.what() << "\n";
        return 3;
    } catch (const torpsido::ValidationError& err) {
        std::cerr << "validation error: " << err.what() << "\n";
        return 2;
    } catch (const std::exception& err) {
        std::cerr << "validation error: " << err.what() << "\n";
        return 2;
    }
}
