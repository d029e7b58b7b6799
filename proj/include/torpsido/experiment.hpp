#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace torpsido {

/// Config-driven experiment runner behind the CLI. Configs are strict JSON:
/// unknown keys are rejected, random families need seeds, and every module
/// precondition is audited before any computation starts.
/// ValidationError maps to exit code 2, ContractError to exit code 3.

const std::vector<std::string>& experiment_commands();

struct RunResult {
    std::string report_text;                   // serialized JSON report
    std::vector<std::filesystem::path> files;  // report first, then artifacts
};

RunResult run_experiment(const std::string& command, const std::string& config_text,
                         const std::filesystem::path& out_dir,
                         std::optional<std::uint64_t> seed_override = std::nullopt,
                         int threads = 1);

/// Full precondition audit without computation; empty result means valid.
std::vector<std::string> validate_experiment(const std::string& command,
                                             const std::string& config_text);

/// Re-derive the per-frequency/per-shell CSV tables from a report; returns
/// the files written.
std::vector<std::filesystem::path> emit_tables(const std::string& report_text,
                                               const std::filesystem::path& out_dir);

}  // namespace torpsido
