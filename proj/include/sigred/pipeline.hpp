#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sigred/problem.hpp"

namespace sigred {

struct RunOptions {
    std::optional<Mode> mode;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> samples;
    std::optional<double> tolerance;
    std::optional<double> t_end;
    std::optional<double> step;
    std::optional<std::filesystem::path> csv_dir;
    bool timing = false;  // wall times make reports non-reproducible
};

/// Stage verdicts and numbers for one command. `data` is the machine
/// rendering; render_text prints the same content.
struct Report {
    nlohmann::ordered_json data;
    bool pass = false;
};

/// Commands accepted by run_command.
const std::vector<std::string>& command_names();

/// Runs one command on a problem. Throws InputError when the problem lacks
/// what the command needs (no sigma for `check`, no change for `reduce`).
Report run_command(const std::string& command, Problem problem, const RunOptions& options = {});

/// Runs `validate` on every *.json file of `dir` in name order. Throws
/// InputError when the directory is missing or holds no problem file.
Report run_corpus(const std::filesystem::path& dir, const RunOptions& options = {});

/// Indented text with numbers at 6 significant digits.
std::string render_text(const Report& report);

} // namespace sigred
