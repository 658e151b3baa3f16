// sigma-reduce: command-line front end of the reduction pipeline.
//
// Exit status: 0 when every stage passes, 1 on a verification failure,
// 2 on bad input.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "sigred/pipeline.hpp"

namespace {

constexpr int kFail = 1;
constexpr int kBadInput = 2;

} // namespace

int main(int argc, char** argv) {
    using namespace sigred;
    CLI::App app{"Symmetry reduction of autonomous ODE systems"};
    app.require_subcommand(1);

    std::string file;
    std::string mode;
    RunOptions opt;
    std::string out_path;
    std::string csv_dir;
    bool no_autonomize = false;

    auto add_common = [&](CLI::App* sub, bool needs_file) {
        if (needs_file) {
            sub->add_option("file", file, "problem file (JSON)")->required();
        } else {
            sub->add_option("dir", file, "corpus directory")->required();
        }
        sub->add_option("--mode", mode, "strict or orbital")->check(CLI::IsMember({"strict", "orbital"}));
        sub->add_option("--seed", opt.seed, "sampling seed");
        sub->add_option("--samples", opt.samples, "sample points per check");
        sub->add_option("--tol", opt.tolerance, "relative tolerance");
        sub->add_option("--t-end", opt.t_end, "integration horizon");
        sub->add_option("--step", opt.step, "integration step");
        sub->add_option("--out", out_path, "write the JSON report here");
        sub->add_option("--csv", csv_dir, "write trajectories as CSV into this directory");
        sub->add_flag("--no-autonomize", no_autonomize, "reject time-dependent systems");
        sub->add_flag("--timing", opt.timing, "add wall times to the report");
    };

    const std::vector<std::pair<std::string, std::string>> help{
        {"check", "verify the sigma-symmetry condition"},
        {"solve-sigma", "solve the determining equations for sigma"},
        {"prolong", "print the sigma-prolonged fields and check candidate invariants"},
        {"complete", "complete the prolonged set and report the ranks"},
        {"reduce", "transform to adapted coordinates and split the system"},
        {"constants", "verify constants of motion"},
        {"theorem4", "build sigma from structure constants"},
        {"integrate", "integrate the system"},
        {"validate", "run the whole pipeline"},
    };
    for (const auto& [name, text] : help) add_common(app.add_subcommand(name, text), true);
    add_common(app.add_subcommand("corpus", "validate every problem file of a directory"), false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kBadInput;
    }
    CLI::App* sub = app.get_subcommands().front();
    std::string command = sub->get_name();
    if (mode == "strict") opt.mode = Mode::Strict;
    if (mode == "orbital") opt.mode = Mode::Orbital;
    if (!csv_dir.empty()) opt.csv_dir = csv_dir;

    try {
        Report report = command == "corpus" ? run_corpus(file, opt)
                                            : run_command(command, load_problem(file, !no_autonomize), opt);
        std::cout << render_text(report);
        if (!out_path.empty()) {
            std::ofstream os(out_path);
            if (!os) throw InputError("cannot write " + out_path);
            os << report.data.dump(2) << '\n';
        }
        return report.pass ? 0 : kFail;
    } catch (const InputError& e) {
        std::cerr << "sigma-reduce: " << file << ": " << e.what() << '\n';
        return kBadInput;
    } catch (const Error& e) {
        std::cerr << "sigma-reduce: " << e.what() << '\n';
        return kBadInput;
    }
}
