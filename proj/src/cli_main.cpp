#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "oblique/scenario.hpp"

namespace oblique {

namespace {

par::Execution exec_mode(bool parallel) {
    return parallel ? par::Execution::openmp : par::Execution::serial;
}

int do_run(const std::string& config, bool parallel) {
    const RunReport report = run_config(config, exec_mode(parallel), &std::cout);
    int failed = 0;
    for (const auto& o : report.outcomes)
        if (!o.passed) ++failed;
    if (failed > 0) {
        std::cout << failed << " of " << report.outcomes.size() << " scenarios failed\n";
        return 1;
    }
    std::cout << "all " << report.outcomes.size() << " scenarios passed\n";
    return 0;
}

int do_verify(const std::string& family_kind, std::uint64_t seed, int points,
              const std::string& out_path, bool parallel) {
    const auto family = make_default_family(family_kind);
    const VerifySummary s = verify_family_identities(*family, points, seed, 1e-10, 1e-6, 1e-4,
                                                     exec_mode(parallel));
    std::cout << "family            " << s.family << "\n"
              << "points            " << s.points << " (seed " << s.seed << ")\n"
              << "worst analytic    " << s.worst_analytic << " (tol " << s.tolerance_analytic
              << ")\n"
              << "worst fd          " << s.worst_fd << " (tol " << s.tolerance_fd << ")\n"
              << (s.passed ? "verified\n" : "FAILED\n");
    if (!out_path.empty()) {
        nlohmann::json j{{"family", s.family},     {"points", s.points},
                         {"seed", s.seed},         {"worst_analytic", s.worst_analytic},
                         {"worst_fd", s.worst_fd}, {"passed", s.passed}};
        std::ofstream out(out_path);
        if (!out) throw IoError("cannot open output file " + out_path);
        out << j.dump(2) << "\n";
    }
    return s.passed ? 0 : 1;
}

}  // namespace

int cli_main(int argc, char** argv) {
    CLI::App app{"quantum dynamics in moving non-orthogonal basis frames"};
    app.require_subcommand(1);

    std::string config_path;
    std::string family_kind;
    std::string out_path;
    std::uint64_t seed = 42;
    int points = 20;
    int halvings = 0;
    bool parallel = false;
    app.add_flag("--parallel", parallel, "run independent work items with OpenMP");

    auto* run = app.add_subcommand("run", "execute every scenario in a config file");
    run->add_option("config", config_path, "JSON config file")->required();

    auto* verify = app.add_subcommand("verify", "run the connection identity suite");
    verify->add_option("family", family_kind, "family kind, e.g. rotating2d")->required();
    verify->add_option("--seed", seed, "PRNG seed for the sampled points");
    verify->add_option("--points", points, "number of sampled parameter points");
    verify->add_option("--out", out_path, "optional JSON report path");

    auto* sweep = app.add_subcommand("sweep", "run dt_sweep scenarios from a config file");
    sweep->add_option("config", config_path, "JSON config file")->required();
    sweep->add_option("--halvings", halvings, "override the number of dt halvings");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (run->parsed()) return do_run(config_path, parallel);
        if (verify->parsed()) return do_verify(family_kind, seed, points, out_path, parallel);
        if (sweep->parsed()) {
            if (halvings > 0) {
                // Rewrite the halvings count, then run the config as usual.
                std::ifstream in(config_path);
                if (!in) throw ConfigParseError("cannot open config file " + config_path);
                nlohmann::json root = nlohmann::json::parse(in, nullptr, true);
                if (root.contains("scenarios"))
                    for (auto& sc : root.at("scenarios"))
                        if (sc.value("task", "") == "dt_sweep") sc["halvings"] = halvings;
                const std::string tmp = config_path + ".sweep.tmp.json";
                std::ofstream out(tmp);
                out << root.dump(2);
                out.close();
                const int rc = do_run(tmp, parallel);
                std::remove(tmp.c_str());
                return rc;
            }
            return do_run(config_path, parallel);
        }
    } catch (const ConfigParseError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace oblique
