// Command-line driver. Talks to the library through the C interface only.
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "homlab/homlab.h"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

struct Overrides {
    std::string config;
    std::map<std::string, std::string> flags;  // key -> raw value
    std::vector<std::string> sets;
    bool quiet = false;
};

void add_common(CLI::App* sub, Overrides& o) {
    sub->add_option("--config", o.config, "key = value configuration file");
    for (const char* key : {"n", "N-list", "delta-list", "seeds", "T", "steps", "out", "format"}) {
        const std::string flag = std::string("--") + key;
        sub->add_option_function<std::string>(flag, [&o, key](const std::string& v) { o.flags[key] = v; },
                                              std::string("overrides ") + key);
    }
    sub->add_option("--set", o.sets, "extra key=value settings")->take_all();
    sub->add_flag("-q,--quiet", o.quiet, "print nothing on success");
}

int exit_code(hl_status s) {
    switch (s) {
        case HL_OK: return 0;
        case HL_ERR_CONFIG:
        case HL_ERR_INVALID_ARGUMENT:
        case HL_ERR_IO: return kExitConfig;
        default: return kExitSolver;
    }
}

int run(const std::string& command, const Overrides& o) {
    hl_config* cfg = nullptr;
    if (hl_config_create(&cfg) != HL_OK) {
        std::fprintf(stderr, "error: %s\n", hl_last_error());
        return kExitSolver;
    }
    if (!o.config.empty()) hl_config_load_file(cfg, o.config.c_str());
    for (const auto& [k, v] : o.flags) hl_config_set(cfg, k.c_str(), v.c_str());
    for (const auto& kv : o.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) hl_config_set(cfg, kv.c_str(), "");
        else hl_config_set(cfg, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str());
    }

    size_t problems = 0;
    hl_config_problem_count(cfg, &problems);
    if (problems > 0) {
        std::fprintf(stderr, "configuration has %zu problem%s:\n", problems, problems == 1 ? "" : "s");
        for (size_t i = 0; i < problems; ++i) std::fprintf(stderr, "  %s\n", hl_config_problem(cfg, i));
        hl_config_destroy(cfg);
        return kExitConfig;
    }

    hl_result* res = nullptr;
    hl_status s = hl_run(command.c_str(), cfg, &res);
    if (s != HL_OK) {
        std::fprintf(stderr, "%s: %s\n", hl_status_name(s), hl_last_error());
        hl_config_destroy(cfg);
        return exit_code(s);
    }
    size_t written = 0;
    s = hl_result_emit(res, cfg, &written);
    if (s != HL_OK) {
        std::fprintf(stderr, "%s: %s\n", hl_status_name(s), hl_last_error());
    } else if (!o.quiet) {
        std::printf("%s: wrote %zu files\n", command.c_str(), written);
        for (size_t i = 0; i < hl_result_fit_count(res); ++i) std::printf("fit %s\n", hl_result_fit_json(res, i));
    }
    hl_result_destroy(res);
    hl_config_destroy(cfg);
    return exit_code(s);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"homlab experiments"};
    app.set_version_flag("--version", hl_version());
    app.require_subcommand(1);

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"corrector", "cell problem, homogenised matrix and residuals"},
        {"linear", "linear solution Y and its norms"},
        {"renorm", "renormalisation constants"},
        {"gpam", "one gPAM solve with the ansatz residual"},
        {"commute", "distance between u_eps and u_0 across N and delta"},
        {"flux", "flux identity, G decay and flux distance"},
        {"stochastic", "convergence of the enhanced noise"},
        {"green", "kernel probes and remainder kernels"},
    };
    Overrides o;
    std::string chosen;
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        add_common(sub, o);
        sub->callback([&chosen, n = name] { chosen = n; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }
    return run(chosen, o);
}
