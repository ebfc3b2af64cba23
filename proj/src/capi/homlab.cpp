#include "homlab/homlab.h"

#include <new>
#include <string>
#include <vector>

#include "error.hpp"
#include "experiments.hpp"
#include "field_io.hpp"

using namespace homlab;

struct hl_config {
    ConfigBuilder builder;
    mutable std::vector<std::string> problems;
    mutable std::string echo;
};

struct hl_result {
    RunResult run;
    std::string summary;
    std::vector<std::string> csv;
    std::vector<std::string> fits;
};

struct hl_field {
    FieldFile file;
};

namespace {

thread_local std::string last_error;

hl_status status_of(ErrorKind k) {
    switch (k) {
        case ErrorKind::InvalidArgument: return HL_ERR_INVALID_ARGUMENT;
        case ErrorKind::Config: return HL_ERR_CONFIG;
        case ErrorKind::Solver: return HL_ERR_SOLVER;
        case ErrorKind::Io: return HL_ERR_IO;
    }
    return HL_ERR_INTERNAL;
}

template <class F>
hl_status guarded(F&& f) {
    last_error.clear();
    try {
        f();
        return HL_OK;
    } catch (const Error& e) {
        last_error = e.what();
        return status_of(e.kind());
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return HL_ERR_INTERNAL;
    } catch (const std::exception& e) {
        last_error = e.what();
        return HL_ERR_INTERNAL;
    } catch (...) {
        last_error = "unknown failure";
        return HL_ERR_INTERNAL;
    }
}

hl_status null_arg(const char* what) {
    last_error = std::string("null argument: ") + what;
    return HL_ERR_INVALID_ARGUMENT;
}

}  // namespace

extern "C" {

const char* hl_version(void) {
    static const std::string v = version_string();
    return v.c_str();
}

const char* hl_last_error(void) { return last_error.c_str(); }

const char* hl_status_name(hl_status s) {
    switch (s) {
        case HL_OK: return "ok";
        case HL_ERR_INVALID_ARGUMENT: return "invalid argument";
        case HL_ERR_CONFIG: return "config error";
        case HL_ERR_SOLVER: return "solver failure";
        case HL_ERR_IO: return "i/o error";
        case HL_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

hl_status hl_config_create(hl_config** out) {
    if (!out) return null_arg("out");
    return guarded([&] { *out = new hl_config(); });
}

void hl_config_destroy(hl_config* cfg) { delete cfg; }

hl_status hl_config_set(hl_config* cfg, const char* key, const char* value) {
    if (!cfg || !key || !value) return null_arg("cfg, key or value");
    return guarded([&] { cfg->builder.set(key, value); });
}

hl_status hl_config_load_file(hl_config* cfg, const char* path) {
    if (!cfg || !path) return null_arg("cfg or path");
    return guarded([&] { cfg->builder.load_file(path); });
}

hl_status hl_config_load_text(hl_config* cfg, const char* text) {
    if (!cfg || !text) return null_arg("cfg or text");
    return guarded([&] { cfg->builder.load_text(text); });
}

hl_status hl_config_problem_count(const hl_config* cfg, size_t* count) {
    if (!cfg || !count) return null_arg("cfg or count");
    return guarded([&] {
        cfg->problems = cfg->builder.problems();
        *count = cfg->problems.size();
    });
}

const char* hl_config_problem(const hl_config* cfg, size_t index) {
    if (!cfg) return nullptr;
    if (cfg->problems.empty()) cfg->problems = cfg->builder.problems();
    return index < cfg->problems.size() ? cfg->problems[index].c_str() : nullptr;
}

const char* hl_config_echo(const hl_config* cfg) {
    if (!cfg) return nullptr;
    cfg->echo.clear();
    for (const auto& [k, v] : cfg->builder.current().echo()) cfg->echo += k + " = " + v + "\n";
    return cfg->echo.c_str();
}

int hl_command_known(const char* command) { return command && known_command(command) ? 1 : 0; }

hl_status hl_run(const char* command, const hl_config* cfg, hl_result** out) {
    if (!command || !cfg || !out) return null_arg("command, cfg or out");
    *out = nullptr;
    return guarded([&] {
        if (!known_command(command)) fail(ErrorKind::Config, std::string("unknown command: ") + command);
        const ExperimentConfig c = cfg->builder.build();
        auto* r = new hl_result();
        try {
            r->run = run_command(command, c);
            r->summary = r->run.summary.dump(2);
            for (const auto& t : r->run.tables) r->csv.push_back(render_csv(t));
            for (const auto& f : r->run.fits) r->fits.push_back(fit_json(f).dump());
        } catch (...) {
            delete r;
            throw;
        }
        *out = r;
    });
}

void hl_result_destroy(hl_result* res) { delete res; }

hl_status hl_result_emit(const hl_result* res, const hl_config* cfg, size_t* files_written) {
    if (!res || !cfg) return null_arg("res or cfg");
    return guarded([&] {
        const auto paths = emit(res->run, cfg->builder.build());
        if (files_written) *files_written = paths.size();
    });
}

const char* hl_result_summary(const hl_result* res) { return res ? res->summary.c_str() : nullptr; }

size_t hl_result_table_count(const hl_result* res) { return res ? res->run.tables.size() : 0; }

const char* hl_result_table_name(const hl_result* res, size_t index) {
    return res && index < res->run.tables.size() ? res->run.tables[index].name.c_str() : nullptr;
}

const char* hl_result_table_csv(const hl_result* res, size_t index) {
    return res && index < res->csv.size() ? res->csv[index].c_str() : nullptr;
}

size_t hl_result_fit_count(const hl_result* res) { return res ? res->fits.size() : 0; }

const char* hl_result_fit_json(const hl_result* res, size_t index) {
    return res && index < res->fits.size() ? res->fits[index].c_str() : nullptr;
}

hl_status hl_field_read(const char* path, hl_field** out) {
    if (!path || !out) return null_arg("path or out");
    *out = nullptr;
    return guarded([&] {
        auto* f = new hl_field();
        try {
            f->file = read_field_file(path);
        } catch (...) {
            delete f;
            throw;
        }
        *out = f;
    });
}

void hl_field_destroy(hl_field* f) { delete f; }

hl_status hl_field_shape(const hl_field* f, int* n, int* components, size_t* frames) {
    if (!f) return null_arg("f");
    if (n) *n = f->file.n;
    if (components) *components = f->file.components;
    if (frames) *frames = f->file.times.size();
    return HL_OK;
}

const double* hl_field_values(const hl_field* f, size_t* count) {
    if (!f) return nullptr;
    if (count) *count = f->file.values.size();
    return f->file.values.data();
}

const double* hl_field_times(const hl_field* f, size_t* count) {
    if (!f) return nullptr;
    if (count) *count = f->file.times.size();
    return f->file.times.data();
}

hl_status hl_homogenised_matrix(const char* coefficient, double base, double amplitude, double skew, int cell_n,
                                double abar[4]) {
    if (!coefficient || !abar) return null_arg("coefficient or abar");
    return guarded([&] {
        ConfigBuilder b;
        b.set("coefficient", coefficient);
        ExperimentConfig c = b.current();
        c.base = base;
        c.amplitude = amplitude;
        c.skew = skew;
        require(cell_n >= 4, "cell resolution must be at least 4");
        const CorrectorPack p = solve_corrector(c.coefficient_spec(), cell_n);
        abar[0] = p.abar.a11;
        abar[1] = p.abar.a12;
        abar[2] = p.abar.a21;
        abar[3] = p.abar.a22;
    });
}

}  // extern "C"
