// Exercises the shared library through its C header only.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>

#include "homlab/homlab.h"

namespace fs = std::filesystem;

TEST_CASE("version and status names") {
    CHECK(std::strlen(hl_version()) > 0);
    CHECK(std::string(hl_status_name(HL_ERR_CONFIG)) == "config error");
}

TEST_CASE("config problems are listed without running anything") {
    hl_config* cfg = nullptr;
    REQUIRE(hl_config_create(&cfg) == HL_OK);
    hl_config_set(cfg, "N-list", "");
    hl_config_set(cfg, "n", "10");
    size_t count = 0;
    REQUIRE(hl_config_problem_count(cfg, &count) == HL_OK);
    CHECK(count == 2);
    CHECK(hl_config_problem(cfg, 0) != nullptr);
    CHECK(hl_config_problem(cfg, count) == nullptr);

    hl_result* res = nullptr;
    CHECK(hl_run("corrector", cfg, &res) == HL_ERR_CONFIG);
    CHECK(res == nullptr);
    CHECK(std::string(hl_last_error()).find("N-list") != std::string::npos);
    hl_config_destroy(cfg);
}

TEST_CASE("null arguments and unknown commands") {
    CHECK(hl_config_create(nullptr) == HL_ERR_INVALID_ARGUMENT);
    hl_config* cfg = nullptr;
    hl_config_create(&cfg);
    hl_result* res = nullptr;
    CHECK(hl_run("frobnicate", cfg, &res) == HL_ERR_CONFIG);
    CHECK(hl_command_known("green") == 1);
    CHECK(hl_command_known("frobnicate") == 0);
    hl_config_destroy(cfg);
}

TEST_CASE("corrector run through the C interface") {
    const fs::path out = fs::temp_directory_path() / "homlab_capi_corrector";
    fs::remove_all(out);
    hl_config* cfg = nullptr;
    hl_config_create(&cfg);
    hl_config_load_text(cfg, "n = 32\nformat = csv,json\n");
    hl_config_set(cfg, "out", out.string().c_str());
    hl_result* res = nullptr;
    REQUIRE(hl_run("corrector", cfg, &res) == HL_OK);
    CHECK(hl_result_table_count(res) == 1);
    CHECK(std::string(hl_result_table_name(res, 0)) == "corrector");
    CHECK(std::string(hl_result_table_csv(res, 0)).rfind("quantity,value\n", 0) == 0);
    CHECK(std::string(hl_result_summary(res)).find("abar") != std::string::npos);
    size_t written = 0;
    REQUIRE(hl_result_emit(res, cfg, &written) == HL_OK);
    CHECK(written >= 5);
    hl_result_destroy(res);

    hl_field* f = nullptr;
    REQUIRE(hl_field_read((out / "chi.hfield").string().c_str(), &f) == HL_OK);
    int n = 0, comps = 0;
    size_t frames = 0, count = 0;
    hl_field_shape(f, &n, &comps, &frames);
    CHECK(n == 32);
    CHECK(comps == 2);
    CHECK(frames == 1);
    CHECK(hl_field_values(f, &count) != nullptr);
    CHECK(count == 2u * 32u * 32u);
    hl_field_destroy(f);
    CHECK(hl_field_read("/nonexistent/field", &f) == HL_ERR_IO);
    hl_config_destroy(cfg);
    fs::remove_all(out);
}

TEST_CASE("homogenised matrix helper") {
    double abar[4];
    REQUIRE(hl_homogenised_matrix("laminate", 2.0, 1.0, 0.0, 64, abar) == HL_OK);
    CHECK(abar[0] == doctest::Approx(std::sqrt(3.0)).epsilon(1e-3));
    CHECK(abar[3] == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(hl_homogenised_matrix("unknown", 2.0, 1.0, 0.0, 64, abar) == HL_ERR_CONFIG);
}
