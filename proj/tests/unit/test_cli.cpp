#include <doctest.h>

#include "thermores/experiments.hpp"

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const char* cli_path() {
    const char* cli = std::getenv("THERMORES_CLI");
    REQUIRE_MESSAGE(cli != nullptr, "THERMORES_CLI must point at the cli binary");
    return cli;
}

fs::path scratch_dir(const std::string& leaf) {
    const fs::path dir = fs::temp_directory_path() / "thermores_cli_test" / leaf;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

struct CliResult {
    int code = -1;
    std::string output;
};

CliResult run_cli(const std::string& args) {
    static const fs::path io_dir = scratch_dir("io");
    static int counter = 0;
    const fs::path out = io_dir / ("out_" + std::to_string(counter++) + ".txt");
    const std::string cmd =
        std::string(cli_path()) + " " + args + " > " + out.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    CliResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream f(out);
    r.output.assign(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
    return r;
}

fs::path write_config(const std::string& leaf, const json& j) {
    const fs::path p = scratch_dir("cfg") / leaf;
    fs::create_directories(p.parent_path());
    std::ofstream f(p);
    f << j.dump(2) << '\n';
    return p;
}

json small_pipeline_params() {
    return {{"source_kind", "spike"},
            {"regularizer", "tsvd"},
            {"sources", {{{"x", 24.0}, {"z", 8.0}}}},
            {"scene", {{"nx", 48}, {"nz", 16}, {"pad", 64}}},
            {"record", {{"n_t", 256}, {"t_max", 800.0}, {"snr", 1000.0}}},
            {"kernel", {{"n_tp", 96}, {"tp_max", 48.0}}},
            {"grid", {{"nx", 24}, {"nz", 8}, {"spacing", 2.0}}}};
}

} // namespace

TEST_CASE("cli: list prints every experiment id") {
    const auto r = run_cli("list");
    CHECK(r.code == 0);
    for (const auto& id : thermores::experiments::experiment_ids())
        CHECK(r.output.find(id) != std::string::npos);
}

TEST_CASE("cli: run writes outputs and honors --seed") {
    const fs::path cfg = write_config(
        "entropy.json",
        {{"experiment", "entropy"},
         {"seed", 3},
         {"params", {{"n_cells", 16}, {"n_profiles", 2}, {"t_max", 6}}}});

    const fs::path out1 = scratch_dir("run1");
    const auto r1 = run_cli("run --config " + cfg.string() + " --out " + out1.string());
    CHECK(r1.code == 0);
    CHECK(r1.output.find("entropy") != std::string::npos);
    CHECK(fs::exists(out1 / "manifest.json"));
    CHECK(fs::exists(out1 / "report.json"));

    // same config, same seed: byte-identical manifest checksums
    const fs::path out2 = scratch_dir("run2");
    const auto r2 = run_cli("run --config " + cfg.string() + " --out " + out2.string());
    CHECK(r2.code == 0);
    std::ifstream m1(out1 / "manifest.json"), m2(out2 / "manifest.json");
    const json j1 = json::parse(m1), j2 = json::parse(m2);
    CHECK(j1.at("files") == j2.at("files"));

    // --seed overrides the config seed and changes the random content
    const fs::path out3 = scratch_dir("run3");
    const auto r3 =
        run_cli("run --config " + cfg.string() + " --out " + out3.string() + " --seed 9");
    CHECK(r3.code == 0);
    std::ifstream m3(out3 / "manifest.json");
    const json j3 = json::parse(m3);
    CHECK(j3.at("seed") == 9);
    CHECK(j3.at("files") != j1.at("files"));

    // --jobs changes nothing about the bytes
    const fs::path out4 = scratch_dir("run4");
    const auto r4 =
        run_cli("run --config " + cfg.string() + " --out " + out4.string() + " --jobs 4");
    CHECK(r4.code == 0);
    std::ifstream m4(out4 / "manifest.json");
    CHECK(json::parse(m4).at("files") == j1.at("files"));
}

TEST_CASE("cli: config problems exit 2 and write nothing") {
    const fs::path out = scratch_dir("never");
    fs::remove_all(out);

    const fs::path unknown_id = write_config(
        "unknown_id.json", {{"experiment", "warp-drive"}});
    auto r = run_cli("run --config " + unknown_id.string() + " --out " + out.string());
    CHECK(r.code == 2);
    CHECK(r.output.find("error:") != std::string::npos);
    CHECK(r.output.find("experiment") != std::string::npos);
    CHECK_FALSE(fs::exists(out));

    const fs::path unknown_field = write_config(
        "unknown_field.json",
        {{"experiment", "entropy"}, {"params", {{"cells", 16}}}});
    r = run_cli("run --config " + unknown_field.string() + " --out " + out.string());
    CHECK(r.code == 2);
    CHECK(r.output.find("params.cells") != std::string::npos);
    CHECK_FALSE(fs::exists(out));

    r = run_cli("run --config /definitely/not/here.json --out " + out.string());
    CHECK(r.code == 2);
    CHECK_FALSE(fs::exists(out));

    // missing required option is a usage error, also exit 2
    r = run_cli("run --out " + out.string());
    CHECK(r.code == 2);

    r = run_cli("frobnicate");
    CHECK(r.code == 2);
}

TEST_CASE("cli: compare reports and maps runtime errors to exit 1") {
    using thermores::experiments::ExperimentConfig;
    using thermores::experiments::run_experiment;

    ExperimentConfig a;
    a.experiment = "phantom-pipeline";
    a.seed = 2;
    a.params = small_pipeline_params();
    const fs::path dir_a = scratch_dir("cmp_a");
    run_experiment(a, dir_a);

    auto b = a;
    b.params["regularizer"] = "admm";
    b.params["admm"] = {{"lambda_frac", 0.003}, {"max_iters", 600}};
    const fs::path dir_b = scratch_dir("cmp_b");
    run_experiment(b, dir_b);

    const auto ok = run_cli("compare --a " + dir_a.string() + " --b " + dir_b.string());
    CHECK(ok.code == 0);
    CHECK(ok.output.find("regularizers: a=tsvd b=admm") != std::string::npos);
    CHECK(ok.output.find("same record: yes") != std::string::npos);

    // grid mismatch is a runtime failure, not a config problem
    auto c = a;
    c.params["grid"] = {{"nx", 12}, {"nz", 8}, {"spacing", 2.0}};
    const fs::path dir_c = scratch_dir("cmp_c");
    run_experiment(c, dir_c);
    const auto bad = run_cli("compare --a " + dir_a.string() + " --b " + dir_c.string());
    CHECK(bad.code == 1);
    CHECK(bad.output.find("error:") != std::string::npos);

    // missing inputs are reported as config problems
    const auto missing =
        run_cli("compare --a " + dir_a.string() + " --b " + scratch_dir("hollow").string());
    CHECK(missing.code == 2);
}

TEST_CASE("cli: version flag") {
    const auto r = run_cli("--version");
    CHECK(r.code == 0);
    CHECK_FALSE(r.output.empty());
}
