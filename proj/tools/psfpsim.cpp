#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "psfp/scenario.hpp"
#include "psfp/simulator.hpp"

namespace {

int load_or_report(const std::string& path, uint64_t scale, psfp::LoadResult& result) {
    result = psfp::load_scenario_file(path, scale);
    if (!result.ok()) {
        std::cerr << "validation failed for " << path << ":\n"
                  << psfp::format_issues(result.issues);
        return 1;
    }
    return 0;
}

int cmd_validate(const std::string& path, uint64_t scale) {
    psfp::LoadResult result;
    if (load_or_report(path, scale, result)) return 1;
    const psfp::CompiledScenario& sc = *result.scenario;
    std::cout << "OK: " << path << " (" << sc.sources.size() << " sources, "
              << sc.gates.size() << " gates, " << sc.filter.size()
              << " filter entries, " << sc.meters.size() << " meters)\n";
    return 0;
}

int cmd_compile(const std::string& path, uint64_t scale) {
    psfp::LoadResult result;
    if (load_or_report(path, scale, result)) return 1;
    std::cout << result.scenario->compile_report;
    uint64_t entries = 0;
    for (const psfp::StreamGateConfig& g : result.scenario->gates) {
        entries += g.open_entries.size();
    }
    std::cout << "total gate entries: " << entries << "\n";
    return 0;
}

int cmd_run(const std::string& path, const std::string& out_dir, uint64_t scale,
            std::optional<uint64_t> seed, std::optional<uint64_t> bin) {
    psfp::LoadResult result;
    if (load_or_report(path, scale, result)) return 1;
    psfp::CompiledScenario& sc = *result.scenario;
    if (seed) sc.run.seed = *seed;
    if (bin) {
        if (*bin == 0 || sc.run.duration_ns % *bin != 0) {
            std::cerr << "error: --bin must divide the run duration\n";
            return 1;
        }
        sc.run.bin_ns = *bin;
    }
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        std::cerr << "error: cannot create " << out_dir << ": " << ec.message() << "\n";
        return 1;
    }
    try {
        psfp::Simulator sim(sc);
        psfp::MetricsLog metrics = sim.run();
        std::vector<std::string> files = metrics.write_csv(out_dir);
        std::ofstream summary(out_dir + "/summary.json", std::ios::trunc);
        summary << metrics.summary_json(sc.name);
        files.push_back("summary.json");
        std::cout << "wrote " << out_dir << "/{";
        for (size_t i = 0; i < files.size(); ++i) {
            std::cout << files[i] << (i + 1 < files.size() ? "," : "");
        }
        std::cout << "}\n";
        std::cout << "ingested " << metrics.bridge.ingested << ", forwarded "
                  << metrics.bridge.forwarded << ", best-effort "
                  << metrics.bridge.best_effort << ", dropped "
                  << metrics.bridge.dropped_total() << ", latency samples "
                  << metrics.latency().size() << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_report(const std::string& dir) {
    std::ifstream f(dir + "/summary.json");
    if (!f) {
        std::cerr << "error: no summary.json in " << dir << "\n";
        return 1;
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::cout << "scenario: " << j.value("scenario", std::string("?")) << "\n"
              << "duration: " << j.value("duration_ns", 0ull) << " ns, bin "
              << j.value("bin_ns", 0ull) << " ns\n";
    const auto& b = j.at("bridge");
    std::cout << "frames: ingested " << b.value("ingested", 0ull) << ", forwarded "
              << b.value("forwarded", 0ull) << ", best-effort "
              << b.value("best_effort", 0ull) << ", conserved "
              << (b.value("conserved", false) ? "yes" : "NO") << "\n";
    std::cout << "drops:";
    for (auto it = j.at("drops").begin(); it != j.at("drops").end(); ++it) {
        uint64_t frames = it.value().value("frames", 0ull);
        if (frames) std::cout << " " << it.key() << "=" << frames;
    }
    std::cout << "\ncolors:";
    for (auto it = j.at("colors").begin(); it != j.at("colors").end(); ++it) {
        std::cout << " " << it.key() << "=" << it.value().value("bytes", 0ull) << "B";
    }
    std::cout << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"PSFP bridge simulator"};
    app.require_subcommand(1);

    std::string path;
    std::string out_dir = "out";
    uint64_t scale = psfp::kDefaultRateScale;
    std::optional<uint64_t> seed;
    std::optional<uint64_t> bin;

    CLI::App* validate = app.add_subcommand("validate", "statically check a scenario file");
    validate->add_option("scenario", path, "scenario JSON file")->required();
    validate->add_option("--scale", scale, "rate divisor applied to all bit rates");

    CLI::App* compile = app.add_subcommand("compile", "print the schedule compilation report");
    compile->add_option("scenario", path, "scenario JSON file")->required();
    compile->add_option("--scale", scale, "rate divisor applied to all bit rates");

    CLI::App* run = app.add_subcommand("run", "run a scenario and write metrics");
    run->add_option("scenario", path, "scenario JSON file")->required();
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--scale", scale, "rate divisor applied to all bit rates");
    run->add_option("--seed", seed, "override the scenario RNG seed");
    run->add_option("--bin", bin, "override the metrics bin width (ns)");

    CLI::App* report = app.add_subcommand("report", "summarize an existing output directory");
    report->add_option("dir", out_dir, "output directory of a previous run")->required();

    CLI11_PARSE(app, argc, argv);

    if (validate->parsed()) return cmd_validate(path, scale);
    if (compile->parsed()) return cmd_compile(path, scale);
    if (run->parsed()) return cmd_run(path, out_dir, scale, seed, bin);
    if (report->parsed()) return cmd_report(out_dir);
    return 1;
}
