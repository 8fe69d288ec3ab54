#include <iostream>

#include "CLI11.hpp"
#include "adiaframe/config.hpp"
#include "adiaframe/csv.hpp"
#include "adiaframe/runner.hpp"

using namespace adiaframe;

int main(int argc, char** argv) {
  CLI::App app{"Adiabatic-frame measurement simulator"};
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  bool strict = false;
  bool quiet = false;
  app.add_option("--config", config_path, "Scenario config (JSON)")->required();
  app.add_option("--out", out_dir, "Output directory (overrides the config)");
  app.add_option("--seed", seed, "RNG seed (overrides the config)");
  app.add_flag("--strict", strict, "Reject unknown config keys");
  app.add_flag("--quiet", quiet, "Print nothing on success");
  CLI11_PARSE(app, argc, argv);

  try {
    ParsedConfig parsed = parse_config(read_text_file(config_path), strict);
    if (!quiet)
      for (const auto& w : parsed.warnings) std::cerr << "warning: " << w << "\n";
    ScenarioConfig cfg = parsed.config;
    if (!out_dir.empty()) cfg.output.directory = out_dir;
    if (seed) cfg.seed = *seed;
    validate_config(cfg);

    const RunReport report = run(cfg, {true, quiet, parsed.warnings});
    if (!quiet) {
      for (const auto& c : report.checks)
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << " measured=" << c.measured
                  << " threshold=" << c.threshold << "\n";
      std::cout << "hash " << report.config_hash << "\n";
    }
    return report.all_passed() ? 0 : 1;
  } catch (const Error& e) {
    std::cerr << error_record(e.kind(), e.what()).dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << error_record("internal", e.what()).dump() << "\n";
    return 2;
  }
}
