// choose4 <command> --config <path> [--seed N] [--out <path>] [--format markdown|csv|doc]
//
// Exit status: 0 success, 2 configuration error, 3 numerical error,
// 4 infeasible design. Failures print a JSON error block on stderr.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "choose4/error.hpp"
#include "choose4/report.hpp"

namespace fs = std::filesystem;
using namespace choose4;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitInfeasible = 4;

int exit_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::Infeasible: return kExitInfeasible;
    case ErrorCode::CholeskyFailure:
    case ErrorCode::MonotoneLikelihood:
    case ErrorCode::LimitExceeded: return kExitNumerical;
    default: return kExitConfig;
  }
}

int report_error(std::string_view code, const std::string& message, int status) {
  nlohmann::json block{{"error", {{"code", std::string(code)}, {"message", message}, {"exit_status", status}}}};
  std::cerr << block.dump(2) << "\n";
  return status;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(ErrorCode::ConfigError, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path output_dir() {
  const char* env = std::getenv("CHOOSE4_OUTPUT_DIR");
  return env && *env ? fs::path(env) : fs::path();
}

std::string extension(OutputFormat f) {
  switch (f) {
    case OutputFormat::Markdown: return ".md";
    case OutputFormat::Csv: return ".csv";
    case OutputFormat::Doc: return ".json";
  }
  return "";
}

void write_file(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out || !(out << text)) fail(ErrorCode::ConfigError, "cannot write " + p.string());
}

struct RunArgs {
  std::string config;
  std::string bundled;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format;
};

int run_command(Command command, const RunArgs& a) {
  nlohmann::json doc;
  std::string stem;
  if (!a.bundled.empty()) {
    doc = bundled_config(a.bundled).document;
    stem = a.bundled;
  } else {
    doc = nlohmann::json::parse(read_file(a.config), nullptr, false);
    if (doc.is_discarded()) fail(ErrorCode::ConfigError, a.config + ": malformed document");
    stem = fs::path(a.config).stem().string();
  }
  RunConfig cfg = parse_config(doc);
  if (cfg.command != command) {
    fail(ErrorCode::ConfigError, "command: config is for '" + std::string(to_string(cfg.command)) +
                                     "' but '" + std::string(to_string(command)) + "' was requested");
  }
  if (a.seed) cfg.seed = a.seed;
  if (!a.format.empty()) cfg.format = *format_from_name(a.format);

  const fs::path dir = output_dir();
  std::ofstream raw;
  RunOptions opt;
  if (cfg.simulate && cfg.simulate->raw_output) {
    fs::path p = *cfg.simulate->raw_output;
    if (p.is_relative() && !dir.empty()) p = dir / p;
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    raw.open(p, std::ios::binary);
    if (!raw) fail(ErrorCode::ConfigError, "simulate.raw_output: cannot write " + p.string());
    opt.raw_rows = &raw;
  }

  const std::string text = run(cfg, opt);
  fs::path out = a.out;
  if (out.empty() && !dir.empty()) out = stem + extension(cfg.format);
  if (out.empty()) {
    std::cout << text;
  } else {
    if (out.is_relative() && !dir.empty()) out = dir / out;
    write_file(out, text);
  }
  return 0;
}

int bundled_command(bool list, const std::string& write_dir) {
  if (!write_dir.empty()) {
    for (const auto& b : bundled_configs()) {
      write_file(fs::path(write_dir) / (b.name + ".json"), b.document.dump(2) + "\n");
    }
  }
  if (list || write_dir.empty()) {
    for (const auto& b : bundled_configs()) {
      std::cout << b.name << "\t" << b.document.at("command").get<std::string>() << "\t" << b.title << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"choose4: safety-monitoring designs by choosing 4 of 6 parameters"};
  app.set_version_flag("--version", std::string(engine_version()));
  app.require_subcommand(1);

  RunArgs args;
  std::optional<Command> chosen;
  for (auto c : {Command::Solve, Command::Plan, Command::Ocs, Command::Simulate, Command::Figure1}) {
    auto* sub = app.add_subcommand(std::string(to_string(c)), "run a '" + std::string(to_string(c)) + "' config");
    auto* cfg = sub->add_option("--config", args.config, "configuration document (JSON)");
    auto* bun = sub->add_option("--bundled", args.bundled, "name of a bundled configuration");
    cfg->excludes(bun);
    sub->add_option("--seed", args.seed, "override the configured seed");
    sub->add_option("--out", args.out, "output path (default: stdout, or $CHOOSE4_OUTPUT_DIR)");
    sub->add_option("--format", args.format, "markdown | csv | doc")
        ->check(CLI::IsMember({"markdown", "csv", "doc"}));
    sub->callback([&chosen, c] { chosen = c; });
  }
  bool list = false;
  std::string write_dir;
  auto* bundled = app.add_subcommand("bundled", "list or write the bundled configurations");
  bundled->add_flag("--list", list, "list names");
  bundled->add_option("--write", write_dir, "write each config as <dir>/<name>.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("UsageError", e.what(), kExitConfig);
  }

  try {
    if (bundled->parsed()) return bundled_command(list, write_dir);
    if (args.config.empty() && args.bundled.empty()) {
      return report_error("ConfigError", "--config or --bundled is required", kExitConfig);
    }
    return run_command(*chosen, args);
  } catch (const Error& e) {
    return report_error(to_string(e.code()), e.what(), exit_status(e.code()));
  } catch (const std::exception& e) {
    return report_error("InternalError", e.what(), kExitNumerical);
  }
}
