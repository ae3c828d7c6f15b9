#pragma once

// Orchestration behind the command-line front end: a validated RunConfig is
// executed into a result document, which is then rendered as Markdown, CSV
// or the document itself.

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "choose4/document.hpp"

namespace choose4 {

std::string_view engine_version() noexcept;

// 16 hex digits of FNV-1a over the compact dump of `doc`. nlohmann orders
// object keys, so equal documents hash equally regardless of input order.
std::string fingerprint(const nlohmann::json& doc);

struct RunOptions {
  std::ostream* raw_rows = nullptr;  // simulate: per replicate-stage TSV
};

// Result document: {"schema", "provenance": {...}, "result": {...}}.
nlohmann::json execute(const RunConfig& config, const RunOptions& options = {});

std::string render(const nlohmann::json& result_doc, OutputFormat format);

inline std::string run(const RunConfig& config, const RunOptions& options = {}) {
  return render(execute(config, options), config.format);
}

// Fixed-decimal display string ("0.157"); full precision uses "%.17g".
std::string fixed(double x, int decimals);
std::string full_precision(double x);

struct BundledConfig {
  std::string name;   // file stem, e.g. "strategy1-fleming"
  std::string title;
  nlohmann::json document;
};

// The case-study strategies (3A only; 3B differs just in alpha) plus one
// non-proportional-hazards simulation scenario.
const std::vector<BundledConfig>& bundled_configs();
const BundledConfig& bundled_config(std::string_view name);

}  // namespace choose4
