#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "gibbslab/gibbs.hpp"

namespace gibbslab::tools {

struct Criterion {
  std::string name;
  bool pass = true;
  std::string detail;
};

// Plot-ready table; cells are JSON scalars.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;

  void add(std::vector<json> row) { rows.push_back(std::move(row)); }
};

struct Report {
  json results = json::object();
  std::vector<Criterion> criteria;
  std::vector<std::string> warnings;
  Table table;
  std::optional<SampleEnsemble> ensemble;

  void require(const std::string& name, bool ok, const std::string& detail = {}) {
    criteria.push_back({name, ok, detail});
  }
  bool pass() const;
};

const char* tool_version();

// Writes report.json and table.csv (and ensemble.glb when the report carries
// an ensemble) into cfg.output. Output is byte-identical for identical input.
void write_report(const ExperimentConfig& cfg, const Report& r);

json report_json(const ExperimentConfig& cfg, const Report& r);
std::string to_csv(const Table& t);

struct DirectorySummary {
  Table table;
  std::size_t reports = 0;
  std::size_t failed = 0;
};
// Collects every report.json below dir (sorted by path).
DirectorySummary summarize_reports(const std::filesystem::path& dir);

}  // namespace gibbslab::tools
