#include "report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "archive.hpp"

#ifndef GIBBSLAB_VERSION
#define GIBBSLAB_VERSION "unknown"
#endif

namespace gibbslab::tools {

namespace {

std::string cell(const json& v) {
  if (v.is_null()) return "";
  if (v.is_number_float()) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
    return buf;
  }
  if (v.is_string()) {
    std::string s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  }
  return v.dump();
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

}  // namespace

const char* tool_version() { return GIBBSLAB_VERSION; }

bool Report::pass() const {
  return std::all_of(criteria.begin(), criteria.end(), [](const Criterion& c) { return c.pass; });
}

std::string to_csv(const Table& t) {
  std::string s;
  for (std::size_t i = 0; i < t.columns.size(); ++i) s += (i ? "," : "") + cell(t.columns[i]);
  s += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) s += (i ? "," : "") + cell(row[i]);
    s += "\n";
  }
  return s;
}

json report_json(const ExperimentConfig& cfg, const Report& r) {
  json crit = json::array();
  for (const auto& c : r.criteria) crit.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  json j = {{"tool", "gibbslab"},
            {"version", tool_version()},
            {"kind", cfg.kind},
            {"name", cfg.name},
            {"seed", cfg.seed},
            {"config", cfg.raw},
            {"results", r.results},
            {"criteria", crit},
            {"warnings", r.warnings},
            {"pass", r.pass()},
            {"table", "table.csv"}};
  if (r.ensemble) j["archive"] = "ensemble.glb";
  return j;
}

void write_report(const ExperimentConfig& cfg, const Report& r) {
  std::filesystem::create_directories(cfg.output);
  write_file(cfg.output / "report.json", report_json(cfg, r).dump(2) + "\n");
  write_file(cfg.output / "table.csv", to_csv(r.table));
  if (r.ensemble) {
    json meta = {{"tool", "gibbslab"}, {"version", tool_version()}, {"experiment", cfg.name}, {"config", cfg.raw}};
    write_archive(cfg.output / "ensemble.glb", *r.ensemble, meta);
  }
}

DirectorySummary summarize_reports(const std::filesystem::path& dir) {
  DirectorySummary s;
  s.table.columns = {"path", "name", "kind", "pass", "criteria", "failed_criteria"};
  std::vector<std::filesystem::path> found;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().filename() == "report.json") found.push_back(e.path());
  std::sort(found.begin(), found.end());
  for (const auto& p : found) {
    std::ifstream in(p);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error&) {
      s.table.add({std::filesystem::relative(p.parent_path(), dir).string(), "", "", false, 0, "unreadable report"});
      ++s.reports;
      ++s.failed;
      continue;
    }
    std::string failed;
    std::size_t n = 0;
    for (const auto& c : j.value("criteria", json::array())) {
      ++n;
      if (!c.value("pass", false)) failed += (failed.empty() ? "" : ";") + c.value("name", std::string("?"));
    }
    bool pass = j.value("pass", false);
    s.table.add({std::filesystem::relative(p.parent_path(), dir).string(), j.value("name", ""), j.value("kind", ""),
                 pass, n, failed});
    ++s.reports;
    if (!pass) ++s.failed;
  }
  return s;
}

}  // namespace gibbslab::tools
