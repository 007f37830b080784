#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "archive.hpp"
#include "config.hpp"
#include "experiments.hpp"
#include "gibbslab/flow.hpp"
#include "report.hpp"

namespace fs = std::filesystem;
using namespace gibbslab::tools;

namespace {

enum Exit { ok = 0, failed = 1, bad_input = 2, numerical = 3 };

int cmd_run(const fs::path& path, const std::string& output, bool quiet) {
  ExperimentConfig cfg = load_config(path);
  if (!output.empty()) cfg.output = output;
  Report r = run_experiment(cfg);
  write_report(cfg, r);
  if (!quiet) {
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
    for (const auto& c : r.criteria)
      std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << (c.detail.empty() ? "" : "  (" + c.detail + ")") << "\n";
    std::cout << cfg.name << ": " << (r.pass() ? "pass" : "FAIL") << " -> " << cfg.output.string() << "\n";
  }
  return r.pass() ? ok : failed;
}

int cmd_inspect(const fs::path& path, bool full) {
  ArchiveInfo info;
  gibbslab::SampleEnsemble e = read_archive(path, &info);
  json h = info.header;
  if (!full) h.erase("metadata");
  h["payload_bytes"] = info.payload_bytes;
  char crc[16];
  std::snprintf(crc, sizeof crc, "%08x", info.checksum);
  h["crc32"] = crc;
  if (e.size() > 0) {
    double m = 0;
    for (const auto& f : e.fields) m += f.norm_sq();
    h["mean_mass"] = m / double(e.size());
  }
  std::cout << h.dump(2) << "\n";
  return ok;
}

int cmd_report(const fs::path& dir, bool as_json) {
  if (!fs::is_directory(dir)) throw std::invalid_argument(dir.string() + " is not a directory");
  DirectorySummary s = summarize_reports(dir);
  if (as_json) {
    json rows = json::array();
    for (const auto& row : s.table.rows) {
      json o;
      for (std::size_t i = 0; i < s.table.columns.size(); ++i) o[s.table.columns[i]] = row[i];
      rows.push_back(o);
    }
    std::cout << json{{"reports", s.reports}, {"failed", s.failed}, {"runs", rows}}.dump(2) << "\n";
  } else {
    std::cout << to_csv(s.table);
    std::cerr << s.reports << " reports, " << s.failed << " failed\n";
  }
  return s.failed == 0 ? ok : failed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gibbs measure experiments: sampling, flows, concentration and transport checks"};
  app.set_version_flag("--version", std::string(tool_version()));
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("-j,--threads", threads, "Worker threads (overrides GIBBSLAB_THREADS)")->check(CLI::PositiveNumber);

  std::string config, archive, dir, output;
  bool quiet = false, full = false, as_json = false;
  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("config", config, "Experiment config (JSON)")->required();
  run->add_option("-o,--output", output, "Write results here instead of the configured directory");
  run->add_flag("-q,--quiet", quiet, "Only set the exit status");
  auto* inspect = app.add_subcommand("inspect", "Verify an ensemble archive and print its header");
  inspect->add_option("archive", archive, "Archive file")->required();
  inspect->add_flag("--metadata", full, "Include the stored metadata");
  auto* report = app.add_subcommand("report", "Summarise every report.json below a directory");
  report->add_option("dir", dir, "Directory to scan")->required();
  report->add_flag("--json", as_json, "Print JSON instead of CSV");

  CLI11_PARSE(app, argc, argv);
  if (threads > 0) setenv("GIBBSLAB_THREADS", std::to_string(threads).c_str(), 1);

  try {
    if (*run) return cmd_run(config, output, quiet);
    if (*inspect) return cmd_inspect(archive, full);
    return cmd_report(dir, as_json);
  } catch (const SchemaError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return bad_input;
  } catch (const ArchiveError& e) {
    std::cerr << "archive error: " << e.what() << "\n";
    return bad_input;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return bad_input;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "file error: " << e.what() << "\n";
    return bad_input;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return numerical;
  } catch (const gibbslab::FlowError& e) {
    std::cerr << "flow failure: " << e.what() << "\n";
    return numerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return numerical;
  }
}
