#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gibbslab/flow.hpp"
#include "gibbslab/gibbs.hpp"
#include "gibbslab/hamiltonians.hpp"

namespace gibbslab::tools {

using json = nlohmann::json;

struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Experiment kinds accepted by `run`.
const std::vector<std::string>& experiment_kinds();

// Checks the whole document against the schema of its kind; throws
// SchemaError listing every violation (unknown keys, wrong types, bad choices).
void validate_config(const json& doc);

// Read-only view of one validated block with typed defaults.
class Block {
 public:
  Block() = default;
  Block(const json* j, std::string path) : j_(j), path_(std::move(path)) {}

  bool has(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  int integer(const std::string& key, int fallback) const;
  std::uint64_t seed(const std::string& key, std::uint64_t fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  std::string text(const std::string& key, const std::string& fallback) const;
  std::vector<int> integers(const std::string& key, std::vector<int> fallback) const;
  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) const;
  Block block(const std::string& key) const;

 private:
  const json* j_ = nullptr;
  std::string path_;
};

struct ExperimentConfig {
  json raw;
  std::string kind;
  std::string name;
  std::uint64_t seed = 1;
  std::filesystem::path output;

  Block root() const { return Block(&raw, ""); }
  Block block(const std::string& key) const { return root().block(key); }
};

// Parses and validates; relative output paths resolve against the config's directory.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const json& doc, const std::filesystem::path& base = ".");

// Builders for the shared blocks.
Lattice make_lattice(const Block& b, int default_dim);
// lambda_fraction is resolved against the mass radius N.
ModelSpec make_model(const Block& b, const Lattice& lat, double N = 1.0);
PhaseDomain make_domain(const Block& b);
GaussianReference make_reference(const Block& b, const ModelSpec& model, const Lattice& lat);
ChainConfig make_chain(const Block& b, std::uint64_t seed);
FlowConfig make_flow(const Block& b);

}  // namespace gibbslab::tools
