#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "gibbslab/gibbs.hpp"

namespace gibbslab::tools {

// Layout (all integers little endian):
//   8 bytes   magic "GLBENSM\0"
//   u32       format version
//   u64       header length L
//   L bytes   JSON header (lattices, metadata, sample count)
//   payload   per member: each component's coefficients as interleaved
//             f64 (re, im) in lattice index order (k1 major, k2 minor,
//             each running -n..n), then the member weight if weighted
//   u32       CRC-32 of header and payload
constexpr std::uint32_t kArchiveVersion = 1;

struct ArchiveError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ArchiveInfo {
  nlohmann::json header;
  std::uint64_t payload_bytes = 0;
  std::uint32_t checksum = 0;
};

void write_archive(const std::filesystem::path& path, const SampleEnsemble& e,
                   const nlohmann::json& metadata = nlohmann::json::object());
// Verifies magic, version, size and checksum before returning anything.
SampleEnsemble read_archive(const std::filesystem::path& path, ArchiveInfo* info = nullptr);

}  // namespace gibbslab::tools
