#include "archive.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <zlib.h>

namespace gibbslab::tools {

namespace {

using json = nlohmann::json;

constexpr char kMagic[8] = {'G', 'L', 'B', 'E', 'N', 'S', 'M', '\0'};
constexpr std::size_t kPrefix = 8 + 4 + 8;

void put_u32(std::string& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(char((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& b, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) b.push_back(char((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& b, double x) { put_u64(b, std::bit_cast<std::uint64_t>(x)); }

std::uint64_t get_le(const std::string& b, std::size_t at, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= std::uint64_t(static_cast<unsigned char>(b[at + i])) << (8 * i);
  return v;
}

std::uint32_t crc(const char* p, std::size_t n) {
  uLong c = crc32(0L, Z_NULL, 0);
  while (n > 0) {
    uInt chunk = uInt(std::min<std::size_t>(n, 1u << 30));
    c = crc32(c, reinterpret_cast<const Bytef*>(p), chunk);
    p += chunk;
    n -= chunk;
  }
  return std::uint32_t(c);
}

json describe(const FourierField& f) {
  return {{"dim", f.lattice.dim()}, {"n", f.lattice.n()}, {"q", f.lattice.q()},
          {"real", f.real},         {"zero_mode", f.zero_mode}};
}

bool same_shape(const FourierField& f, const json& d) {
  return f.lattice.dim() == d["dim"].get<int>() && f.lattice.n() == d["n"].get<int>() &&
         f.lattice.q() == d["q"].get<int>() && f.real == d["real"].get<bool>() &&
         f.zero_mode == d["zero_mode"].get<bool>();
}

}  // namespace

void write_archive(const std::filesystem::path& path, const SampleEnsemble& e, const json& metadata) {
  std::size_t count = e.size();
  bool weighted = !e.weights.empty();
  if (weighted && e.weights.size() != count) throw ArchiveError("ensemble weights do not match its size");
  if (!e.aux.empty() && e.aux.size() != count) throw ArchiveError("ensemble components do not match its size");
  json comps = json::array();
  if (count > 0) {
    comps.push_back(describe(e.fields[0]));
    if (!e.aux.empty())
      for (const auto& a : e.aux[0]) comps.push_back(describe(a));
  }
  json header = {{"format_version", kArchiveVersion},
                 {"count", count},
                 {"components", comps},
                 {"weighted", weighted},
                 {"model", e.model},
                 {"domain", e.domain},
                 {"reference", e.reference},
                 {"seed", e.seed},
                 {"thin", e.thin},
                 {"metadata", metadata}};
  std::string head = header.dump();

  std::string buf(kMagic, kMagic + 8);
  put_u32(buf, kArchiveVersion);
  put_u64(buf, head.size());
  buf += head;
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<const FourierField*> parts{&e.fields[i]};
    if (!e.aux.empty())
      for (const auto& a : e.aux[i]) parts.push_back(&a);
    if (parts.size() != comps.size()) throw ArchiveError("ensemble members have differing component counts");
    for (std::size_t c = 0; c < parts.size(); ++c) {
      if (!same_shape(*parts[c], comps[c])) throw ArchiveError("ensemble members live on differing lattices");
      for (cplx z : parts[c]->c) {
        put_f64(buf, z.real());
        put_f64(buf, z.imag());
      }
    }
    if (weighted) put_f64(buf, e.weights[i]);
  }
  put_u32(buf, crc(buf.data() + kPrefix, buf.size() - kPrefix));

  std::filesystem::path tmp = path;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ArchiveError("cannot write " + tmp.string());
    out.write(buf.data(), std::streamsize(buf.size()));
    if (!out) throw ArchiveError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

SampleEnsemble read_archive(const std::filesystem::path& path, ArchiveInfo* info) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArchiveError("cannot open " + path.string());
  std::string b((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (b.size() < kPrefix + 4 || std::memcmp(b.data(), kMagic, 8) != 0)
    throw ArchiveError(path.string() + " is not an ensemble archive");
  auto version = std::uint32_t(get_le(b, 8, 4));
  if (version != kArchiveVersion)
    throw ArchiveError("archive format version " + std::to_string(version) + " is not supported (expected " +
                       std::to_string(kArchiveVersion) + ")");
  std::uint64_t hlen = get_le(b, 12, 8);
  if (hlen > b.size() - kPrefix - 4) throw ArchiveError("checksum error: archive is truncated inside the header");
  json header;
  try {
    header = json::parse(b.begin() + kPrefix, b.begin() + std::ptrdiff_t(kPrefix + hlen));
  } catch (const json::parse_error&) {
    throw ArchiveError("checksum error: archive header is corrupt");
  }

  std::uint64_t count = header.at("count").get<std::uint64_t>();
  bool weighted = header.at("weighted").get<bool>();
  const json& comps = header.at("components");
  std::vector<Lattice> lats;
  std::uint64_t per = weighted ? 8 : 0;
  for (const auto& c : comps) {
    lats.emplace_back(c["dim"].get<int>(), c["n"].get<int>(), c["q"].get<int>());
    per += 16 * lats.back().size();
  }
  std::uint64_t payload = count * per;
  std::uint64_t expect = kPrefix + hlen + payload + 4;
  if (b.size() != expect)
    throw ArchiveError("checksum error: archive holds " + std::to_string(b.size()) + " bytes, header implies " +
                       std::to_string(expect) + " (truncated or padded)");
  std::uint32_t stored = std::uint32_t(get_le(b, expect - 4, 4));
  std::uint32_t actual = crc(b.data() + kPrefix, expect - 4 - kPrefix);
  if (stored != actual) throw ArchiveError("checksum error: payload CRC mismatch");

  SampleEnsemble e;
  e.model = header.value("model", "");
  e.domain = header.value("domain", "");
  e.reference = header.value("reference", "");
  e.seed = header.value("seed", std::uint64_t(0));
  e.thin = header.value("thin", 1);
  std::size_t at = kPrefix + hlen;
  auto next = [&] {
    double x = std::bit_cast<double>(get_le(b, at, 8));
    at += 8;
    return x;
  };
  e.fields.reserve(count);
  if (comps.size() > 1) e.aux.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::vector<FourierField> parts;
    for (std::size_t c = 0; c < comps.size(); ++c) {
      FourierField f(lats[c], comps[c]["real"].get<bool>(), comps[c]["zero_mode"].get<bool>());
      for (auto& z : f.c) {
        double re = next();
        z = cplx(re, next());
      }
      parts.push_back(std::move(f));
    }
    e.fields.push_back(std::move(parts[0]));
    if (comps.size() > 1) e.aux.emplace_back(std::make_move_iterator(parts.begin() + 1), std::make_move_iterator(parts.end()));
    if (weighted) e.weights.push_back(next());
  }
  if (info) {
    info->header = header;
    info->payload_bytes = payload;
    info->checksum = stored;
  }
  return e;
}

}  // namespace gibbslab::tools
