// Copyright (c) 2026 The structaug authors.
// Licensed under the Apache License 2.0.

#include "structaug/cache.hpp"

#include <chrono>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace fs = std::filesystem;

namespace structaug {

namespace {

constexpr char kMagic[4] = {'S', 'O', 'P', 'C'};
constexpr uint32_t kVersion = 1;

std::string double_bits_hex(double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(bits));
  return buf;
}

void write_u64(std::ofstream& out, uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
  out.write(reinterpret_cast<const char*>(b), 8);
}

uint64_t read_u64(std::ifstream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
  return v;
}

void write_doubles(std::ofstream& out, const std::vector<double>& v) {
  write_u64(out, v.size());
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::vector<double> read_doubles(std::ifstream& in) {
  const uint64_t n = read_u64(in);
  std::vector<double> v(n);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
  return v;
}

void write_sizes(std::ofstream& out, const std::vector<size_t>& v) {
  write_u64(out, v.size());
  for (size_t x : v) write_u64(out, x);
}

std::vector<size_t> read_sizes(std::ifstream& in) {
  const uint64_t n = read_u64(in);
  std::vector<size_t> v(n);
  for (uint64_t i = 0; i < n; ++i) v[i] = static_cast<size_t>(read_u64(in));
  return v;
}

void write_csr(std::ofstream& out, const CsrMatrix& m) {
  write_u64(out, m.rows);
  write_u64(out, m.cols);
  write_sizes(out, m.row_offsets);
  write_sizes(out, m.col_indices);
  write_doubles(out, m.values);
}

CsrMatrix read_csr(std::ifstream& in) {
  CsrMatrix m;
  m.rows = static_cast<size_t>(read_u64(in));
  m.cols = static_cast<size_t>(read_u64(in));
  m.row_offsets = read_sizes(in);
  m.col_indices = read_sizes(in);
  m.values = read_doubles(in);
  if (!in || !m.valid()) throw IoError("cache: corrupt CSR payload");
  return m;
}

// Header: magic, version, u64 json length, json metadata bytes.
void write_header(std::ofstream& out, const nlohmann::json& meta) {
  out.write(kMagic, 4);
  write_u64(out, kVersion);
  const std::string j = meta.dump();
  write_u64(out, j.size());
  out.write(j.data(), static_cast<std::streamsize>(j.size()));
}

nlohmann::json read_header(std::ifstream& in, const std::string& path) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw IoError("cache: bad entry magic in " + path);
  const uint64_t version = read_u64(in);
  if (version != kVersion)
    throw IoError("cache: entry version mismatch in " + path + " (found " +
                  std::to_string(version) + ", expected " + std::to_string(kVersion) + ")");
  const uint64_t len = read_u64(in);
  std::string j(len, '\0');
  in.read(j.data(), static_cast<std::streamsize>(len));
  if (!in) throw IoError("cache: truncated metadata in " + path);
  try {
    return nlohmann::json::parse(j);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("cache: malformed metadata in " + path + ": " + e.what());
  }
}

int64_t now_unix() {
  return std::chrono::duration_cast<std::chrono::seconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

// Write to a temp file, then rename; readers never observe partial entries.
class AtomicFile {
 public:
  explicit AtomicFile(const fs::path& target)
      : target_(target), tmp_(target.string() + ".tmp"), out_(tmp_, std::ios::binary) {
    if (!out_) throw IoError("cache: cannot open " + tmp_.string() + " for writing");
  }
  std::ofstream& stream() { return out_; }
  void commit() {
    out_.close();
    if (!out_) throw IoError("cache: failed writing " + tmp_.string());
    fs::rename(tmp_, target_);
  }

 private:
  fs::path target_;
  fs::path tmp_;
  std::ofstream out_;
};

}  // namespace

OperatorCache::OperatorCache(std::string directory) : dir_(std::move(directory)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw IoError("cache: cannot create directory " + dir_);
}

std::string OperatorCache::flow_entry_name(int m, int n, double gamma) {
  return "geoflow_" + std::to_string(m) + "x" + std::to_string(n) + "_g" +
         double_bits_hex(gamma) + ".opc";
}

std::string OperatorCache::recolor_entry_name(uint64_t image_id, double eps, size_t k) {
  char idhex[17];
  std::snprintf(idhex, sizeof(idhex), "%016llx", static_cast<unsigned long long>(image_id));
  return std::string("recolor_") + idhex + "_e" + double_bits_hex(eps) + "_k" +
         std::to_string(k) + ".opc";
}

bool OperatorCache::has_flow_ops(int m, int n, double gamma) const {
  return fs::exists(fs::path(dir_) / flow_entry_name(m, n, gamma));
}

std::optional<GridOperatorSet> OperatorCache::load_flow_ops(int m, int n, double gamma) const {
  const fs::path path = fs::path(dir_) / flow_entry_name(m, n, gamma);
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  const nlohmann::json meta = read_header(in, path.string());
  if (meta.value("kind", "") != "geoflow-operators" || meta.value("m", -1) != m ||
      meta.value("n", -1) != n)
    throw IoError("cache: entry key mismatch in " + path.string());
  GridOperatorSet ops;
  ops.m = m;
  ops.n = n;
  ops.dx = read_csr(in);
  ops.dy = read_csr(in);
  ops.p = read_csr(in);
  return ops;
}

void OperatorCache::store_flow_ops(const GridOperatorSet& ops, double gamma) const {
  const fs::path path = fs::path(dir_) / flow_entry_name(ops.m, ops.n, gamma);
  nlohmann::json meta;
  meta["kind"] = "geoflow-operators";
  meta["version"] = kVersion;
  meta["m"] = ops.m;
  meta["n"] = ops.n;
  meta["gamma_bits"] = double_bits_hex(gamma);
  meta["created_unix"] = now_unix();
  AtomicFile file(path);
  write_header(file.stream(), meta);
  write_csr(file.stream(), ops.dx);
  write_csr(file.stream(), ops.dy);
  write_csr(file.stream(), ops.p);
  file.commit();
}

GridOperatorSet OperatorCache::get_flow_ops(int m, int n, double gamma) const {
  if (auto ops = load_flow_ops(m, n, gamma)) return std::move(*ops);
  GridOperatorSet ops = build_diff_ops(m, n);
  store_flow_ops(ops, gamma);
  return ops;
}

bool OperatorCache::has_subspace(uint64_t image_id, double eps, size_t k) const {
  return fs::exists(fs::path(dir_) / recolor_entry_name(image_id, eps, k));
}

std::optional<EigenSubspace> OperatorCache::load_subspace(uint64_t image_id, double eps,
                                                          size_t k) const {
  const fs::path path = fs::path(dir_) / recolor_entry_name(image_id, eps, k);
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  const nlohmann::json meta = read_header(in, path.string());
  if (meta.value("kind", "") != "recolor-subspace" || meta.value("k", size_t(0)) != k)
    throw IoError("cache: entry key mismatch in " + path.string());
  EigenSubspace sub;
  sub.seed = meta.value("eig_seed", uint64_t(0));
  sub.values = read_doubles(in);
  const uint64_t dim = read_u64(in);
  sub.vectors.resize(sub.values.size());
  for (auto& v : sub.vectors) {
    v.resize(dim);
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(dim * sizeof(double)));
  }
  if (!in) throw IoError("cache: truncated subspace payload in " + path.string());
  return sub;
}

void OperatorCache::store_subspace(uint64_t image_id, double eps, size_t k,
                                   const EigenSubspace& sub) const {
  const fs::path path = fs::path(dir_) / recolor_entry_name(image_id, eps, k);
  nlohmann::json meta;
  meta["kind"] = "recolor-subspace";
  meta["version"] = kVersion;
  meta["image_id"] = image_id;
  meta["eps_bits"] = double_bits_hex(eps);
  meta["k"] = k;
  meta["eig_seed"] = sub.seed;
  meta["created_unix"] = now_unix();
  AtomicFile file(path);
  write_header(file.stream(), meta);
  write_doubles(file.stream(), sub.values);
  const uint64_t dim = sub.vectors.empty() ? 0 : sub.vectors.front().size();
  write_u64(file.stream(), dim);
  for (const auto& v : sub.vectors)
    file.stream().write(reinterpret_cast<const char*>(v.data()),
                        static_cast<std::streamsize>(dim * sizeof(double)));
  file.commit();
}

}  // namespace structaug
