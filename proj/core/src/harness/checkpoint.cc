#include "mrsq/harness/checkpoint.h"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace mrsq::harness {

static_assert(std::endian::native == std::endian::little,
              "checkpoint encoding assumes a little-endian host");

namespace {

template <typename T>
void Put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T Take(const std::string& in, size_t& pos) {
  if (pos + sizeof(T) > in.size()) {
    throw CheckpointError(CheckpointErrorKind::kMalformed, "checkpoint: unexpected end of data");
  }
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

uint32_t Crc(const char* data, size_t n) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large buffers in chunks.
  while (n > 0) {
    const uInt chunk = static_cast<uInt>(std::min<size_t>(n, 1u << 30));
    crc = crc32(crc, reinterpret_cast<const Bytef*>(data), chunk);
    data += chunk;
    n -= chunk;
  }
  return static_cast<uint32_t>(crc);
}

}  // namespace

void CheckpointData::Add(std::string name, int64_t rows, int64_t cols, std::vector<double> data) {
  if (rows * cols != static_cast<int64_t>(data.size())) {
    throw CheckpointError(CheckpointErrorKind::kShapeMismatch,
                          "checkpoint: section '" + name + "' size does not match its shape");
  }
  sections.push_back({std::move(name), rows, cols, std::move(data)});
}

void CheckpointData::AddMatrix(std::string name, const Matrix& m) {
  Add(std::move(name), m.rows(), m.cols(), std::vector<double>(m.data(), m.data() + m.size()));
}

const Section& CheckpointData::Get(const std::string& name) const {
  for (const Section& s : sections) {
    if (s.name == name) return s;
  }
  throw CheckpointError(CheckpointErrorKind::kMalformed, "checkpoint: missing section '" + name + "'");
}

bool CheckpointData::Has(const std::string& name) const {
  for (const Section& s : sections) {
    if (s.name == name) return true;
  }
  return false;
}

std::string EncodeCheckpoint(const CheckpointData& data) {
  nlohmann::json manifest = data.manifest;
  nlohmann::json table = nlohmann::json::array();
  for (const Section& s : data.sections) table.push_back({{"name", s.name}, {"rows", s.rows}, {"cols", s.cols}});
  manifest["sections"] = table;
  const std::string text = manifest.dump();

  std::string out = "MRSQ";
  Put<uint32_t>(out, data.version);
  Put<uint64_t>(out, text.size());
  out += text;
  for (const Section& s : data.sections) {
    const size_t off = out.size();
    out.resize(off + s.data.size() * sizeof(double));
    if (!s.data.empty()) std::memcpy(out.data() + off, s.data.data(), s.data.size() * sizeof(double));
  }
  Put<uint32_t>(out, Crc(out.data(), out.size()));
  return out;
}

CheckpointData DecodeCheckpoint(const std::string& bytes) {
  if (bytes.size() < 4 || bytes.compare(0, 4, "MRSQ") != 0) {
    throw CheckpointError(CheckpointErrorKind::kBadMagic, "checkpoint: bad magic");
  }
  if (bytes.size() < 4 + 4 + 8 + 4) {
    throw CheckpointError(CheckpointErrorKind::kCrcMismatch, "checkpoint: truncated file (CRC mismatch)");
  }
  size_t tail = bytes.size() - 4;
  const uint32_t stored = Take<uint32_t>(bytes, tail);
  if (stored != Crc(bytes.data(), bytes.size() - 4)) {
    throw CheckpointError(CheckpointErrorKind::kCrcMismatch, "checkpoint: CRC mismatch");
  }
  size_t pos = 4;
  CheckpointData data;
  data.version = Take<uint32_t>(bytes, pos);
  if (data.version != kCheckpointVersion) {
    throw CheckpointError(CheckpointErrorKind::kVersionMismatch,
                          "checkpoint: version " + std::to_string(data.version) + " != " +
                              std::to_string(kCheckpointVersion));
  }
  const auto len = Take<uint64_t>(bytes, pos);
  if (pos + len > bytes.size() - 4) {
    throw CheckpointError(CheckpointErrorKind::kMalformed, "checkpoint: manifest overruns file");
  }
  try {
    data.manifest = nlohmann::json::parse(bytes.substr(pos, len));
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(CheckpointErrorKind::kMalformed, std::string("checkpoint: manifest: ") + e.what());
  }
  pos += len;
  const nlohmann::json table = data.manifest.value("sections", nlohmann::json::array());
  data.manifest.erase("sections");
  for (const auto& entry : table) {
    Section s;
    s.name = entry.at("name").get<std::string>();
    s.rows = entry.at("rows").get<int64_t>();
    s.cols = entry.at("cols").get<int64_t>();
    if (s.rows < 0 || s.cols < 0) throw CheckpointError(CheckpointErrorKind::kMalformed, "checkpoint: negative shape");
    const size_t n = static_cast<size_t>(s.rows * s.cols);
    if (pos + n * sizeof(double) > bytes.size() - 4) {
      throw CheckpointError(CheckpointErrorKind::kMalformed, "checkpoint: section '" + s.name + "' overruns file");
    }
    s.data.resize(n);
    if (n > 0) std::memcpy(s.data.data(), bytes.data() + pos, n * sizeof(double));
    pos += n * sizeof(double);
    data.sections.push_back(std::move(s));
  }
  if (pos != bytes.size() - 4) throw CheckpointError(CheckpointErrorKind::kMalformed, "checkpoint: trailing bytes");
  return data;
}

void WriteCheckpointFile(const std::string& path, const CheckpointData& data) {
  const std::string bytes = EncodeCheckpoint(data);
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError(CheckpointErrorKind::kIo, "checkpoint: cannot write " + tmp);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw CheckpointError(CheckpointErrorKind::kIo, "checkpoint: write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

CheckpointData ReadCheckpointFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(CheckpointErrorKind::kIo, "checkpoint: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return DecodeCheckpoint(ss.str());
}

void SaveStore(CheckpointData& data, const std::string& prefix, const nn::ParameterStore& store) {
  for (int i = 0; i < store.size(); ++i) {
    const nn::Parameter& p = store[i];
    data.AddMatrix(prefix + "/" + p.name + "/value", p.value);
    data.AddMatrix(prefix + "/" + p.name + "/m", p.m);
    data.AddMatrix(prefix + "/" + p.name + "/v", p.v);
  }
  data.Add(prefix + "/step", 1, 1, {static_cast<double>(store.step())});
}

void LoadStore(const CheckpointData& data, const std::string& prefix, nn::ParameterStore& store) {
  for (int i = 0; i < store.size(); ++i) {
    const nn::Parameter& p = store[i];
    for (const char* part : {"value", "m", "v"}) {
      const Section& s = data.Get(prefix + "/" + p.name + "/" + part);
      if (s.rows != p.value.rows() || s.cols != p.value.cols()) {
        throw CheckpointError(CheckpointErrorKind::kShapeMismatch,
                              "checkpoint: shape mismatch for " + s.name + ": stored " +
                                  std::to_string(s.rows) + "x" + std::to_string(s.cols) +
                                  ", expected " + std::to_string(p.value.rows()) + "x" +
                                  std::to_string(p.value.cols()));
      }
    }
  }
  for (int i = 0; i < store.size(); ++i) {
    nn::Parameter& p = store[i];
    p.value = SectionMatrix(data.Get(prefix + "/" + p.name + "/value"));
    p.m = SectionMatrix(data.Get(prefix + "/" + p.name + "/m"));
    p.v = SectionMatrix(data.Get(prefix + "/" + p.name + "/v"));
  }
  store.set_step(static_cast<int64_t>(data.Get(prefix + "/step").data.at(0)));
}

Matrix SectionMatrix(const Section& s) {
  Matrix m(s.rows, s.cols);
  if (!s.data.empty()) std::memcpy(m.data(), s.data.data(), s.data.size() * sizeof(double));
  return m;
}

}  // namespace mrsq::harness
