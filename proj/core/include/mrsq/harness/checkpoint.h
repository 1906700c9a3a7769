#ifndef MRSQ_HARNESS_CHECKPOINT_H_
#define MRSQ_HARNESS_CHECKPOINT_H_

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mrsq/common/errors.h"
#include "mrsq/nn/params.h"

namespace mrsq::harness {

inline constexpr uint32_t kCheckpointVersion = 1;

enum class CheckpointErrorKind { kIo, kBadMagic, kVersionMismatch, kCrcMismatch, kShapeMismatch, kMalformed };

class CheckpointError : public Error {
 public:
  CheckpointError(CheckpointErrorKind kind, const std::string& what) : Error(what), kind_(kind) {}
  CheckpointErrorKind kind() const { return kind_; }

 private:
  CheckpointErrorKind kind_;
};

struct Section {
  std::string name;
  int64_t rows = 0;
  int64_t cols = 0;
  std::vector<double> data;
};

// Layout: "MRSQ", u32 version, u64 manifest length, manifest JSON, the
// sections' float64 data in manifest order, u32 CRC32 of everything before.
// All integers and floats little-endian.
struct CheckpointData {
  uint32_t version = kCheckpointVersion;
  nlohmann::json manifest = nlohmann::json::object();
  std::vector<Section> sections;

  void Add(std::string name, int64_t rows, int64_t cols, std::vector<double> data);
  void AddMatrix(std::string name, const Matrix& m);
  const Section& Get(const std::string& name) const;
  bool Has(const std::string& name) const;
};

std::string EncodeCheckpoint(const CheckpointData& data);
// Validates magic, CRC and version before parsing anything else.
CheckpointData DecodeCheckpoint(const std::string& bytes);

void WriteCheckpointFile(const std::string& path, const CheckpointData& data);
CheckpointData ReadCheckpointFile(const std::string& path);

// Parameter values and AdamW moments under "<prefix>/<param>/{value,m,v}",
// plus "<prefix>/step".
void SaveStore(CheckpointData& data, const std::string& prefix, const nn::ParameterStore& store);
// Checks every shape before writing anything into `store`.
void LoadStore(const CheckpointData& data, const std::string& prefix, nn::ParameterStore& store);

Matrix SectionMatrix(const Section& s);

}  // namespace mrsq::harness

#endif  // MRSQ_HARNESS_CHECKPOINT_H_
