#ifndef MRSQ_HARNESS_METRICS_H_
#define MRSQ_HARNESS_METRICS_H_

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace mrsq::harness {

struct EvalRecord {
  int64_t step = 0;
  double mean_return = 0.0;
  double mean_length = 0.0;
  double min_return = 0.0;
  double max_return = 0.0;
};

void to_json(nlohmann::json& j, const EvalRecord& r);
void from_json(const nlohmann::json& j, EvalRecord& r);

// One JSON object per line.
class MetricWriter {
 public:
  void Open(const std::string& path, bool append);
  bool is_open() const { return out_.is_open(); }
  void Write(const nlohmann::json& record);
  void Flush() { out_.flush(); }

 private:
  std::ofstream out_;
};

std::vector<nlohmann::json> ReadJsonLines(const std::string& path);
void WriteSummaryCsv(const std::string& path, const std::vector<EvalRecord>& evals);

}  // namespace mrsq::harness

#endif  // MRSQ_HARNESS_METRICS_H_
