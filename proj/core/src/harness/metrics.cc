#include "mrsq/harness/metrics.h"

#include <filesystem>

#include "mrsq/common/errors.h"

namespace mrsq::harness {

void to_json(nlohmann::json& j, const EvalRecord& r) {
  j = {{"step", r.step},
       {"mean_return", r.mean_return},
       {"mean_length", r.mean_length},
       {"min_return", r.min_return},
       {"max_return", r.max_return}};
}

void from_json(const nlohmann::json& j, EvalRecord& r) {
  r.step = j.at("step").get<int64_t>();
  r.mean_return = j.at("mean_return").get<double>();
  r.mean_length = j.at("mean_length").get<double>();
  r.min_return = j.at("min_return").get<double>();
  r.max_return = j.at("max_return").get<double>();
}

void MetricWriter::Open(const std::string& path, bool append) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  out_.open(path, append ? std::ios::app : std::ios::trunc);
  if (!out_) throw Error("metrics: cannot open " + path);
}

void MetricWriter::Write(const nlohmann::json& record) {
  out_ << record.dump() << '\n';
}

std::vector<nlohmann::json> ReadJsonLines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("metrics: cannot open " + path);
  std::vector<nlohmann::json> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(nlohmann::json::parse(line));
  }
  return out;
}

void WriteSummaryCsv(const std::string& path, const std::vector<EvalRecord>& evals) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("metrics: cannot write " + path);
  out.precision(17);
  out << "step,mean_return,mean_length,min_return,max_return\n";
  for (const EvalRecord& r : evals) {
    out << r.step << ',' << r.mean_return << ',' << r.mean_length << ',' << r.min_return << ','
        << r.max_return << '\n';
  }
}

}  // namespace mrsq::harness
