#include "ilash/encoding.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ilash/util.hpp"

namespace ilash {

std::array<double, BranchRecord::kFeatureWidth> BranchRecord::features() const {
  std::array<double, kFeatureWidth> out{};
  for (std::size_t i = 0; i < task.v.size(); ++i) out[i] = task.v[i];
  for (std::size_t i = 0; i < layer.v.size(); ++i) out[task.v.size() + i] = layer.v[i];
  return out;
}

std::array<double, BranchRecord::kRowWidth> BranchRecord::as_row() const {
  std::array<double, kRowWidth> out{};
  auto f = features();
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i];
  out[kFeatureWidth] = gn;
  return out;
}

BranchRecord BranchRecord::from_row(const std::array<double, kRowWidth>& row) {
  BranchRecord r;
  for (std::size_t i = 0; i < r.task.v.size(); ++i) r.task.v[i] = row[i];
  for (std::size_t i = 0; i < r.layer.v.size(); ++i) r.layer.v[i] = row[6 + i];
  r.gn = row[kFeatureWidth];
  return r;
}

EncodingVector encode(const ModelGraph& model, int idx) {
  const auto& order = model.depth_order();
  if (idx < 0 || idx >= static_cast<int>(order.size())) {
    throw std::out_of_range("encode: depth index " + std::to_string(idx) +
                            " outside [0, " + std::to_string(order.size()) + ")");
  }
  EncodingVector enc;
  for (int i = -1; i <= 1; ++i) {
    const std::size_t slot = static_cast<std::size_t>(i + 1) * 3;
    const int at = idx + i;
    if (at < 0 || at >= static_cast<int>(order.size())) {
      enc.v[slot] = enc.v[slot + 1] = enc.v[slot + 2] = -1.0;
      continue;
    }
    const LayerSpec& lr = model.layer(order[static_cast<std::size_t>(at)]);
    if (lr.is_conv()) {
      enc.v[slot] = lr.kernel_size;
      enc.v[slot + 1] = lr.padding == Padding::Valid ? 1.0 : 0.0;
      enc.v[slot + 2] = lr.stride;
    } else {
      enc.v[slot] = enc.v[slot + 1] = enc.v[slot + 2] = -1.0;
    }
  }
  return enc;
}

TaskFeatureVector task_features(const TaskInfo& task) {
  validate_task(task);
  TaskFeatureVector f;
  f.v[0] = task.kind == TaskKind::Classification ? 1.0 : 0.0;
  f.v[1] = task.kind == TaskKind::Regression ? 1.0 : 0.0;
  f.v[2] = task.num_outputs;
  f.v[3] = task.input_h;
  f.v[4] = task.input_w;
  f.v[5] = task.input_c;
  return f;
}

BranchRecord make_record(const TaskInfo& task, const ModelGraph& model, int idx, double gn) {
  if (gn < 0.0 || gn > 1.0) {
    throw std::invalid_argument("make_record: gn must lie in [0, 1]");
  }
  BranchRecord r;
  r.task = task_features(task);
  r.layer = encode(model, idx);
  r.gn = gn;
  return r;
}

std::string records_to_csv(const std::vector<BranchRecord>& records) {
  std::string out = kRecordsCsvHeader;
  out += '\n';
  for (const BranchRecord& r : records) {
    auto row = r.as_row();
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_number(row[i]);
    }
    out += '\n';
  }
  return out;
}

std::vector<BranchRecord> records_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) {
    throw std::invalid_argument("records csv: empty input");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kRecordsCsvHeader) {
    throw std::invalid_argument("records csv: unexpected header: " + line);
  }
  std::vector<BranchRecord> records;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split(line, ',');
    if (fields.size() != BranchRecord::kRowWidth) {
      throw std::invalid_argument("records csv: line " + std::to_string(lineno) +
                                  " has " + std::to_string(fields.size()) +
                                  " fields, expected 16");
    }
    std::array<double, BranchRecord::kRowWidth> row{};
    for (std::size_t i = 0; i < fields.size(); ++i) {
      char* end = nullptr;
      row[i] = std::strtod(fields[i].c_str(), &end);
      if (end == fields[i].c_str() || *end != '\0') {
        throw std::invalid_argument("records csv: bad number '" + fields[i] +
                                    "' on line " + std::to_string(lineno));
      }
    }
    records.push_back(BranchRecord::from_row(row));
  }
  return records;
}

void write_records_csv(const std::filesystem::path& path,
                       const std::vector<BranchRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << records_to_csv(records);
}

std::vector<BranchRecord> read_records_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return records_from_csv(ss.str());
}

}  // namespace ilash
