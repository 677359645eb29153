#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "ilash/model_graph.hpp"

namespace ilash {

// (kernel, pad, stride) for the layers at depth idx-1, idx, idx+1.
// Non-conv layers and out-of-range neighbors encode as (-1, -1, -1);
// pad is 1 for valid padding, 0 for same.
struct EncodingVector {
  std::array<double, 9> v{};
};

// (is_classification, is_regression, num_outputs, in_h, in_w, in_c)
struct TaskFeatureVector {
  std::array<double, 6> v{};
};

struct BranchRecord {
  TaskFeatureVector task;
  EncodingVector layer;
  double gn = 0.0;

  static constexpr std::size_t kFeatureWidth = 15;
  static constexpr std::size_t kRowWidth = 16;

  std::array<double, kFeatureWidth> features() const;
  std::array<double, kRowWidth> as_row() const;
  static BranchRecord from_row(const std::array<double, kRowWidth>& row);
};

EncodingVector encode(const ModelGraph& model, int idx);
TaskFeatureVector task_features(const TaskInfo& task);
BranchRecord make_record(const TaskInfo& task, const ModelGraph& model, int idx, double gn);

// CSV schema for harvested branch records.
inline constexpr const char* kRecordsCsvHeader =
    "task_cls,task_reg,num_outputs,in_h,in_w,in_c,"
    "k_m1,p_m1,s_m1,k_0,p_0,s_0,k_p1,p_p1,s_p1,gn";

std::string records_to_csv(const std::vector<BranchRecord>& records);
std::vector<BranchRecord> records_from_csv(const std::string& text);
void write_records_csv(const std::filesystem::path& path,
                       const std::vector<BranchRecord>& records);
std::vector<BranchRecord> read_records_csv(const std::filesystem::path& path);

}  // namespace ilash
