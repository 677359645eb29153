#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <vector>

#include "ilash/model_graph.hpp"
#include "ilash/tensor.hpp"

namespace ilash {

enum class Split { Train, Val, Test };

struct SplitIndices {
  std::vector<int> train, val, test;
};

struct TaskData {
  TaskInfo info;
  Tensor inputs;   // [n, h, w, c]
  Tensor targets;  // [n, num_targets]; class index for classification
};

struct MultiTaskDataset {
  std::map<TaskId, TaskData> tasks;
  SplitIndices splits;  // shared across tasks; disjoint and exhaustive
  int samples = 0;
  std::uint64_t seed = 0;

  const std::vector<int>& split_indices(Split s) const;
  // Single-task dataset sharing the same splits.
  MultiTaskDataset task_view(TaskId id) const;
  std::vector<TaskInfo> task_infos() const;
};

struct SynthSpec {
  int tasks = 3;
  int samples = 300;
  int h = 12, w = 12, c = 1;
  std::uint64_t seed = 1;
  double train_frac = 0.7;
  double val_frac = 0.1;
};

// Reproducible multi-task dataset on shared synthetic images. Task targets
// are deterministic functions of the image: overall brightness class, the
// brightest quadrant, mean intensity (regression), and top/bottom balance,
// cycling when more tasks are requested.
MultiTaskDataset synth_dataset(const SynthSpec& spec);

void save_dataset(const std::filesystem::path& dir, const MultiTaskDataset& ds);
MultiTaskDataset load_dataset(const std::filesystem::path& dir);

}  // namespace ilash
