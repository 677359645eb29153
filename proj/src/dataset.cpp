#include "ilash/dataset.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

#include "ilash/util.hpp"
#include "json.hpp"

namespace ilash {

Tensor gather_rows(const Tensor& t, const std::vector<int>& rows) {
  if (t.shape.empty()) throw std::invalid_argument("gather_rows: scalar tensor");
  const std::int64_t rs = t.row_size();
  Tensor out;
  out.shape = t.shape;
  out.shape[0] = static_cast<int>(rows.size());
  out.data.resize(rows.size() * static_cast<std::size_t>(rs));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const int r = rows[i];
    if (r < 0 || r >= t.shape[0]) throw std::out_of_range("gather_rows: row out of range");
    std::copy_n(t.data.begin() + static_cast<std::int64_t>(r) * rs, rs,
                out.data.begin() + static_cast<std::int64_t>(i) * rs);
  }
  return out;
}

const std::vector<int>& MultiTaskDataset::split_indices(Split s) const {
  switch (s) {
    case Split::Train: return splits.train;
    case Split::Val: return splits.val;
    case Split::Test: return splits.test;
  }
  throw std::logic_error("unreachable split");
}

MultiTaskDataset MultiTaskDataset::task_view(TaskId id) const {
  auto it = tasks.find(id);
  if (it == tasks.end()) {
    throw std::out_of_range("task_view: unknown task id " + std::to_string(id));
  }
  MultiTaskDataset view;
  view.tasks.emplace(id, it->second);
  view.splits = splits;
  view.samples = samples;
  view.seed = seed;
  return view;
}

std::vector<TaskInfo> MultiTaskDataset::task_infos() const {
  std::vector<TaskInfo> infos;
  infos.reserve(tasks.size());
  for (const auto& [id, td] : tasks) infos.push_back(td.info);
  return infos;
}

namespace {

double f32(double v) { return static_cast<double>(static_cast<float>(v)); }

double region_mean(const Tensor& inputs, std::int64_t sample, int h, int w, int c,
                   int r0, int r1, int c0, int c1) {
  double sum = 0.0;
  std::int64_t count = 0;
  const std::int64_t base = sample * h * w * c;
  for (int y = r0; y < r1; ++y) {
    for (int x = c0; x < c1; ++x) {
      for (int ch = 0; ch < c; ++ch) {
        sum += inputs.data[static_cast<std::size_t>(base + (static_cast<std::int64_t>(y) * w + x) * c + ch)];
        ++count;
      }
    }
  }
  return count ? sum / static_cast<double>(count) : 0.0;
}

TaskInfo synth_task_info(int index, const SynthSpec& spec) {
  switch (index % 4) {
    case 1:  // overall brightness, two classes
      return classification_task(index, 2, spec.h, spec.w, spec.c);
    case 2:  // brightest quadrant
      return classification_task(index, 4, spec.h, spec.w, spec.c);
    case 3:  // mean intensity
      return regression_task(index, 1, spec.h, spec.w, spec.c);
    default:  // top/bottom balance
      return classification_task(index, 2, spec.h, spec.w, spec.c);
  }
}

double synth_target(int index, const Tensor& inputs, std::int64_t sample, int h, int w, int c) {
  const double mean = region_mean(inputs, sample, h, w, c, 0, h, 0, w);
  switch (index % 4) {
    case 1:
      return mean > 0.5 ? 1.0 : 0.0;
    case 2: {
      const int hy = h / 2, hx = w / 2;
      const double q[4] = {
          region_mean(inputs, sample, h, w, c, 0, hy, 0, hx),
          region_mean(inputs, sample, h, w, c, 0, hy, hx, w),
          region_mean(inputs, sample, h, w, c, hy, h, 0, hx),
          region_mean(inputs, sample, h, w, c, hy, h, hx, w),
      };
      return static_cast<double>(std::max_element(q, q + 4) - q);
    }
    case 3:
      return f32(mean);
    default: {
      const double top = region_mean(inputs, sample, h, w, c, 0, h / 2, 0, w);
      const double bottom = region_mean(inputs, sample, h, w, c, h / 2, h, 0, w);
      return top > bottom ? 1.0 : 0.0;
    }
  }
}

constexpr char kTensorMagic[4] = {'I', 'L', 'T', '1'};

void write_tensor_f32(const std::filesystem::path& path, const Tensor& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(kTensorMagic, 4);
  const std::uint32_t ndim = static_cast<std::uint32_t>(t.shape.size());
  out.write(reinterpret_cast<const char*>(&ndim), sizeof(ndim));
  for (int d : t.shape) {
    const std::uint32_t u = static_cast<std::uint32_t>(d);
    out.write(reinterpret_cast<const char*>(&u), sizeof(u));
  }
  for (double v : t.data) {
    const float f = static_cast<float>(v);
    out.write(reinterpret_cast<const char*>(&f), sizeof(f));
  }
  if (!out) throw std::runtime_error("short write to " + path.string());
}

Tensor read_tensor_f32(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kTensorMagic, 4) != 0) {
    throw std::runtime_error("bad tensor header in " + path.string());
  }
  std::uint32_t ndim = 0;
  in.read(reinterpret_cast<char*>(&ndim), sizeof(ndim));
  if (!in || ndim > 8) throw std::runtime_error("bad tensor rank in " + path.string());
  std::vector<int> shape(ndim);
  for (std::uint32_t i = 0; i < ndim; ++i) {
    std::uint32_t u = 0;
    in.read(reinterpret_cast<char*>(&u), sizeof(u));
    shape[i] = static_cast<int>(u);
  }
  Tensor t(shape);
  for (double& v : t.data) {
    float f = 0.0f;
    in.read(reinterpret_cast<char*>(&f), sizeof(f));
    v = static_cast<double>(f);
  }
  if (!in) throw std::runtime_error("truncated tensor data in " + path.string());
  return t;
}

}  // namespace

MultiTaskDataset synth_dataset(const SynthSpec& spec) {
  if (spec.tasks < 1 || spec.samples < 1 || spec.h < 2 || spec.w < 2 || spec.c < 1) {
    throw std::invalid_argument("synth_dataset: sizes must be positive (min 2x2 images)");
  }
  if (spec.train_frac < 0 || spec.val_frac < 0 || spec.train_frac + spec.val_frac > 1.0) {
    throw std::invalid_argument("synth_dataset: bad split fractions");
  }

  MultiTaskDataset ds;
  ds.samples = spec.samples;
  ds.seed = spec.seed;

  // Shared image pool: bimodal base brightness plus one boosted quadrant,
  // stored at float32 precision so disk round-trips are exact.
  Tensor images({spec.samples, spec.h, spec.w, spec.c});
  std::mt19937_64 rng(mix_seed(spec.seed, 0x1317));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> noise(-0.05, 0.05);
  std::uniform_int_distribution<int> quadrant(0, 3);
  for (int n = 0; n < spec.samples; ++n) {
    const bool bright = unit(rng) < 0.5;
    const double mu = bright ? 0.62 + 0.18 * unit(rng) : 0.2 + 0.18 * unit(rng);
    const int q = quadrant(rng);
    const int hy = spec.h / 2, hx = spec.w / 2;
    for (int y = 0; y < spec.h; ++y) {
      for (int x = 0; x < spec.w; ++x) {
        const int in_q = ((y < hy ? 0 : 2) + (x < hx ? 0 : 1));
        const double boost = in_q == q ? 0.25 : 0.0;
        for (int ch = 0; ch < spec.c; ++ch) {
          const double v = std::clamp(mu + boost + noise(rng), 0.0, 1.0);
          const std::int64_t at =
              ((static_cast<std::int64_t>(n) * spec.h + y) * spec.w + x) * spec.c + ch;
          images.data[static_cast<std::size_t>(at)] = f32(v);
        }
      }
    }
  }

  for (int i = 1; i <= spec.tasks; ++i) {
    TaskData td;
    td.info = synth_task_info(i, spec);
    td.inputs = images;
    td.targets = Tensor({spec.samples, 1});
    for (int n = 0; n < spec.samples; ++n) {
      td.targets.data[static_cast<std::size_t>(n)] =
          synth_target(i, images, n, spec.h, spec.w, spec.c);
    }
    ds.tasks.emplace(td.info.task_id, std::move(td));
  }

  std::vector<int> perm(static_cast<std::size_t>(spec.samples));
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 split_rng(mix_seed(spec.seed, 0x59173));
  std::shuffle(perm.begin(), perm.end(), split_rng);
  const int n_train = static_cast<int>(spec.train_frac * spec.samples);
  const int n_val = static_cast<int>(spec.val_frac * spec.samples);
  ds.splits.train.assign(perm.begin(), perm.begin() + n_train);
  ds.splits.val.assign(perm.begin() + n_train, perm.begin() + n_train + n_val);
  ds.splits.test.assign(perm.begin() + n_train + n_val, perm.end());
  return ds;
}

void save_dataset(const std::filesystem::path& dir, const MultiTaskDataset& ds) {
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json meta;
  meta["schema_version"] = 1;
  meta["seed"] = ds.seed;
  meta["samples"] = ds.samples;
  meta["splits"] = {{"train", ds.splits.train}, {"val", ds.splits.val}, {"test", ds.splits.test}};
  nlohmann::ordered_json tasks = nlohmann::ordered_json::array();
  for (const auto& [id, td] : ds.tasks) {
    const std::string stem = "task" + std::to_string(id);
    tasks.push_back({{"task_id", td.info.task_id},
                     {"kind", to_string(td.info.kind)},
                     {"num_outputs", td.info.num_outputs},
                     {"input_h", td.info.input_h},
                     {"input_w", td.info.input_w},
                     {"input_c", td.info.input_c},
                     {"loss", to_string(td.info.loss)},
                     {"metric", to_string(td.info.metric)},
                     {"inputs", stem + "_inputs.bin"},
                     {"targets", stem + "_targets.bin"}});
    write_tensor_f32(dir / (stem + "_inputs.bin"), td.inputs);
    write_tensor_f32(dir / (stem + "_targets.bin"), td.targets);
  }
  meta["tasks"] = std::move(tasks);
  std::ofstream out(dir / "meta.json", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + (dir / "meta.json").string());
  out << meta.dump(2) << '\n';
}

MultiTaskDataset load_dataset(const std::filesystem::path& dir) {
  std::ifstream in(dir / "meta.json");
  if (!in) throw std::runtime_error("cannot read " + (dir / "meta.json").string());
  nlohmann::json meta = nlohmann::json::parse(in);
  MultiTaskDataset ds;
  ds.seed = meta.at("seed").get<std::uint64_t>();
  ds.samples = meta.at("samples").get<int>();
  ds.splits.train = meta.at("splits").at("train").get<std::vector<int>>();
  ds.splits.val = meta.at("splits").at("val").get<std::vector<int>>();
  ds.splits.test = meta.at("splits").at("test").get<std::vector<int>>();
  for (const auto& t : meta.at("tasks")) {
    TaskData td;
    td.info.task_id = t.at("task_id").get<TaskId>();
    const std::string kind = t.at("kind").get<std::string>();
    if (kind == "classification") {
      td.info = classification_task(td.info.task_id, t.at("num_outputs").get<int>(),
                                    t.at("input_h").get<int>(), t.at("input_w").get<int>(),
                                    t.at("input_c").get<int>());
    } else if (kind == "regression") {
      td.info = regression_task(td.info.task_id, t.at("num_outputs").get<int>(),
                                t.at("input_h").get<int>(), t.at("input_w").get<int>(),
                                t.at("input_c").get<int>());
    } else {
      throw std::runtime_error("dataset meta: unknown task kind " + kind);
    }
    td.inputs = read_tensor_f32(dir / t.at("inputs").get<std::string>());
    td.targets = read_tensor_f32(dir / t.at("targets").get<std::string>());
    if (td.inputs.shape.size() != 4 || td.inputs.shape[0] != ds.samples) {
      throw std::runtime_error("dataset: input tensor shape mismatch for task " +
                               std::to_string(td.info.task_id));
    }
    ds.tasks.emplace(td.info.task_id, std::move(td));
  }
  return ds;
}

}  // namespace ilash
