#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <filesystem>

#include "ilash/encoding.hpp"
#include "ilash/util.hpp"
#include "test_support.hpp"

using namespace ilash;

namespace {

std::array<double, 9> values(const EncodingVector& e) { return e.v; }

}  // namespace

TEST_CASE("encode captures the conv window around a layer") {
  // conv(k1, same, s2) -> conv(k3, valid, s1) -> pool
  const std::vector<LayerSpec> tmpl{
      conv2d(1, 2, Padding::Same, 4),
      conv2d(3, 1, Padding::Valid, 8),
      max_pool(),
  };
  const ModelGraph g =
      ModelGraph::build_base(tmpl, classification_task(1, 2, 12, 12, 1), 0);
  const auto enc = encode(g, 1);
  const std::array<double, 9> expected{1, 0, 2, 3, 1, 1, -1, -1, -1};
  CHECK(values(enc) == expected);
}

TEST_CASE("encode boundary and non-conv rules") {
  // flatten -> dense -> dense: nothing is a conv, idx 0 has no predecessor.
  const std::vector<LayerSpec> tmpl{flatten(), dense(8), dense(4)};
  const ModelGraph g =
      ModelGraph::build_base(tmpl, classification_task(1, 2, 6, 6, 1), 0);
  const std::array<double, 9> all_missing{-1, -1, -1, -1, -1, -1, -1, -1, -1};
  CHECK(values(encode(g, 0)) == all_missing);
  CHECK(values(encode(g, 1)) == all_missing);
  // Last depth: successor is out of range.
  CHECK(values(encode(g, static_cast<int>(g.depth_order().size()) - 1)) == all_missing);

  CHECK_THROWS_AS(encode(g, -1), std::out_of_range);
  CHECK_THROWS_AS(encode(g, 99), std::out_of_range);
}

TEST_CASE("encode output is 9-wide on a mixed 12-layer graph") {
  std::vector<LayerSpec> tmpl{
      conv2d(3, 1, Padding::Same, 4),
      depthwise_conv2d(5, 1, Padding::Same),
      conv2d(1, 1, Padding::Valid, 8),
      max_pool(),
      conv2d(3, 2, Padding::Valid, 8),
      depthwise_conv2d(1, 1, Padding::Same),
      activation(Activation::Relu),
      conv2d(1, 1, Padding::Same, 12),
      flatten(),
      dense(16),
      dense(8),
  };
  const ModelGraph g =
      ModelGraph::build_base(tmpl, classification_task(1, 3, 16, 16, 1), 0);
  REQUIRE(g.layer_count() == 12);
  for (int idx = 0; idx < g.layer_count(); ++idx) {
    const auto enc = encode(g, idx);
    CHECK(enc.v.size() == 9);
    for (std::size_t t = 0; t < 3; ++t) {
      const double k = enc.v[t * 3], p = enc.v[t * 3 + 1], s = enc.v[t * 3 + 2];
      const bool missing = (k == -1 && p == -1 && s == -1);
      const bool conv = (k >= 1 && (p == 0 || p == 1) && s >= 1);
      CHECK((missing || conv));
    }
  }
  // First layer: no predecessor.
  CHECK(values(encode(g, 0))[0] == -1);
  // Pool at depth 3 encodes as missing in its own slot.
  CHECK(values(encode(g, 3))[3] == -1);
  CHECK(values(encode(g, 3))[4] == -1);
  // Its neighbors are convs.
  CHECK(values(encode(g, 3))[0] == 1);
  CHECK(values(encode(g, 3))[6] == 3);
}

TEST_CASE("encode only depends on the three-layer window") {
  auto tmpl = ilash::testing::small_conv_template();
  const TaskInfo t1 = classification_task(1, 2, 12, 12, 1);
  const ModelGraph g = ModelGraph::build_base(tmpl, t1, 0);
  const auto before = encode(g, 1);
  // Change a layer far from the window (depth 4).
  tmpl[4] = conv2d(7, 2, Padding::Valid, 3);
  const ModelGraph changed = ModelGraph::build_base(tmpl, t1, 0);
  CHECK(values(encode(changed, 1)) == values(before));
}

TEST_CASE("task_features maps tasks deterministically") {
  const TaskInfo cls = classification_task(1, 3, 16, 16, 1);
  const std::array<double, 6> expect_cls{1, 0, 3, 16, 16, 1};
  CHECK(task_features(cls).v == expect_cls);
  CHECK(task_features(cls).v == task_features(cls).v);

  const TaskInfo reg = regression_task(2, 1, 8, 10, 3);
  const std::array<double, 6> expect_reg{0, 1, 1, 8, 10, 3};
  CHECK(task_features(reg).v == expect_reg);
}

TEST_CASE("make_record concatenates and validates") {
  const ModelGraph g = ModelGraph::build_base(ilash::testing::small_conv_template(),
                                              classification_task(1, 2, 12, 12, 1), 0);
  const TaskInfo t2 = classification_task(2, 4, 12, 12, 1);
  const BranchRecord r = make_record(t2, g, 2, 0.65);
  CHECK(r.as_row().size() == 16);
  CHECK(r.features().size() == 15);
  CHECK(r.gn == 0.65);
  CHECK(r.as_row()[15] == 0.65);
  CHECK_THROWS_AS(make_record(t2, g, 2, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(make_record(t2, g, 2, -0.1), std::invalid_argument);
}

TEST_CASE("records csv round-trips exactly") {
  const ModelGraph g = ModelGraph::build_base(ilash::testing::small_conv_template(),
                                              classification_task(1, 2, 12, 12, 1), 0);
  const TaskInfo t2 = classification_task(2, 4, 12, 12, 1);
  std::vector<BranchRecord> records;
  records.push_back(make_record(t2, g, 1, 0.65));
  records.push_back(make_record(t2, g, 2, 1.0 / 3.0));
  records.push_back(make_record(t2, g, 3, 0.0));
  records.push_back(make_record(t2, g, 4, 0.123456789123456789));

  const std::string csv = records_to_csv(records);
  CHECK(csv.substr(0, csv.find('\n')) == std::string(kRecordsCsvHeader));
  const std::string rows = csv.substr(csv.find('\n') + 1);
  CHECK(rows.find('e') == std::string::npos);  // plain decimal only
  CHECK(rows.find('E') == std::string::npos);

  const auto back = records_from_csv(csv);
  REQUIRE(back.size() == records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(back[i].as_row() == records[i].as_row());
  }

  const auto path = std::filesystem::temp_directory_path() / "ilash_records_test.csv";
  write_records_csv(path, records);
  const auto from_file = read_records_csv(path);
  REQUIRE(from_file.size() == records.size());
  CHECK(from_file[1].gn == records[1].gn);
  std::filesystem::remove(path);
}

TEST_CASE("records csv rejects malformed input") {
  CHECK_THROWS_AS(records_from_csv(""), std::invalid_argument);
  CHECK_THROWS_AS(records_from_csv("a,b,c\n"), std::invalid_argument);
  const std::string short_row = std::string(kRecordsCsvHeader) + "\n1,2,3\n";
  CHECK_THROWS_AS(records_from_csv(short_row), std::invalid_argument);
  const std::string bad_number =
      std::string(kRecordsCsvHeader) + "\n1,0,2,8,8,1,-1,-1,-1,-1,-1,-1,-1,-1,-1,zap\n";
  CHECK_THROWS_AS(records_from_csv(bad_number), std::invalid_argument);
}

TEST_CASE("format_number stays in plain decimal") {
  CHECK(format_number(0.65) == "0.65");
  CHECK(format_number(3.0) == "3");
  CHECK(format_number(-1.0) == "-1");
  CHECK(format_number(0.0) == "0");
  CHECK(format_number(1e-9) == "0.000000001");
}
