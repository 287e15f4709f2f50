#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "scorelab/dataset.hpp"
#include "scorelab/errors.hpp"
#include "test_helpers.hpp"

using namespace scorelab;
using testutil::vec1;
using testutil::vec2;

TEST_CASE("dataset construction and validation") {
  CHECK_THROWS_AS(Dataset(std::vector<Eigen::VectorXd>{}), InvalidDatasetError);
  CHECK_THROWS_AS(Dataset({vec2(0, 0), vec1(1)}), InvalidDatasetError);
  CHECK_THROWS_AS(Dataset({vec2(0, 0)}, {vec1(1), vec1(2)}), InvalidDatasetError);

  const Dataset d({vec2(1, 0), vec2(-1, 0), vec2(1, 0)});
  CHECK(d.size() == 3);
  CHECK(d.dim() == 2);
  CHECK_FALSE(d.distinct());
  CHECK(testutil::symmetric2().distinct());
}

TEST_CASE("observation groups use exact equality") {
  const Dataset d({vec2(0, 0), vec2(1, 1), vec2(2, 2), vec2(3, 3)},
                  {vec1(5), vec1(7), vec1(5), vec1(7)});
  CHECK(d.group_indices(vec1(5)) == std::vector<int>{0, 2});
  CHECK(d.group_indices(vec1(7)) == std::vector<int>{1, 3});
  CHECK(d.group_indices(vec1(5.0000001)).empty());

  const Dataset sub = d.subset({1, 3});
  CHECK(sub.size() == 2);
  CHECK(sub.point(0) == vec2(1, 1));
}

TEST_CASE("dataset file round trip") {
  namespace fs = std::filesystem;
  const fs::path path = fs::temp_directory_path() / "scorelab_test_dataset.txt";

  const Dataset d({vec2(0.25, -1.5e-7), vec2(3.14159, 2.0)}, {vec1(1), vec1(2)});
  d.save(path.string());
  const Dataset back = Dataset::load(path.string());
  CHECK(back.size() == d.size());
  CHECK(back.obs_dim() == 1);
  for (int n = 0; n < d.size(); ++n) {
    CHECK(back.point(n) == d.point(n));  // %.17g round-trips doubles exactly
    CHECK(back.observation(n) == d.observation(n));
  }
  fs::remove(path);

  CHECK_THROWS_AS(Dataset::load("/nonexistent/scorelab.txt"), InvalidDatasetError);
}
