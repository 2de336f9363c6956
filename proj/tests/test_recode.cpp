#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "novex/errors.hpp"
#include "novex/recode.hpp"

namespace {

using novex::CentroidBuffer;
using novex::RecodeParams;

std::vector<double> pt(double x, double y) { return {x, y}; }

TEST(Recode, FirstObservationBecomesCentroid) {
  CentroidBuffer buffer(2);
  novex::Rng rng(0);
  const auto x = pt(1.0, -1.0);
  novex::recode_update(buffer, x, RecodeParams{}, rng);
  ASSERT_EQ(buffer.size(), 1u);
  EXPECT_EQ(buffer.positions[0][0], 1.0);
  EXPECT_EQ(buffer.weights[0], 1.0);
}

TEST(Recode, NearObservationMergesByRunningMean) {
  CentroidBuffer buffer(2);
  novex::Rng rng(0);
  RecodeParams params;
  params.decay = 0.5;
  const auto a = pt(0.0, 0.0);
  const auto b = pt(0.1, 0.0);
  novex::recode_update(buffer, a, params, rng);
  novex::recode_update(buffer, b, params, rng);
  ASSERT_EQ(buffer.size(), 1u);
  // weight decays to 0.5, then the centroid moves by 1 / 1.5 of the gap
  EXPECT_NEAR(buffer.positions[0][0], 0.1 / 1.5, 1e-15);
  EXPECT_DOUBLE_EQ(buffer.weights[0], 1.5);
}

TEST(Recode, FarObservationInsertsWhenDrawSucceeds) {
  CentroidBuffer buffer(2);
  novex::Rng rng(0);
  RecodeParams params;
  params.insertion_probability = 1.0;
  novex::recode_update(buffer, pt(0.0, 0.0), params, rng);
  novex::recode_update(buffer, pt(5.0, 0.0), params, rng);
  EXPECT_EQ(buffer.size(), 2u);
  params.insertion_probability = 0.0;
  novex::recode_update(buffer, pt(0.0, 9.0), params, rng);
  EXPECT_EQ(buffer.size(), 2u);
}

TEST(Recode, EvictsLightestAtCapacity) {
  CentroidBuffer buffer(2);
  novex::Rng rng(0);
  RecodeParams params;
  params.insertion_probability = 1.0;
  params.capacity = 2;
  params.decay = 1.0;
  novex::recode_update(buffer, pt(0.0, 0.0), params, rng);
  novex::recode_update(buffer, pt(0.0, 0.01), params, rng);  // merges, weight 2
  novex::recode_update(buffer, pt(10.0, 0.0), params, rng);
  novex::recode_update(buffer, pt(20.0, 0.0), params, rng);  // evicts the weight-1 centroid
  ASSERT_EQ(buffer.size(), 2u);
  EXPECT_DOUBLE_EQ(buffer.weights[0], 2.0);
  EXPECT_EQ(buffer.positions[1][0], 20.0);
}

TEST(Recode, WeightsStayPositiveAndCapacityHolds) {
  CentroidBuffer buffer(2);
  novex::Rng rng(4);
  RecodeParams params;
  params.capacity = 50;
  for (int i = 0; i < 20000; ++i) {
    const auto x = pt(novex::uniform(rng, -12.0, 12.0), novex::uniform(rng, -12.0, 12.0));
    novex::recode_update(buffer, x, params, rng);
    ASSERT_LE(buffer.size(), params.capacity);
  }
  for (const double w : buffer.weights) EXPECT_GT(w, 0.0);
}

TEST(Recode, LongRunCompressesIntoCapacity) {
  CentroidBuffer buffer(2);
  novex::Rng rng(9);
  const RecodeParams params;
  double x = 0.0;
  double y = 0.0;
  for (int i = 0; i < 100000; ++i) {
    x = std::clamp(x + novex::uniform(rng, -0.5, 0.5), -12.0, 12.0);
    y = std::clamp(y + novex::uniform(rng, -0.5, 0.5), -12.0, 12.0);
    novex::recode_update(buffer, pt(x, y), params, rng);
  }
  EXPECT_LE(buffer.size(), 6000u);
  EXPECT_GT(buffer.size(), 100u);
}

TEST(Recode, NearestCentroidTiesToLowestIndex) {
  CentroidBuffer buffer(2);
  buffer.positions.push_back(pt(1.0, 0.0));
  buffer.weights.push_back(1.0);
  buffer.positions.push_back(pt(-1.0, 0.0));
  buffer.weights.push_back(1.0);
  const auto n = novex::nearest_centroid(buffer, pt(0.0, 0.0));
  ASSERT_TRUE(n.has_value());
  EXPECT_EQ(n->index, 0u);
  EXPECT_DOUBLE_EQ(n->distance, 1.0);
  EXPECT_FALSE(novex::nearest_centroid(CentroidBuffer(2), pt(0.0, 0.0)).has_value());
}

TEST(Recode, RejectsDimensionMismatch) {
  CentroidBuffer buffer(3);
  novex::Rng rng(0);
  EXPECT_THROW(novex::recode_update(buffer, pt(0.0, 0.0), RecodeParams{}, rng),
               novex::ConfigError);
}

TEST(Recode, WritesCsv) {
  CentroidBuffer buffer(2);
  buffer.positions.push_back(pt(0.5, -0.25));
  buffer.weights.push_back(3.0);
  const auto path = std::filesystem::temp_directory_path() / "novex_centroids.csv";
  novex::write_centroids(buffer, path);
  std::ifstream in(path);
  std::string header;
  std::string row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header, "c0,c1,weight");
  EXPECT_EQ(row, "0.5,-0.25,3");
  std::filesystem::remove(path);
}

}  // namespace
