#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include "avs/core/checkpoint.hpp"
#include "avs/core/nn.hpp"
#include "avs/core/tensor.hpp"
#include "avs/core/tensor_io.hpp"

using namespace avs;

TEST(Tensor, ShapeAndIndexing) {
  Tensor<float> t({2, 3, 4});
  EXPECT_EQ(t.size(), 24u);
  EXPECT_EQ(t.dim(-1), 4);
  t.at(1, 2, 3) = 5.0f;
  EXPECT_EQ(t[23], 5.0f);
  EXPECT_THROW(t.at(2, 0, 0), std::out_of_range);
  EXPECT_THROW(t.reshape({5, 5}), std::invalid_argument);
  EXPECT_THROW(Tensor<float>({2, 0}), std::invalid_argument);
  EXPECT_THROW(Tensor<float>({2, 2}, std::vector<float>(3)), std::invalid_argument);
}

TEST(TensorIo, HeaderLayoutIsBitExact) {
  Tensor<float> t({2, 1}, {1.0f, -2.0f});
  std::ostringstream os;
  write_avst(os, t);
  const std::string bytes = os.str();
  ASSERT_EQ(bytes.size(), 4u + 1 + 1 + 2 * 4 + 2 * 4);
  EXPECT_EQ(bytes.substr(0, 4), "AVST");
  EXPECT_EQ(bytes[4], 0);  // f32
  EXPECT_EQ(bytes[5], 2);  // rank
  EXPECT_EQ(static_cast<unsigned char>(bytes[6]), 2u);
  EXPECT_EQ(bytes[7], 0);
  EXPECT_EQ(static_cast<unsigned char>(bytes[10]), 1u);
  // 1.0f little endian = 00 00 80 3f
  EXPECT_EQ(static_cast<unsigned char>(bytes[17]), 0x3fu);
  EXPECT_EQ(static_cast<unsigned char>(bytes[16]), 0x80u);
}

TEST(TensorIo, RoundTripRandomShapes) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> rank_dist(1, 4), dim_dist(1, 5);
  std::normal_distribution<double> val(0.0, 10.0);
  for (int trial = 0; trial < 50; ++trial) {
    Shape shape(static_cast<std::size_t>(rank_dist(rng)));
    for (auto& d : shape) d = dim_dist(rng);
    Tensor<double> t(shape);
    for (auto& v : t.values()) v = val(rng);
    std::stringstream ss;
    write_avst(ss, t);
    EXPECT_EQ(read_avst<double>(ss), t);
  }
}

TEST(TensorIo, ReadsF32IntoF64AndRejectsGarbage) {
  Tensor<float> t({3}, {0.5f, 1.25f, -4.0f});
  std::stringstream ss;
  write_avst(ss, t);
  const auto d = read_avst<double>(ss);
  EXPECT_EQ(d.shape(), Shape{3});
  EXPECT_DOUBLE_EQ(d[1], 1.25);

  std::stringstream bad("XXXX\x00\x01");
  EXPECT_THROW(read_avst<float>(bad), std::runtime_error);
  std::stringstream truncated(std::string("AVST\x00\x01\x05\x00\x00\x00", 10));
  EXPECT_THROW(read_avst<float>(truncated), std::runtime_error);
}

TEST(Checkpoint, SaveLoadRestoresValuesAndHyperparameters) {
  const auto dir = std::filesystem::temp_directory_path() / "avs_ckpt_test";
  std::filesystem::remove_all(dir);
  nn::Rng rng(1);
  nn::Conv2d<float> a("enc.conv0", 3, 4, 3, 1, rng);
  nn::ParamList<float> params;
  a.collect(params);
  save_checkpoint(dir, params, {{"width", "4"}});

  nn::Rng other(2);
  nn::Conv2d<float> b("enc.conv0", 3, 4, 3, 1, other);
  nn::ParamList<float> loaded;
  b.collect(loaded);
  const auto hyper = load_checkpoint(dir, loaded);
  EXPECT_EQ(hyper.at("width"), "4");
  EXPECT_EQ(b.weight().value, a.weight().value);

  nn::Conv2d<float> wrong("enc.conv0", 3, 5, 3, 1, other);
  nn::ParamList<float> wrong_params;
  wrong.collect(wrong_params);
  EXPECT_THROW(load_checkpoint(dir, wrong_params), std::runtime_error);
  std::filesystem::remove_all(dir);
}
