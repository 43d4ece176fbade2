#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <random>

#include "okl/model_io.hpp"
#include "support/test_utils.hpp"

using namespace okl;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("okl_io_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("scalar-input model round trip preserves everything") {
  std::mt19937_64 rng(701);
  OklModel model;
  model.factors = {okl::testing::random_matrix(5, 2, rng), okl::testing::random_matrix(3, 2, rng)};
  model.lambda = 0.0123456789012345;
  model.p = 2;
  model.jitter = 3.5e-11;
  model.kernel.variant = KernelVariant::exp_covariance;
  model.kernel.decay = 7.25;
  model.seed = 424242;
  model.kind = ModelKind::okl;
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int i = 0; i < 5; ++i) model.train_inputs.emplace_back(unit(rng));

  TempDir tmp;
  const std::string dir = (tmp.path / "model").string();
  save_model(model, dir);
  const OklModel back = load_model(dir);

  CHECK((back.factors.A - model.factors.A).norm() == 0.0);  // %.17e is lossless for doubles
  CHECK((back.factors.B - model.factors.B).norm() == 0.0);
  CHECK(back.lambda == model.lambda);
  CHECK(back.p == model.p);
  CHECK(back.jitter == model.jitter);
  CHECK(back.kernel.variant == model.kernel.variant);
  CHECK(back.kernel.decay == model.kernel.decay);
  CHECK(back.seed == model.seed);
  CHECK(back.kind == model.kind);
  REQUIRE(back.train_inputs.size() == model.train_inputs.size());
  for (size_t i = 0; i < model.train_inputs.size(); ++i)
    CHECK(std::get<double>(back.train_inputs[i]) == std::get<double>(model.train_inputs[i]));
}

TEST_CASE("item-input model round trip preserves ids and genre flags") {
  std::mt19937_64 rng(709);
  OklModel model;
  model.factors = {okl::testing::random_matrix(3, 1, rng), okl::testing::random_matrix(4, 1, rng)};
  model.lambda = 0.5;
  model.p = 1;
  model.kernel.variant = KernelVariant::id_plus_genre;
  model.kind = ModelKind::rmf;
  std::uniform_int_distribution<int> bit(0, 1);
  for (int i = 0; i < 3; ++i) {
    ItemPoint item;
    item.id = 100 + i;
    for (int g = 0; g < 19; ++g) item.genres.push_back(static_cast<uint8_t>(bit(rng)));
    model.train_inputs.emplace_back(std::move(item));
  }

  TempDir tmp;
  const std::string dir = (tmp.path / "model").string();
  save_model(model, dir);
  const OklModel back = load_model(dir);

  REQUIRE(back.train_inputs.size() == 3);
  for (size_t i = 0; i < 3; ++i) {
    const auto& orig = std::get<ItemPoint>(model.train_inputs[i]);
    const auto& restored = std::get<ItemPoint>(back.train_inputs[i]);
    CHECK(restored.id == orig.id);
    CHECK(restored.genres == orig.genres);
  }
  CHECK(back.kind == ModelKind::rmf);
}

TEST_CASE("a saved model predicts identically after reload") {
  std::mt19937_64 rng(719);
  OklModel model;
  model.factors = {okl::testing::random_matrix(4, 2, rng), okl::testing::random_matrix(3, 2, rng)};
  model.lambda = 0.2;
  model.p = 2;
  model.kernel.variant = KernelVariant::linear_spline;
  model.train_inputs = {0.0, 0.5, 1.0, 2.0};

  TempDir tmp;
  const std::string dir = (tmp.path / "model").string();
  save_model(model, dir);
  const OklModel back = load_model(dir);
  const std::vector<InputPoint> probes = {0.25, 0.75, 3.0};
  CHECK((predict_matrix(back, probes) - predict_matrix(model, probes)).norm() == 0.0);
}

TEST_CASE("missing metadata raises ModelFormatError") {
  TempDir tmp;
  const std::string dir = (tmp.path / "not_a_model").string();
  std::filesystem::create_directories(dir);
  CHECK_THROWS_AS(load_model(dir), ModelFormatError);
}

TEST_CASE("truncated factor tables raise ModelFormatError") {
  std::mt19937_64 rng(727);
  OklModel model;
  model.factors = {okl::testing::random_matrix(4, 2, rng), okl::testing::random_matrix(3, 2, rng)};
  model.lambda = 0.2;
  model.p = 2;
  model.kernel.variant = KernelVariant::kronecker_delta;
  model.train_inputs = {0.0, 1.0, 2.0, 3.0};

  TempDir tmp;
  const std::string dir = (tmp.path / "model").string();
  save_model(model, dir);
  std::filesystem::resize_file(std::filesystem::path(dir) / "A.txt", 10);
  CHECK_THROWS_AS(load_model(dir), ModelFormatError);
}
