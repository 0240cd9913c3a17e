#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "mmlsh/dataset.hpp"

namespace testing {

inline std::filesystem::path temp_path(const std::string& name) {
  std::filesystem::path dir = MMLSH_TEST_TMP;
  std::filesystem::create_directories(dir);
  return dir / name;
}

inline mmlsh::PointMatrix random_points(std::mt19937_64& rng, std::size_t rows, std::size_t dim,
                                        double scale = 1.0) {
  std::normal_distribution<float> nd(0.0f, static_cast<float>(scale));
  mmlsh::PointMatrix m(dim);
  std::vector<float> row(dim);
  for (std::size_t i = 0; i < rows; ++i) {
    for (auto& v : row) v = nd(rng);
    m.push_back(row);
  }
  return m;
}

/// Dataset whose object j holds the rows of objects[j], ids 0..S-1.
inline mmlsh::Dataset make_dataset(const std::vector<mmlsh::PointMatrix>& objects) {
  std::vector<mmlsh::FeatureVector> fv;
  const std::size_t dim = objects.front().dim();
  for (std::size_t j = 0; j < objects.size(); ++j) {
    for (std::size_t i = 0; i < objects[j].rows(); ++i) {
      auto r = objects[j].row(i);
      fv.push_back({static_cast<mmlsh::PointId>(fv.size()), static_cast<mmlsh::ObjectId>(j), {r.begin(), r.end()}});
    }
  }
  return mmlsh::Dataset(dim, fv);
}

}  // namespace testing
