#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <json.hpp>

#include "fdvae/numerics/tensor.hpp"

namespace fdvae {

// Ground-truth columns only a simulator can provide.
struct HiddenColumns {
  num::Tensor z_fd;  // n x d_zfd
  std::vector<double> u;
  std::vector<double> w1;
  std::vector<double> w2;
  std::vector<double> w_y;  // empty unless the generator included W_Y
  std::vector<double> w_e;  // empty unless the generator included W_E
};

struct Dataset {
  num::Tensor x;  // n x d_x proxies
  std::vector<double> t;
  std::vector<double> y;
  std::optional<HiddenColumns> hidden;
  std::optional<double> true_ate;
  nlohmann::json provenance = nlohmann::json::object();

  std::size_t n() const noexcept { return t.size(); }
  std::size_t d_x() const noexcept { return x.cols(); }

  // Shape agreement, binary t, finite entries. Throws DataError.
  void validate() const;
};

}  // namespace fdvae
