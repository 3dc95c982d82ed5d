#include "fdvae/dataset.hpp"

#include <cmath>
#include <string>

#include "fdvae/error.hpp"

namespace fdvae {

namespace {
void require_finite(std::span<const double> v, const char* what) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) throw DataError(std::string("dataset: non-finite value in ") + what + " at index " + std::to_string(i));
  }
}
}  // namespace

void Dataset::validate() const {
  const std::size_t n = t.size();
  if (n == 0) throw DataError("dataset: no rows");
  if (y.size() != n || x.rows() != n) {
    throw DataError("dataset: column lengths disagree (t " + std::to_string(n) + ", y " + std::to_string(y.size()) +
                    ", x " + std::to_string(x.rows()) + ")");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (t[i] != 0.0 && t[i] != 1.0) throw DataError("dataset: treatment at row " + std::to_string(i) + " is not 0/1");
  }
  require_finite(x.values(), "x");
  require_finite(y, "y");
  if (hidden) {
    if (hidden->z_fd.rows() != n || hidden->u.size() != n || hidden->w1.size() != n || hidden->w2.size() != n) {
      throw DataError("dataset: hidden columns do not match the row count");
    }
    require_finite(hidden->z_fd.values(), "z_fd");
  }
  if (true_ate && !std::isfinite(*true_ate)) throw DataError("dataset: true ATE is not finite");
}

}  // namespace fdvae
