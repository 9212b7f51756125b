#include "mareg/rng.hpp"

namespace mareg {

Matrix Rng::normal_matrix(Index rows, Index cols) {
  Matrix out(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) out(i, j) = normal();
  }
  return out;
}

}  // namespace mareg
