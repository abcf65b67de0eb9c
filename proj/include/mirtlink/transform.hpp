#pragma once

#include <span>
#include <vector>

#include "mirtlink/items.hpp"
#include "mirtlink/small_linalg.hpp"

namespace mirtlink {

// Affine change of the latent scale, theta* = A.theta + B.  Items move the
// opposite way (a* = a.A^-1) so that model probabilities are unchanged.
struct Transform {
  Matrix A;
  std::vector<double> B;

  int dim() const { return static_cast<int>(B.size()); }
  static Transform identity(int dim);
};

void validate_transform(const Transform& tr);

ThetaVector transform_theta(const Transform& tr, const ThetaVector& theta);

// Single-item transform; recomputes A^-1 each call.  Prefer transform_items
// for whole forms.
Item transform_item(const Transform& tr, const Item& item);

std::vector<Item> transform_items(const Transform& tr, std::span<const Item> items);

struct Population {
  std::vector<double> mean;
  Matrix cov;

  int dim() const { return static_cast<int>(mean.size()); }
  static Population standard(int dim);
};

void validate_population(const Population& pop);

Population transform_population(const Transform& tr, const Population& pop);

}  // namespace mirtlink
