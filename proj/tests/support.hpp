#pragma once

// Random fixtures shared across the test files.

#include <string>
#include <vector>

#include "mirtlink/items.hpp"
#include "mirtlink/rng.hpp"
#include "mirtlink/small_linalg.hpp"
#include "mirtlink/transform.hpp"

namespace support {

using namespace mirtlink;

inline Item random_item(RandomStream& rng, ModelFamily family, ItemFormat format,
                        const std::string& id, bool anchor = false) {
  const int dim = family_dim(family);
  std::vector<double> a(dim, 0.0);
  for (int k : allowed_slope_dims(family, format)) a[k] = std::exp(rng.normal(0.0, 0.35));
  if (format == ItemFormat::MC) {
    DichotomousItem it;
    it.id = id;
    it.format = format;
    it.family = family;
    it.a = a;
    it.d = rng.normal(0.0, 1.0);
    it.c = rng.uniform(0.05, 0.3);
    it.anchor = anchor;
    return it;
  }
  PolytomousItem it;
  it.id = id;
  it.format = format;
  it.family = family;
  it.a = a;
  const int ncat = 3 + static_cast<int>(rng.uniform() * 3.0);  // 3..5 categories
  for (int v = 0; v + 1 < ncat; ++v) it.deltas.push_back(rng.normal(0.0, 0.8));
  it.anchor = anchor;
  return it;
}

inline TestForm random_form(RandomStream& rng, ModelFamily family, int n_mc, int n_cr,
                            bool all_anchor = true, const std::string& name = "form") {
  TestForm form;
  form.name = name;
  for (int j = 0; j < n_mc; ++j)
    form.items.push_back(random_item(rng, family, ItemFormat::MC,
                                     "mc" + std::to_string(j + 1), all_anchor));
  for (int j = 0; j < n_cr; ++j)
    form.items.push_back(random_item(rng, family, ItemFormat::CR,
                                     "cr" + std::to_string(j + 1), all_anchor));
  return form;
}

// Diagonally dominant random transform; condition number stays modest so
// recovery tolerances are meaningful.
inline Transform random_transform(RandomStream& rng, int dim) {
  Transform tr;
  tr.A = Matrix(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      tr.A(i, j) = i == j ? rng.uniform(0.7, 1.4) : rng.uniform(-0.15, 0.15);
  tr.B.resize(dim);
  for (int i = 0; i < dim; ++i) tr.B[i] = rng.uniform(-0.5, 0.5);
  return tr;
}

inline ThetaVector random_theta(RandomStream& rng, int dim, double halfwidth = 3.0) {
  ThetaVector th(dim);
  for (int k = 0; k < dim; ++k) th[k] = rng.uniform(-halfwidth, halfwidth);
  return th;
}

}  // namespace support
