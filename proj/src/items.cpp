#include "mirtlink/items.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace mirtlink {

std::string to_string(ItemFormat f) { return f == ItemFormat::MC ? "MC" : "CR"; }

std::string to_string(ModelFamily f) {
  switch (f) {
    case ModelFamily::UIRT:
      return "UIRT";
    case ModelFamily::SimpleStructure:
      return "SimpleStructure";
    case ModelFamily::Bifactor:
      return "Bifactor";
  }
  return "?";
}

ItemFormat item_format_from_string(const std::string& s) {
  if (s == "MC") return ItemFormat::MC;
  if (s == "CR") return ItemFormat::CR;
  throw std::invalid_argument("unknown item format: " + s);
}

ModelFamily model_family_from_string(const std::string& s) {
  if (s == "UIRT" || s == "uirt") return ModelFamily::UIRT;
  if (s == "SimpleStructure" || s == "simple-structure" || s == "simple")
    return ModelFamily::SimpleStructure;
  if (s == "Bifactor" || s == "bifactor") return ModelFamily::Bifactor;
  throw std::invalid_argument("unknown model family: " + s);
}

std::vector<int> allowed_slope_dims(ModelFamily family, ItemFormat format) {
  switch (family) {
    case ModelFamily::UIRT:
      return {0};
    case ModelFamily::SimpleStructure:
      return {format == ItemFormat::MC ? 0 : 1};
    case ModelFamily::Bifactor:
      return {0, format == ItemFormat::MC ? 1 : 2};
  }
  return {};
}

namespace {

void check_slopes(const std::string& id, ModelFamily family, ItemFormat format,
                  const std::vector<double>& a, bool enforce_mask) {
  const int dim = family_dim(family);
  if (static_cast<int>(a.size()) != dim)
    throw std::invalid_argument("item " + id + ": slope vector length " +
                                std::to_string(a.size()) + " does not match " +
                                to_string(family) + " dimensionality " +
                                std::to_string(dim));
  for (double x : a)
    if (!std::isfinite(x))
      throw std::invalid_argument("item " + id + ": non-finite slope");
  if (!enforce_mask) return;
  const auto allowed = allowed_slope_dims(family, format);
  for (int k = 0; k < dim; ++k) {
    const bool ok = std::find(allowed.begin(), allowed.end(), k) != allowed.end();
    if (!ok && a[k] != 0.0)
      throw std::invalid_argument("item " + id + ": nonzero slope on dimension " +
                                  std::to_string(k + 1) + " violates the " +
                                  to_string(family) + " loading pattern for " +
                                  to_string(format) + " items");
  }
  if (family == ModelFamily::SimpleStructure && a[allowed[0]] == 0.0)
    throw std::invalid_argument("item " + id +
                                ": simple-structure items need a nonzero slope on "
                                "their format dimension");
}

}  // namespace

void validate_item(const Item& it, bool enforce_mask) {
  if (const auto* d = std::get_if<DichotomousItem>(&it)) {
    check_slopes(d->id, d->family, d->format, d->a, enforce_mask);
    if (!std::isfinite(d->d))
      throw std::invalid_argument("item " + d->id + ": non-finite intercept");
    if (!(d->c >= 0.0 && d->c < 1.0))
      throw std::invalid_argument("item " + d->id + ": guessing parameter " +
                                  std::to_string(d->c) + " outside [0, 1)");
  } else {
    const auto& p = std::get<PolytomousItem>(it);
    check_slopes(p.id, p.family, p.format, p.a, enforce_mask);
    if (p.deltas.empty())
      throw std::invalid_argument("item " + p.id + ": needs at least 2 categories");
    if (p.deltas.size() > 15)  // scoring kernels use fixed 16-slot buffers
      throw std::invalid_argument("item " + p.id + ": more than 16 categories");
    for (double x : p.deltas)
      if (!std::isfinite(x))
        throw std::invalid_argument("item " + p.id + ": non-finite threshold");
  }
}

void validate_form(const TestForm& form) {
  if (form.items.empty())
    throw std::invalid_argument("form " + form.name + ": empty item list");
  std::set<std::string> ids;
  const ModelFamily family = item_family(form.items.front());
  for (const auto& it : form.items) {
    validate_item(it);
    if (item_family(it) != family)
      throw std::invalid_argument("form " + form.name + ": mixed model families");
    if (!ids.insert(item_id(it)).second)
      throw std::invalid_argument("form " + form.name + ": duplicate item id " +
                                  item_id(it));
  }
}

int form_dim(const TestForm& form) {
  if (form.items.empty())
    throw std::invalid_argument("form " + form.name + ": empty item list");
  return family_dim(item_family(form.items.front()));
}

double max_total_score(const TestForm& form) {
  double total = 0.0;
  for (const auto& it : form.items) total += item_max_score(it);
  return total;
}

const Item* find_item(const TestForm& form, const std::string& id) {
  for (const auto& it : form.items)
    if (item_id(it) == id) return &it;
  return nullptr;
}

}  // namespace mirtlink
