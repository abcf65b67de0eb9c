#pragma once

// Item parameter records for the three model families handled here:
//
//   UIRT            D=1, one slope per item.
//   SimpleStructure D=2, MC items load on dimension 0, CR items on
//                   dimension 1, factors may correlate.
//   Bifactor        D=3, dimension 0 is the general factor, dimension 1 the
//                   MC-specific and dimension 2 the CR-specific factor, all
//                   orthogonal.
//
// Internally everything is slope/intercept: dichotomous items are 3PL with
// P = c + (1-c) * logistic(a·θ + d), polytomous items are generalized partial
// credit with category log-numerators Σ_{v<=k} (a·θ - δ_v). The classical
// UIRT difficulty b = -d/a and step parameters δ_v/a are views computed at
// report time, never stored.

#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace mirtlink {

using ThetaVector = std::vector<double>;

enum class ItemFormat { MC, CR };
enum class ModelFamily { UIRT, SimpleStructure, Bifactor };

inline int family_dim(ModelFamily f) {
  switch (f) {
    case ModelFamily::UIRT:
      return 1;
    case ModelFamily::SimpleStructure:
      return 2;
    case ModelFamily::Bifactor:
      return 3;
  }
  return 0;
}

std::string to_string(ItemFormat f);
std::string to_string(ModelFamily f);
ItemFormat item_format_from_string(const std::string& s);
ModelFamily model_family_from_string(const std::string& s);

// Dimensions an item of this format is allowed to load on.
std::vector<int> allowed_slope_dims(ModelFamily family, ItemFormat format);

struct DichotomousItem {
  std::string id;
  ItemFormat format = ItemFormat::MC;
  ModelFamily family = ModelFamily::UIRT;
  std::vector<double> a;  // slope vector, length family_dim(family)
  double d = 0.0;         // intercept
  double c = 0.0;         // lower asymptote, in [0, 1)
  bool anchor = false;
};

struct PolytomousItem {
  std::string id;
  ItemFormat format = ItemFormat::CR;
  ModelFamily family = ModelFamily::UIRT;
  std::vector<double> a;
  std::vector<double> deltas;  // K-1 step thresholds, reversals permitted
  bool anchor = false;
};

using Item = std::variant<DichotomousItem, PolytomousItem>;

inline const std::string& item_id(const Item& it) {
  return std::visit([](const auto& x) -> const std::string& { return x.id; }, it);
}
inline ItemFormat item_format(const Item& it) {
  return std::visit([](const auto& x) { return x.format; }, it);
}
inline ModelFamily item_family(const Item& it) {
  return std::visit([](const auto& x) { return x.family; }, it);
}
inline bool item_anchor(const Item& it) {
  return std::visit([](const auto& x) { return x.anchor; }, it);
}
inline const std::vector<double>& item_slopes(const Item& it) {
  return std::visit([](const auto& x) -> const std::vector<double>& { return x.a; }, it);
}
inline std::vector<double>& item_slopes(Item& it) {
  return std::visit([](auto& x) -> std::vector<double>& { return x.a; }, it);
}
inline bool is_dichotomous(const Item& it) {
  return std::holds_alternative<DichotomousItem>(it);
}
// Number of score categories: 2 for dichotomous, K for partial credit.
inline int n_categories(const Item& it) {
  if (const auto* p = std::get_if<PolytomousItem>(&it))
    return static_cast<int>(p->deltas.size()) + 1;
  return 2;
}
inline double item_max_score(const Item& it) { return n_categories(it) - 1.0; }

// Throws std::invalid_argument on any violated invariant. enforce_mask=false
// relaxes only the loading-pattern constraint; items produced by a coordinate
// transformation legitimately mix dimensions.
void validate_item(const Item& it, bool enforce_mask = true);

struct TestForm {
  std::string name;
  std::vector<Item> items;
};

// Nonempty, unique ids, one family throughout.
void validate_form(const TestForm& form);
int form_dim(const TestForm& form);
double max_total_score(const TestForm& form);
const Item* find_item(const TestForm& form, const std::string& id);

}  // namespace mirtlink
