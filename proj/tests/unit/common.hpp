#pragma once

#include <filesystem>
#include <string>

#include "smilecal/market_data.hpp"

namespace testdata {

inline std::filesystem::path root() { return SMILECAL_SOURCE_DIR; }
inline std::filesystem::path data(const std::string& name) { return root() / "data" / name; }
inline std::filesystem::path fixture(const std::string& name) { return root() / "tests" / "fixtures" / name; }

inline const smilecal::DiscountCurve& curve() {
  static const auto c = smilecal::load_discount_curve(data("curve.csv"));
  return c;
}

inline const smilecal::SmileSurface& caplets() {
  static const auto s = smilecal::load_smile_surface(data("caplet_smiles.csv"), smilecal::SmileKind::caplet);
  return s;
}

inline const smilecal::SmileSurface& swaptions() {
  static const auto s = smilecal::load_smile_surface(data("swaption_smiles.csv"), smilecal::SmileKind::swaption);
  return s;
}

inline const smilecal::TenorStructure& tenor() {
  static const auto t = smilecal::tenor_from_caplets(curve(), caplets());
  return t;
}

}  // namespace testdata
