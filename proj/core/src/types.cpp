#include "cullsac/types.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace cullsac {

void validate(const Correspondence& c) {
  if (!c.p.allFinite() || !c.q.allFinite()) {
    throw std::invalid_argument("correspondence has a non-finite coordinate");
  }
  if (c.score && !(*c.score >= 0.0 && *c.score <= 1.0)) {
    throw std::invalid_argument("correspondence score outside [0,1]");
  }
}

ModelFamily family_of(const Model& model) {
  return static_cast<ModelFamily>(model.index());
}

std::string_view to_string(ModelFamily family) {
  switch (family) {
    case ModelFamily::homography: return "h";
    case ModelFamily::fundamental: return "f";
    case ModelFamily::essential: return "e";
    case ModelFamily::radial_homography: return "rh";
  }
  return "?";
}

ModelFamily parse_family(std::string_view text) {
  if (text == "h" || text == "homography") return ModelFamily::homography;
  if (text == "f" || text == "fundamental") return ModelFamily::fundamental;
  if (text == "e" || text == "essential") return ModelFamily::essential;
  if (text == "rh" || text == "radial" || text == "radial_homography")
    return ModelFamily::radial_homography;
  throw std::invalid_argument("unknown model family '" + std::string(text) + "'");
}

std::size_t sample_size(ModelFamily family) {
  switch (family) {
    case ModelFamily::homography: return 4;
    case ModelFamily::fundamental: return 7;
    case ModelFamily::essential: return 8;
    case ModelFamily::radial_homography: return 4;
  }
  return 0;
}

bool is_better(const Score& a, const Score& b, Scoring scoring) {
  if (scoring == Scoring::ransac) return a.inlier_count > b.inlier_count;
  if (a.loss != b.loss) return a.loss < b.loss;
  return a.inlier_count > b.inlier_count;
}

}  // namespace cullsac
