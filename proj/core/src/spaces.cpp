#include "flatsph/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace flatsph::spaces {

std::string to_string(CartanLabel label) {
  switch (label) {
    case CartanLabel::AI: return "AI";
    case CartanLabel::AII: return "AII";
    case CartanLabel::AIII: return "AIII";
    case CartanLabel::BDI: return "BDI";
    case CartanLabel::CII: return "CII";
    case CartanLabel::FII: return "FII";
  }
  return "?";
}

std::string to_string(PointClass cls) {
  switch (cls) {
    case PointClass::Regular: return "Regular";
    case PointClass::TypeD: return "TypeD";
    case PointClass::TypeA: return "TypeA";
    case PointClass::Singular: return "Singular";
    case PointClass::Zero: return "Zero";
  }
  return "?";
}

std::string to_string(Region region) {
  switch (region) {
    case Region::Ball: return "Ball";
    case Region::W1: return "W1";
    case Region::W2: return "W2";
    case Region::W21: return "W21";
    case Region::W22: return "W22";
    case Region::W3: return "W3";
    case Region::W31: return "W31";
    case Region::W32: return "W32";
  }
  return "?";
}

CartanLabel parse_cartan_label(const std::string& text) {
  for (auto label : {CartanLabel::AI, CartanLabel::AII, CartanLabel::AIII, CartanLabel::BDI, CartanLabel::CII,
                     CartanLabel::FII}) {
    if (to_string(label) == text) return label;
  }
  throw InvalidSpace("unknown Cartan label '" + text + "'");
}

std::string RootDatum::family() const {
  std::string name;
  switch (type) {
    case RootSystemType::A: name = "A"; break;
    case RootSystemType::BC: name = "BC"; break;
    case RootSystemType::C: name = "C"; break;
    case RootSystemType::D: name = "D"; break;
  }
  return name + std::to_string(rank);
}

double RootDatum::bessel_order() const {
  if (rank == 1) return 0.5 * (m1 + m2 - 1);
  return r();
}

int RootDatum::r() const {
  if (label != CartanLabel::AIII || !q) throw InvalidSpace("r = q - p is only defined for AIII");
  return *q - rank;
}

RootDatum rank1_datum(CartanLabel label, std::optional<int> q) {
  RootDatum d;
  d.rank = 1;
  d.label = label;
  auto need_q = [&](int lo) {
    if (!q || *q < lo) throw InvalidSpace(to_string(label) + " needs q >= " + std::to_string(lo));
    d.q = q;
    return *q;
  };
  switch (label) {
    case CartanLabel::AI: d.m1 = 1; break;
    case CartanLabel::AII: d.m1 = 4; break;
    case CartanLabel::AIII: {
      const int qq = need_q(2);
      d.m1 = 2 * (qq - 1);
      d.m2 = 1;
      break;
    }
    case CartanLabel::BDI: {
      const int qq = need_q(2);
      if (qq == 2) return rank1_datum(CartanLabel::AI);
      d.m1 = qq - 1;
      break;
    }
    case CartanLabel::CII: {
      const int qq = need_q(2);
      d.m1 = 4 * (qq - 1);
      d.m2 = 3;
      break;
    }
    case CartanLabel::FII: d.m1 = 8; d.m2 = 7; break;
  }
  d.type = d.m2 == 0 ? RootSystemType::A : RootSystemType::BC;
  return d;
}

RootDatum aiii_datum(int p, int q) {
  if (p < 1 || p > 3) throw InvalidSpace("AIII rank must be 1, 2 or 3");
  if (q < p || q > 8) throw InvalidSpace("AIII needs p <= q <= 8");
  RootDatum d;
  d.label = CartanLabel::AIII;
  d.rank = p;
  d.q = q;
  d.m0 = p > 1 ? 2 : 0;
  d.m1 = 2 * (q - p);
  d.m2 = 1;
  d.type = (q == p && p > 1) ? RootSystemType::C : RootSystemType::BC;
  return d;
}

std::vector<RootDatum> root_table() {
  std::vector<RootDatum> rows;
  rows.push_back(rank1_datum(CartanLabel::AI));
  rows.push_back(rank1_datum(CartanLabel::AII));
  for (int q = 2; q <= 8; ++q) rows.push_back(rank1_datum(CartanLabel::AIII, q));
  for (int q = 3; q <= 8; ++q) rows.push_back(rank1_datum(CartanLabel::BDI, q));
  for (int q = 2; q <= 8; ++q) rows.push_back(rank1_datum(CartanLabel::CII, q));
  rows.push_back(rank1_datum(CartanLabel::FII));
  for (int p = 2; p <= 3; ++p) {
    for (int q = p; q <= 8; ++q) rows.push_back(aiii_datum(p, q));
  }
  return rows;
}

nlohmann::json to_json(const RootDatum& d) {
  nlohmann::json j;
  j["label"] = to_string(d.label);
  j["family"] = d.family();
  j["rank"] = d.rank;
  j["q"] = d.q ? nlohmann::json(*d.q) : nlohmann::json(nullptr);
  j["m0"] = d.m0;
  j["m1"] = d.m1;
  j["m2"] = d.m2;
  j["bessel_order"] = d.bessel_order();
  return j;
}

nlohmann::json dump_root_table() {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& d : root_table()) out.push_back(to_json(d));
  return out;
}

OrbitPoint classify_point(std::span<const double> coords, double snap_tolerance) {
  if (coords.empty()) throw InvalidPoint("orbit point needs at least one coordinate");
  std::vector<double> x(coords.begin(), coords.end());
  for (double v : x) {
    if (!std::isfinite(v) || v < 0.0) throw InvalidPoint("orbit point coordinates must be finite and non-negative");
  }
  std::sort(x.begin(), x.end(), std::greater<>());
  OrbitPoint out;
  const double scale = x.front();
  if (scale == 0.0) {
    out.coords = std::move(x);
    out.cls = PointClass::Zero;
    return out;
  }
  const double tol = snap_tolerance * scale;
  for (size_t i = 1; i < x.size(); ++i) {
    if (x[i - 1] - x[i] <= tol) x[i] = x[i - 1];
  }
  for (double& v : x) {
    if (v <= tol) v = 0.0;
  }
  bool distinct = true;
  for (size_t i = 1; i < x.size(); ++i) distinct = distinct && x[i] < x[i - 1];
  const bool positive = x.back() > 0.0;
  out.coords = x;
  if (distinct && positive) {
    out.cls = PointClass::Regular;
  } else if (x.size() == 2 && x[0] == x[1]) {
    out.cls = PointClass::TypeD;
  } else if (x.size() == 2 && x[1] == 0.0) {
    out.cls = PointClass::TypeA;
  } else {
    out.cls = PointClass::Singular;
  }
  return out;
}

ChamberPoint::ChamberPoint(std::vector<double> coords) : coords_(std::move(coords)) {
  if (coords_.empty()) throw InvalidPoint("chamber point needs at least one coordinate");
  for (size_t i = 0; i < coords_.size(); ++i) {
    if (!std::isfinite(coords_[i])) throw InvalidPoint("chamber point coordinates must be finite");
    if (i > 0 && !(coords_[i] < coords_[i - 1])) throw InvalidPoint("chamber point must be strictly decreasing");
  }
  if (!(coords_.back() > 0.0)) throw InvalidPoint("chamber point must have positive coordinates");
}

double log_plancherel_density(const RootDatum& datum, std::span<const double> lambda) {
  if (static_cast<int>(lambda.size()) != datum.rank) throw InvalidPoint("lambda rank does not match the datum");
  double acc = 0.0;
  const int lin = datum.m1 + datum.m2;
  for (size_t i = 0; i < lambda.size(); ++i) {
    const double li = std::abs(lambda[i]);
    if (lin > 0) acc += lin * std::log(li);
    for (size_t j = i + 1; j < lambda.size(); ++j) {
      const double d = std::abs(lambda[i] * lambda[i] - lambda[j] * lambda[j]);
      if (datum.m0 > 0) acc += datum.m0 * std::log(d);
    }
  }
  return acc;
}

double plancherel_density(const RootDatum& datum, std::span<const double> lambda) {
  if (static_cast<int>(lambda.size()) != datum.rank) throw InvalidPoint("lambda rank does not match the datum");
  double acc = 1.0;
  const int lin = datum.m1 + datum.m2;
  for (size_t i = 0; i < lambda.size(); ++i) {
    acc *= std::pow(std::abs(lambda[i]), lin);
    for (size_t j = i + 1; j < lambda.size(); ++j) {
      acc *= std::pow(std::abs(lambda[i] * lambda[i] - lambda[j] * lambda[j]), datum.m0);
    }
  }
  return acc;
}

double default_ball_radius(const OrbitPoint& x) {
  double min_pos = std::numeric_limits<double>::infinity();
  for (double v : x.coords) {
    if (v > 0.0) min_pos = std::min(min_pos, v);
  }
  if (!std::isfinite(min_pos)) return 8.0;
  return 8.0 * std::max(1.0, 1.0 / min_pos);
}

Region chamber_region(std::span<const double> lambda, double ball_radius, std::optional<double> c) {
  const size_t p = lambda.size();
  if (p != 2 && p != 3) throw InvalidPoint("chamber regions are defined for p = 2 and p = 3");
  double norm2 = 0.0;
  for (double v : lambda) norm2 += v * v;
  if (std::sqrt(norm2) < ball_radius) return Region::Ball;
  const double half = 0.5 * lambda[0];
  if (p == 2) {
    if (lambda[1] >= half) return Region::W1;
    if (!c) return Region::W2;
    return lambda[1] > *c ? Region::W21 : Region::W22;
  }
  if (lambda[2] >= half) return Region::W1;
  if (lambda[1] >= half) return Region::W2;
  if (!c) return Region::W3;
  return lambda[2] > *c ? Region::W31 : Region::W32;
}

int l1_power_lookup(const RootDatum& datum, const OrbitPoint& x) {
  if (x.cls == PointClass::Zero) throw InvalidPoint("the zero point carries a point mass; no L^1 power exists");
  if (x.rank() != datum.rank) throw InvalidPoint("point rank does not match the datum");
  if (x.cls == PointClass::Regular || datum.rank == 1) return 2;
  const bool plus_one = datum.type == RootSystemType::A || (datum.type == RootSystemType::D && datum.rank == 3);
  return plus_one ? datum.rank + 1 : datum.rank;
}

}  // namespace flatsph::spaces
