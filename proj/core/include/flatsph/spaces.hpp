#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace flatsph::spaces {

enum class CartanLabel { AI, AII, AIII, BDI, CII, FII };

// Restricted root system type; together with the rank this gives A1, BC1, C2, BC3, ...
enum class RootSystemType { A, BC, C, D };

enum class PointClass { Regular, TypeD, TypeA, Singular, Zero };

enum class Region { Ball, W1, W2, W21, W22, W3, W31, W32 };

std::string to_string(CartanLabel label);
std::string to_string(PointClass cls);
std::string to_string(Region region);
CartanLabel parse_cartan_label(const std::string& text);

class InvalidSpace : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidPoint : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Restricted-root data of a flat symmetric space.  For rank 1 only m1 (short
// root multiplicity) and m2 (double root) are used.  For the AIII family of
// rank p, m0 is the multiplicity of e_i +- e_j, m1 of e_i and m2 of 2 e_i.
struct RootDatum {
  RootSystemType type = RootSystemType::A;
  CartanLabel label = CartanLabel::AI;
  int rank = 1;
  std::optional<int> q;
  int m0 = 0;
  int m1 = 0;
  int m2 = 0;

  std::string family() const;
  // Rank 1: (m1 + m2 - 1) / 2.  AIII: q - p.
  double bessel_order() const;
  // AIII only: r = q - p.
  int r() const;
};

RootDatum rank1_datum(CartanLabel label, std::optional<int> q = std::nullopt);
RootDatum aiii_datum(int p, int q);

// Every rank-1 row and the AIII rows for p <= 3, q <= 8.
std::vector<RootDatum> root_table();
nlohmann::json to_json(const RootDatum& datum);
nlohmann::json dump_root_table();

// Point of the closed positive chamber x_1 >= ... >= x_p >= 0 with a class tag.
struct OrbitPoint {
  std::vector<double> coords;
  PointClass cls = PointClass::Zero;
  int rank() const { return static_cast<int>(coords.size()); }
};

// Sorts descending, snaps near-equal coordinates and near-zero coordinates
// (relative tolerance), and classifies.
OrbitPoint classify_point(std::span<const double> coords, double snap_tolerance = 1e-12);

// Point of the open chamber lambda_1 > ... > lambda_p > 0.
class ChamberPoint {
 public:
  explicit ChamberPoint(std::vector<double> coords);
  std::span<const double> coords() const { return coords_; }
  int rank() const { return static_cast<int>(coords_.size()); }
  double operator[](size_t i) const { return coords_[i]; }

 private:
  std::vector<double> coords_;
};

// Plancherel density up to a constant.  Rank 1: lambda^{m1 + m2}.
// AIII: prod_{i<j} (l_i^2 - l_j^2)^2 * prod_i l_i^{2r+1}.
double plancherel_density(const RootDatum& datum, std::span<const double> lambda);
double log_plancherel_density(const RootDatum& datum, std::span<const double> lambda);

inline constexpr double kDefaultRegionConstant = 4.0;

// 8 * max(1, 1 / min positive x_i).
double default_ball_radius(const OrbitPoint& x);

// Region of a chamber point.  Without c the p = 2 result is one of
// {Ball, W1, W2} and p = 3 one of {Ball, W1, W2, W3}; with c the last region
// is split at lambda_p = c.
Region chamber_region(std::span<const double> lambda, double ball_radius, std::optional<double> c = std::nullopt);

// Smallest power k for which the orbital measure is expected in L^1.
int l1_power_lookup(const RootDatum& datum, const OrbitPoint& x);

}  // namespace flatsph::spaces
