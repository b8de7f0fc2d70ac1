#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace flatsph::haarmc {

enum class SpaceKind { AI, AIII };

struct SpaceSpec {
  SpaceKind kind = SpaceKind::AI;
  int p = 1;
  int q = 1;
  int rank() const { return kind == SpaceKind::AI ? 1 : p; }
};

std::string to_string(const SpaceSpec& space);
SpaceSpec ai_space();
SpaceSpec aiii_space(int p, int q);

class UnsupportedSpace : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr int kMaxUnitaryDim = 64;

// Haar unitary: QR of a complex Gaussian matrix with the phases of diag(R)
// moved into Q.
Eigen::MatrixXcd haar_unitary(int n, std::mt19937_64& rng);
Eigen::MatrixXcd haar_unitary(int n, std::uint64_t seed);

enum class Sampler {
  // u, v independent Haar on U(p) x U(q).
  FullUnitary,
  // (u, v) Haar on S(U(p) x U(q)).
  DeterminantConstrained,
};

// N draws of sum_i Ad(k_i) H_i.  `chamber` holds the projection to the closed
// chamber (orbit radius for AI, descending singular values for AIII) and
// `pairing` the coordinates paired with a spectral vector (first plane
// coordinate for AI, Re Y_jj for AIII); both are row-major N x rank.
struct OrbitSampleSet {
  SpaceSpec space;
  std::vector<std::vector<double>> factors;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  std::vector<double> chamber;
  std::vector<double> pairing;

  std::span<const double> chamber_row(std::size_t i) const;
  std::span<const double> pairing_row(std::size_t i) const;
};

OrbitSampleSet sample_orbit_sum(const SpaceSpec& space, const std::vector<std::vector<double>>& factors,
                                std::size_t n, std::uint64_t seed, Sampler sampler = Sampler::FullUnitary);

inline constexpr std::size_t kMinTransformSamples = 10000;

struct TransformEstimate {
  std::complex<double> value;
  // sqrt(Var Re + Var Im) / sqrt(N)
  double std_error = 0.0;
  // std_error above 10% of |value|.
  bool flagged = false;
};

// Mean of exp(i s <Lambda, Y>) over the sample set.  Any real lambda is accepted.
TransformEstimate empirical_transform(const OrbitSampleSet& set, double scale, std::span<const double> lambda);

// Normalized spherical function of one factor, and the product over factors.
double factor_kernel(const SpaceSpec& space, std::span<const double> factor, std::span<const double> lambda);
double predicted_transform(const SpaceSpec& space, const std::vector<std::vector<double>>& factors,
                           std::span<const double> lambda);

struct CalibrationScale {
  double s = 1.0;
  // max over grid points of |empirical - kernel| / stderr at the fitted s.
  double max_residual_sigma = 0.0;
  std::vector<double> residual_sigma;
};

class CalibrationError : public std::runtime_error {
 public:
  CalibrationError(const std::string& what, CalibrationScale fit) : std::runtime_error(what), fit_(std::move(fit)) {}
  const CalibrationScale& fit() const { return fit_; }

 private:
  CalibrationScale fit_;
};

// Fits s on a one-factor sample set by least squares against the kernel of
// that factor.  Throws CalibrationError when a residual exceeds 3 stderr.
CalibrationScale calibrate_scale(const OrbitSampleSet& single_factor, const std::vector<std::vector<double>>& grid);

struct ProductRow {
  std::vector<double> lambda;
  std::complex<double> empirical;
  double std_error = 0.0;
  double predicted = 0.0;
  bool pass = false;
};

struct ProductReport {
  std::vector<ProductRow> rows;
  bool passed = true;
  std::vector<std::size_t> failures;
};

ProductReport validate_product_formula(const OrbitSampleSet& set, const std::vector<std::vector<double>>& grid,
                                       double scale);

// 20 points along a ray of the closed chamber, spanning the first few oscillations.
std::vector<std::vector<double>> default_grid(const SpaceSpec& space, int points = 20);

}  // namespace flatsph::haarmc
