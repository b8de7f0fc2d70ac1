#include "flatsph/haarmc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "flatsph/kernels.hpp"
#include "flatsph/stats.hpp"

namespace flatsph::haarmc {

namespace {

constexpr std::size_t kChunk = 4096;

double uniform01(std::mt19937_64& rng) { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; }

Eigen::MatrixXcd special_unitary(int n, std::mt19937_64& rng) {
  Eigen::MatrixXcd w = haar_unitary(n, rng);
  const std::complex<double> det = w.determinant();
  return w * std::polar(1.0, -std::arg(det) / n);
}

void check_factors(const SpaceSpec& space, const std::vector<std::vector<double>>& factors) {
  if (factors.empty()) throw std::invalid_argument("orbit sum needs at least one factor");
  for (const auto& f : factors) {
    if (static_cast<int>(f.size()) != space.rank()) throw std::invalid_argument("factor rank does not match the space");
    for (double v : f) {
      if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("factor coordinates must be non-negative");
    }
  }
}

}  // namespace

std::string to_string(const SpaceSpec& space) {
  if (space.kind == SpaceKind::AI) return "AI";
  return "AIII(p=" + std::to_string(space.p) + ",q=" + std::to_string(space.q) + ")";
}

SpaceSpec ai_space() { return {SpaceKind::AI, 1, 1}; }

SpaceSpec aiii_space(int p, int q) {
  if (p < 1 || q < p || q > 8) throw UnsupportedSpace("AIII sampling needs 1 <= p <= q <= 8");
  return {SpaceKind::AIII, p, q};
}

Eigen::MatrixXcd haar_unitary(int n, std::mt19937_64& rng) {
  if (n < 1 || n > kMaxUnitaryDim) throw std::invalid_argument("haar_unitary needs 1 <= n <= 64");
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  Eigen::MatrixXcd g(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) g(i, j) = {normal(rng), normal(rng)};
  }
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
  Eigen::MatrixXcd q = qr.householderQ();
  const auto& r = qr.matrixQR();
  for (int j = 0; j < n; ++j) {
    const std::complex<double> d = r(j, j);
    const double mag = std::abs(d);
    q.col(j) *= mag > 0.0 ? d / mag : std::complex<double>(1.0, 0.0);
  }
  return q;
}

Eigen::MatrixXcd haar_unitary(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return haar_unitary(n, rng);
}

std::span<const double> OrbitSampleSet::chamber_row(std::size_t i) const {
  const std::size_t p = space.rank();
  return {chamber.data() + i * p, p};
}

std::span<const double> OrbitSampleSet::pairing_row(std::size_t i) const {
  const std::size_t p = space.rank();
  return {pairing.data() + i * p, p};
}

OrbitSampleSet sample_orbit_sum(const SpaceSpec& space, const std::vector<std::vector<double>>& factors,
                                std::size_t n, std::uint64_t seed, Sampler sampler) {
  check_factors(space, factors);
  if (space.kind == SpaceKind::AIII) aiii_space(space.p, space.q);
  OrbitSampleSet set;
  set.space = space;
  set.factors = factors;
  set.seed = seed;
  set.n = n;
  const int p = space.rank();
  set.chamber.resize(n * p);
  set.pairing.resize(n * p);

  for (std::size_t start = 0; start < n; start += kChunk) {
    std::mt19937_64 rng(stats::mix_seed(seed, start / kChunk));
    const std::size_t stop = std::min(n, start + kChunk);
    for (std::size_t i = start; i < stop; ++i) {
      if (space.kind == SpaceKind::AI) {
        // Rotation by theta acts on traceless symmetric 2x2 matrices as rotation by 2 theta.
        double a = 0.0, b = 0.0;
        for (const auto& f : factors) {
          const double angle = 2.0 * std::numbers::pi * uniform01(rng);
          a += f[0] * std::cos(angle);
          b += f[0] * std::sin(angle);
        }
        set.chamber[i] = std::hypot(a, b);
        set.pairing[i] = a;
        continue;
      }
      Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(space.p, space.q);
      for (const auto& f : factors) {
        Eigen::MatrixXcd u;
        Eigen::MatrixXcd v;
        if (sampler == Sampler::FullUnitary) {
          u = haar_unitary(space.p, rng);
          v = haar_unitary(space.q, rng);
        } else {
          u = haar_unitary(space.p, rng);
          v = special_unitary(space.q, rng);
          v.col(0) *= std::conj(u.determinant()) / std::abs(u.determinant());
        }
        Eigen::MatrixXcd x = Eigen::MatrixXcd::Zero(space.p, space.q);
        for (int j = 0; j < space.p; ++j) x(j, j) = f[j];
        y += u * x * v.adjoint();
      }
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(y);
      const auto& sv = svd.singularValues();
      for (int j = 0; j < p; ++j) {
        set.chamber[i * p + j] = sv(j);
        set.pairing[i * p + j] = y(j, j).real();
      }
    }
  }
  return set;
}

TransformEstimate empirical_transform(const OrbitSampleSet& set, double scale, std::span<const double> lambda) {
  if (set.n < kMinTransformSamples) throw std::invalid_argument("empirical transform needs at least 1e4 samples");
  if (static_cast<int>(lambda.size()) != set.space.rank()) throw std::invalid_argument("lambda rank mismatch");
  stats::RunningStats re, im;
  for (std::size_t i = 0; i < set.n; ++i) {
    const auto y = set.pairing_row(i);
    double phase = 0.0;
    for (std::size_t j = 0; j < lambda.size(); ++j) phase += lambda[j] * y[j];
    phase *= scale;
    re.add(std::cos(phase));
    im.add(std::sin(phase));
  }
  TransformEstimate out;
  out.value = {re.mean(), im.mean()};
  out.std_error = std::sqrt((re.variance() + im.variance()) / static_cast<double>(set.n));
  out.flagged = out.std_error > 0.1 * std::abs(out.value);
  return out;
}

double factor_kernel(const SpaceSpec& space, std::span<const double> factor, std::span<const double> lambda) {
  if (space.kind == SpaceKind::AI) return kernels::kernel_rank1(specfun::BesselOrder(0.0), factor[0], std::abs(lambda[0]));
  std::vector<double> l(lambda.begin(), lambda.end());
  for (double& v : l) v = std::abs(v);
  std::sort(l.begin(), l.end(), std::greater<>());
  return kernels::spherical_kernel(space.q - space.p, factor, l).value;
}

double predicted_transform(const SpaceSpec& space, const std::vector<std::vector<double>>& factors,
                           std::span<const double> lambda) {
  double prod = 1.0;
  for (const auto& f : factors) prod *= factor_kernel(space, f, lambda);
  return prod;
}

CalibrationScale calibrate_scale(const OrbitSampleSet& single_factor, const std::vector<std::vector<double>>& grid) {
  if (single_factor.factors.size() != 1) throw std::invalid_argument("calibration needs a one-factor sample set");
  if (grid.size() < 8) throw std::invalid_argument("calibration needs at least 8 grid points");
  const auto& factor = single_factor.factors.front();
  std::vector<double> target;
  for (const auto& l : grid) target.push_back(factor_kernel(single_factor.space, factor, l));
  auto loss = [&](double s) {
    double acc = 0.0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const auto est = empirical_transform(single_factor, s, grid[g]);
      acc += std::norm(est.value - target[g]);
    }
    return acc;
  };
  // Coarse log-spaced search, then golden section around the best node.
  constexpr int kCoarse = 81;
  const double lo = std::log(0.25), hi = std::log(4.0);
  double best_s = 1.0, best = std::numeric_limits<double>::infinity();
  int best_i = 0;
  for (int i = 0; i < kCoarse; ++i) {
    const double s = std::exp(lo + (hi - lo) * i / (kCoarse - 1));
    const double v = loss(s);
    if (v < best) {
      best = v;
      best_s = s;
      best_i = i;
    }
  }
  double a = std::exp(lo + (hi - lo) * std::max(0, best_i - 1) / (kCoarse - 1));
  double b = std::exp(lo + (hi - lo) * std::min(kCoarse - 1, best_i + 1) / (kCoarse - 1));
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = loss(c), fd = loss(d);
  for (int it = 0; it < 40 && b - a > 1e-7 * best_s; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = loss(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = loss(d);
    }
  }
  CalibrationScale fit;
  fit.s = 0.5 * (a + b);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const auto est = empirical_transform(single_factor, fit.s, grid[g]);
    const double sigma = std::abs(est.value - target[g]) / est.std_error;
    fit.residual_sigma.push_back(sigma);
    fit.max_residual_sigma = std::max(fit.max_residual_sigma, sigma);
  }
  if (fit.max_residual_sigma > 3.0) {
    throw CalibrationError("calibration residual " + std::to_string(fit.max_residual_sigma) +
                               " stderr exceeds 3 at s = " + std::to_string(fit.s),
                           fit);
  }
  return fit;
}

ProductReport validate_product_formula(const OrbitSampleSet& set, const std::vector<std::vector<double>>& grid,
                                       double scale) {
  ProductReport rep;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    ProductRow row;
    row.lambda = grid[g];
    const auto est = empirical_transform(set, scale, grid[g]);
    row.empirical = est.value;
    row.std_error = est.std_error;
    row.predicted = predicted_transform(set.space, set.factors, grid[g]);
    row.pass = std::abs(est.value - row.predicted) <= 3.0 * est.std_error;
    if (!row.pass) {
      rep.passed = false;
      rep.failures.push_back(g);
    }
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

std::vector<std::vector<double>> default_grid(const SpaceSpec& space, int points) {
  std::vector<std::vector<double>> grid;
  const int p = space.rank();
  for (int i = 0; i < points; ++i) {
    const double alpha = space.kind == SpaceKind::AI ? 0.25 + 4.75 * i / std::max(1, points - 1)
                                                     : 0.1 + 1.9 * i / std::max(1, points - 1);
    std::vector<double> l(p);
    for (int j = 0; j < p; ++j) l[j] = alpha * (p - j) / p;
    grid.push_back(std::move(l));
  }
  return grid;
}

}  // namespace flatsph::haarmc
