#include "srde/spectral_core.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "srde/errors.hpp"
#include "srde/model.hpp"

namespace srde {

// ---------------------------------------------------------------------------
// SpectralBasis

SpectralBasis dirichlet_interval_basis(double length, std::size_t num_modes,
                                       std::size_t grid_size) {
  if (!(length > 0.0)) throw std::invalid_argument("domain length must be positive");
  if (num_modes == 0) throw std::invalid_argument("num_modes must be at least 1");
  if (grid_size < 4 * num_modes) throw std::invalid_argument("grid_size must be >= 4 * num_modes");

  SpectralBasis basis;
  basis.kind_ = SpectralBasis::Kind::dirichlet_interval;
  basis.length_ = length;
  basis.spacing_ = length / static_cast<double>(grid_size + 1);

  const double norm = std::sqrt(2.0 / length);
  basis.eigenvalues_.resize(num_modes);
  basis.sup_norms_.assign(num_modes, norm);
  for (std::size_t k = 1; k <= num_modes; ++k) {
    const double wave = static_cast<double>(k) * std::numbers::pi / length;
    basis.eigenvalues_[k - 1] = wave * wave;
  }

  basis.grid_.resize(grid_size);
  for (std::size_t m = 1; m <= grid_size; ++m) basis.grid_[m - 1] = basis.spacing_ * static_cast<double>(m);

  // sin(k m pi / (M+1)) with the angle reduced exactly in integers.
  const std::size_t period = 2 * (grid_size + 1);
  const double step = std::numbers::pi / static_cast<double>(grid_size + 1);
  basis.table_.resize(num_modes * grid_size);
  for (std::size_t k = 1; k <= num_modes; ++k) {
    double* row = basis.table_.data() + (k - 1) * grid_size;
    for (std::size_t m = 1; m <= grid_size; ++m) {
      const std::size_t idx = (k * m) % period;
      row[m - 1] = norm * std::sin(step * static_cast<double>(idx));
    }
  }
  return basis;
}

SpectralBasis SpectralBasis::tabulated(std::vector<double> eigenvalues, std::vector<double> sup_norms) {
  if (eigenvalues.empty()) throw std::invalid_argument("tabulated basis needs at least one mode");
  if (eigenvalues.size() != sup_norms.size())
    throw std::invalid_argument("eigenvalue and sup-norm arrays differ in length");
  for (std::size_t k = 0; k < eigenvalues.size(); ++k) {
    if (!(eigenvalues[k] >= 0.0)) throw std::invalid_argument("eigenvalues must be nonnegative");
    if (k > 0 && eigenvalues[k] < eigenvalues[k - 1])
      throw std::invalid_argument("eigenvalues must be nondecreasing");
    if (!(sup_norms[k] >= 0.0)) throw std::invalid_argument("sup-norms must be nonnegative");
  }
  SpectralBasis basis;
  basis.kind_ = Kind::tabulated;
  basis.eigenvalues_ = std::move(eigenvalues);
  basis.sup_norms_ = std::move(sup_norms);
  return basis;
}

std::size_t SpectralBasis::available_modes() const noexcept {
  return kind_ == Kind::dirichlet_interval ? std::numeric_limits<std::size_t>::max()
                                           : eigenvalues_.size();
}

double SpectralBasis::eigenvalue(std::size_t k) const {
  if (k == 0) throw std::out_of_range("modes are 1-based");
  if (k <= eigenvalues_.size()) return eigenvalues_[k - 1];
  if (kind_ != Kind::dirichlet_interval) throw std::out_of_range("mode beyond tabulated spectrum");
  const double wave = static_cast<double>(k) * std::numbers::pi / length_;
  return wave * wave;
}

double SpectralBasis::sup_norm(std::size_t k) const {
  if (k == 0) throw std::out_of_range("modes are 1-based");
  if (k <= sup_norms_.size()) return sup_norms_[k - 1];
  if (kind_ != Kind::dirichlet_interval) throw std::out_of_range("mode beyond tabulated spectrum");
  return std::sqrt(2.0 / length_);
}

double SpectralBasis::eigenfunction(std::size_t k, double x) const {
  if (kind_ != Kind::dirichlet_interval)
    throw std::logic_error("eigenfunctions are only known for the interval basis");
  if (k == 0) throw std::out_of_range("modes are 1-based");
  return std::sqrt(2.0 / length_) * std::sin(static_cast<double>(k) * std::numbers::pi * x / length_);
}

// ---------------------------------------------------------------------------
// Semigroup, kernel, transforms

void semigroup_apply_in_place(const SpectralBasis& basis, double t, std::span<double> coeffs) {
  if (!(t >= 0.0)) throw std::invalid_argument("semigroup time must be nonnegative");
  if (coeffs.size() > basis.num_modes()) throw std::invalid_argument("more coefficients than modes");
  if (t == 0.0) return;
  const auto alpha = basis.eigenvalues();
  for (std::size_t k = 0; k < coeffs.size(); ++k) coeffs[k] *= std::exp(-alpha[k] * t);
}

std::vector<double> semigroup_apply(const SpectralBasis& basis, double t, std::span<const double> coeffs) {
  std::vector<double> out(coeffs.begin(), coeffs.end());
  semigroup_apply_in_place(basis, t, out);
  return out;
}

double heat_kernel(const SpectralBasis& basis, double t, double x, double y, std::size_t truncation) {
  if (!(t > 0.0)) throw std::invalid_argument("heat kernel requires t > 0");
  const double length = basis.domain_length();
  if (!(x > 0.0 && x < length && y > 0.0 && y < length))
    throw std::invalid_argument("kernel arguments must lie inside the domain");
  double sum = 0.0;
  for (std::size_t k = 1; k <= truncation; ++k) {
    const double decay = std::exp(-basis.eigenvalue(k) * t);
    if (decay == 0.0) break;  // eigenvalues are nondecreasing
    sum += decay * basis.eigenfunction(k, x) * basis.eigenfunction(k, y);
  }
  return sum;
}

void forward_transform_into(const SpectralBasis& basis, std::span<const double> grid_values,
                            std::span<double> coeffs) {
  if (grid_values.size() != basis.grid_size())
    throw std::invalid_argument("grid array does not match basis grid size");
  if (coeffs.size() > basis.num_modes()) throw std::invalid_argument("more coefficients than modes");
  const double h = basis.grid_spacing();
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    const auto row = basis.mode_row(k);
    double acc = 0.0;
    for (std::size_t m = 0; m < row.size(); ++m) acc += row[m] * grid_values[m];
    coeffs[k] = h * acc;
  }
}

void inverse_transform_into(const SpectralBasis& basis, std::span<const double> coeffs,
                            std::span<double> grid_values) {
  if (grid_values.size() != basis.grid_size())
    throw std::invalid_argument("grid array does not match basis grid size");
  if (coeffs.size() > basis.num_modes()) throw std::invalid_argument("more coefficients than modes");
  std::fill(grid_values.begin(), grid_values.end(), 0.0);
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    const double c = coeffs[k];
    if (c == 0.0) continue;
    const auto row = basis.mode_row(k);
    for (std::size_t m = 0; m < row.size(); ++m) grid_values[m] += c * row[m];
  }
}

std::vector<double> forward_transform(const SpectralBasis& basis, std::span<const double> grid_values) {
  std::vector<double> coeffs(basis.num_modes());
  forward_transform_into(basis, grid_values, coeffs);
  return coeffs;
}

std::vector<double> inverse_transform(const SpectralBasis& basis, std::span<const double> coeffs) {
  std::vector<double> values(basis.grid_size());
  inverse_transform_into(basis, coeffs, values);
  return values;
}

// ---------------------------------------------------------------------------
// NoiseSpectrum

namespace {

void check_exponents(double rho, double theta) {
  if (!(rho >= 2.0)) throw std::invalid_argument("rho must lie in [2, infinity]");
  if (!(theta > 0.0)) throw std::invalid_argument("theta must be positive");
}

}  // namespace

NoiseSpectrum NoiseSpectrum::white(double theta) {
  check_exponents(rho_infinity, theta);
  NoiseSpectrum s;
  s.kind = Kind::white;
  s.rho = rho_infinity;
  s.theta = theta;
  return s;
}

NoiseSpectrum NoiseSpectrum::power_law(double decay, double rho, double theta) {
  check_exponents(rho, theta);
  if (!(decay >= 0.0)) throw std::invalid_argument("power-law decay must be nonnegative");
  NoiseSpectrum s;
  s.kind = Kind::power_law;
  s.decay = decay;
  s.rho = rho;
  s.theta = theta;
  return s;
}

NoiseSpectrum NoiseSpectrum::tabulated(std::vector<double> lambdas, double rho, double theta) {
  check_exponents(rho, theta);
  for (double v : lambdas)
    if (!(v >= 0.0)) throw std::invalid_argument("lambda_j must be nonnegative");
  NoiseSpectrum s;
  s.kind = Kind::tabulated;
  s.table = std::move(lambdas);
  s.rho = rho;
  s.theta = theta;
  return s;
}

double NoiseSpectrum::lambda(std::size_t j) const {
  if (j == 0) throw std::out_of_range("noise modes are 1-based");
  switch (kind) {
    case Kind::white:
      return 1.0;
    case Kind::power_law:
      return std::pow(static_cast<double>(j), -decay);
    case Kind::tabulated:
      return j <= table.size() ? table[j - 1] : 0.0;
  }
  return 0.0;
}

std::size_t NoiseSpectrum::finite_rank() const noexcept {
  return kind == Kind::tabulated ? table.size() : 0;
}

std::string NoiseSpectrum::kind_name() const {
  switch (kind) {
    case Kind::white:
      return "white";
    case Kind::power_law:
      return "power-law";
    case Kind::tabulated:
      return "tabulated";
  }
  return "?";
}

NoiseSpectrum load_spectrum_csv(const std::string& path, double rho, double theta) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open spectrum file " + path);
  std::vector<double> lambdas;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    double index = 0.0;
    double value = 0.0;
    if (!(fields >> index >> value)) {
      if (line_no == 1) continue;  // header
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected 'index,lambda'");
    }
    const auto j = static_cast<std::size_t>(index);
    if (j == 0 || static_cast<double>(j) != index)
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": index must be a positive integer");
    if (lambdas.size() < j) lambdas.resize(j, 0.0);
    lambdas[j - 1] = value;
  }
  return NoiseSpectrum::tabulated(std::move(lambdas), rho, theta);
}

double compute_eta(const NoiseSpectrum& spectrum) {
  check_exponents(spectrum.rho, spectrum.theta);
  const double eta = spectrum.rho_is_infinite()
                         ? spectrum.theta
                         : spectrum.theta * (spectrum.rho - 2.0) / spectrum.rho;
  if (!(eta < 1.0)) throw AssumptionViolation("eta = " + std::to_string(eta) + " is not below 1", eta);
  return eta;
}

// ---------------------------------------------------------------------------
// Assumption checks

namespace {

constexpr double kRelativeIncrementLimit = 1e-3;
constexpr double kDecayExponentLimit = 1.05;

// Partial sums at n/2 and n, local decay exponent from the terms at n/2 and n.
template <typename Term>
SeriesCheck summarize_series(Term&& term, std::size_t terms) {
  SeriesCheck check;
  check.terms = terms;
  const std::size_t half = std::max<std::size_t>(terms / 2, 1);
  double sum = 0.0;
  double compensation = 0.0;  // Kahan
  for (std::size_t k = 1; k <= terms; ++k) {
    const double y = term(k) - compensation;
    const double t = sum + y;
    compensation = (t - sum) - y;
    sum = t;
    if (k == half) check.half_sum = sum;
  }
  check.partial_sum = sum;

  const double a_half = term(half);
  const double a_last = term(terms);
  if (a_last == 0.0) {
    check.decay_exponent = std::numeric_limits<double>::infinity();
  } else if (a_half > 0.0 && half < terms) {
    check.decay_exponent = -std::log(a_last / a_half) / std::log(static_cast<double>(terms) / half);
  }

  const double increment = sum > 0.0 ? (sum - check.half_sum) / sum : 0.0;
  check.diverges = !std::isfinite(sum) ||
                   (increment > kRelativeIncrementLimit && !(check.decay_exponent > kDecayExponentLimit));
  if (!check.diverges && std::isfinite(check.decay_exponent) && check.decay_exponent > 1.0) {
    // Euler-Maclaurin tail of a k^-p sequence anchored at the last term.
    const double n = static_cast<double>(terms);
    check.tail_estimate = a_last * (n / (check.decay_exponent - 1.0) - 0.5);
  }
  return check;
}

}  // namespace

AssumptionReport check_assumptions(const SpectralBasis& basis, const NoiseSpectrum& spectrum,
                                   const ModelSpec& model, std::size_t tail_terms) {
  AssumptionReport report;
  auto& diag = report.diagnostics;
  if (tail_terms < 100) {
    diag.push_back("tail_terms raised to the minimum of 100");
    tail_terms = 100;
  }
  std::size_t terms = std::min(tail_terms, basis.available_modes());
  if (terms < tail_terms)
    diag.push_back("series truncated at the " + std::to_string(terms) + " tabulated modes");

  // eta
  try {
    report.eta = compute_eta(spectrum);
    report.eta_ok = true;
    diag.push_back("eta = " + std::to_string(report.eta) + " < 1: ok");
  } catch (const AssumptionViolation& e) {
    report.eta = e.value();
    diag.push_back(std::string("eta check failed: ") + e.what());
  } catch (const std::invalid_argument& e) {
    report.eta = std::numeric_limits<double>::quiet_NaN();
    diag.push_back(std::string("noise exponents invalid: ") + e.what());
  }

  // Noise summability.
  if (spectrum.rho_is_infinite()) {
    std::size_t n = spectrum.finite_rank() > 0 ? spectrum.finite_rank() : terms;
    double sup = 0.0;
    for (std::size_t j = 1; j <= n; ++j) sup = std::max(sup, spectrum.lambda(j));
    report.lambda_sum.value = sup;
    report.lambda_sum.partial_sum = sup;
    report.lambda_sum.terms = n;
    report.lambda_sum.diverges = !std::isfinite(sup);
    diag.push_back("sup_j lambda_j = " + std::to_string(sup) +
                   (report.lambda_sum.diverges ? ": unbounded" : ": bounded"));
  } else {
    const double rho = spectrum.rho;
    auto term = [&](std::size_t j) {
      const double e = basis.sup_norm(j);
      return std::pow(spectrum.lambda(j), rho) * e * e;
    };
    report.lambda_sum = summarize_series(term, terms);
    const double total = report.lambda_sum.partial_sum + report.lambda_sum.tail_estimate;
    report.lambda_sum.value = std::pow(total, 2.0 / rho);
    diag.push_back("(sum lambda_j^rho |e_j|^2)^(2/rho) ~ " + std::to_string(report.lambda_sum.value) +
                   (report.lambda_sum.diverges ? ": diverges" : ": converges"));
  }

  // Eigenvalue summability.
  if (basis.eigenvalue(1) <= 0.0) {
    report.alpha_sum.diverges = true;
    report.alpha_sum.value = std::numeric_limits<double>::infinity();
    diag.push_back("alpha_1 = 0: sum alpha_k^-theta |e_k|^2 is undefined");
  } else {
    auto term = [&](std::size_t k) {
      const double e = basis.sup_norm(k);
      return std::pow(basis.eigenvalue(k), -spectrum.theta) * e * e;
    };
    report.alpha_sum = summarize_series(term, terms);
    report.alpha_sum.value = report.alpha_sum.partial_sum + report.alpha_sum.tail_estimate;
    diag.push_back("sum alpha_k^-theta |e_k|^2 ~ " + std::to_string(report.alpha_sum.value) +
                   (report.alpha_sum.diverges ? ": diverges" : ": converges"));
  }

  // Growth balance between drift and diffusion.
  const double eta = report.eta_ok ? report.eta : std::numeric_limits<double>::quiet_NaN();
  report.gamma_threshold = 1.0 + (1.0 - eta) * (model.beta - 1.0) / 2.0;
  report.gamma_beta_ok = report.eta_ok && model.gamma < report.gamma_threshold;
  diag.push_back("gamma = " + std::to_string(model.gamma) + " vs 1 + (1-eta)(beta-1)/2 = " +
                 std::to_string(report.gamma_threshold) + (report.gamma_beta_ok ? ": ok" : ": violated"));

  report.within_hypotheses = model.beta > 1.0 && model.gamma > 1.0;
  if (!report.within_hypotheses)
    diag.push_back("beta and gamma must both exceed 1 for the non-explosion theorem");

  const double c0 = model.c0;
  const double samples[] = {-1e3 * c0, -10.0 * c0, -2.0 * c0, -1.5 * c0, 1.5 * c0, 2.0 * c0, 10.0 * c0, 1e3 * c0};
  const double margin = dissipativity_margin(model, samples);
  report.drift_dissipative = margin <= 0.0;
  diag.push_back("drift dissipativity margin = " + std::to_string(margin) +
                 (report.drift_dissipative ? ": ok" : ": not dissipative"));
  return report;
}

}  // namespace srde
